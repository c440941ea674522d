#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsimaser {

/// Inputs of the maser threshold condition. Every rate and frequency is an angular
/// frequency in rad/s; the threshold is unchanged by a common 2*pi factor, but mixing
/// conventions between fields is not.
struct MaserParams {
  double pump_rate;             // omega
  double relaxation_rate;       // gamma_eg
  double spin_decay_rate;       // kappa_S, collective spin mode
  double cavity_freq;           // omega_c
  double spin_count;            // N
  double spin_photon_coupling;  // g_s, single spin

  void validate() const;
};

/// Q_min = (omega + gamma)/(omega - gamma) * kappa_S omega_c / (4 N g_s^2).
/// Throws NoInversionError unless pump_rate > relaxation_rate.
double threshold_q(const MaserParams& params);

struct MasingMargin {
  bool above_threshold;
  // q_actual / Q_min
  double margin;
};

MasingMargin masing_margin(double q_actual, const MaserParams& params);

enum class MaserAxis {
  PumpRate,
  RelaxationRate,
  SpinDecayRate,
  CavityFreq,
  SpinCount,
  SpinPhotonCoupling,
};

// Axis names match the MaserParams field names.
std::string_view to_string(MaserAxis axis) noexcept;
MaserAxis parse_maser_axis(std::string_view name);
MaserParams with_axis_value(MaserParams base, MaserAxis axis, double value);

enum class SweepStatus { Ok, NoInversion };
std::string_view to_string(SweepStatus status) noexcept;

struct ThresholdRow {
  double axis_value;
  // +inf when the row has no inversion.
  double q_min;
  SweepStatus status;
};

/// One row per value, in input order. Rows without inversion are kept and marked.
std::vector<ThresholdRow> threshold_sweep(const MaserParams& base, std::string_view axis,
                                          std::span<const double> values);

}  // namespace vsimaser
