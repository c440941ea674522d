#include "vsimaser/threshold.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "vsimaser/errors.hpp"

namespace vsimaser {

namespace {

constexpr std::array<MaserAxis, 6> kAxes = {
    MaserAxis::PumpRate,  MaserAxis::RelaxationRate, MaserAxis::SpinDecayRate,
    MaserAxis::CavityFreq, MaserAxis::SpinCount,     MaserAxis::SpinPhotonCoupling};

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(std::string(name) + " must be finite and > 0");
  }
}

}  // namespace

void MaserParams::validate() const {
  require_positive(pump_rate, "pump_rate");
  require_positive(relaxation_rate, "relaxation_rate");
  require_positive(spin_decay_rate, "spin_decay_rate");
  require_positive(cavity_freq, "cavity_freq");
  require_positive(spin_count, "spin_count");
  require_positive(spin_photon_coupling, "spin_photon_coupling");
}

double threshold_q(const MaserParams& params) {
  params.validate();
  if (!(params.pump_rate > params.relaxation_rate)) {
    throw NoInversionError("no population inversion: pump_rate must exceed relaxation_rate");
  }
  const double pump_factor = (params.pump_rate + params.relaxation_rate) /
                             (params.pump_rate - params.relaxation_rate);
  const double g = params.spin_photon_coupling;
  return pump_factor * params.spin_decay_rate * params.cavity_freq /
         (4.0 * params.spin_count * g * g);
}

MasingMargin masing_margin(double q_actual, const MaserParams& params) {
  require_positive(q_actual, "q_actual");
  const double margin = q_actual / threshold_q(params);
  return MasingMargin{margin >= 1.0, margin};
}

std::string_view to_string(MaserAxis axis) noexcept {
  switch (axis) {
    case MaserAxis::PumpRate: return "pump_rate";
    case MaserAxis::RelaxationRate: return "relaxation_rate";
    case MaserAxis::SpinDecayRate: return "spin_decay_rate";
    case MaserAxis::CavityFreq: return "cavity_freq";
    case MaserAxis::SpinCount: return "spin_count";
    case MaserAxis::SpinPhotonCoupling: return "spin_photon_coupling";
  }
  return "?";
}

MaserAxis parse_maser_axis(std::string_view name) {
  for (auto axis : kAxes) {
    if (to_string(axis) == name) return axis;
  }
  throw ValidationError("unknown sweep axis '" + std::string(name) + "'");
}

MaserParams with_axis_value(MaserParams base, MaserAxis axis, double value) {
  switch (axis) {
    case MaserAxis::PumpRate: base.pump_rate = value; break;
    case MaserAxis::RelaxationRate: base.relaxation_rate = value; break;
    case MaserAxis::SpinDecayRate: base.spin_decay_rate = value; break;
    case MaserAxis::CavityFreq: base.cavity_freq = value; break;
    case MaserAxis::SpinCount: base.spin_count = value; break;
    case MaserAxis::SpinPhotonCoupling: base.spin_photon_coupling = value; break;
  }
  return base;
}

std::string_view to_string(SweepStatus status) noexcept {
  return status == SweepStatus::Ok ? "ok" : "no-inversion";
}

std::vector<ThresholdRow> threshold_sweep(const MaserParams& base, std::string_view axis,
                                          std::span<const double> values) {
  const MaserAxis parsed = parse_maser_axis(axis);
  std::vector<ThresholdRow> rows;
  rows.reserve(values.size());
  for (double value : values) {
    const MaserParams params = with_axis_value(base, parsed, value);
    params.validate();
    if (params.pump_rate > params.relaxation_rate) {
      rows.push_back({value, threshold_q(params), SweepStatus::Ok});
    } else {
      rows.push_back({value, std::numeric_limits<double>::infinity(), SweepStatus::NoInversion});
    }
  }
  return rows;
}

}  // namespace vsimaser
