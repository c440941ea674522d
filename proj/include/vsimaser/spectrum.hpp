#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsimaser/isotopes.hpp"
#include "vsimaser/spin_model.hpp"

namespace vsimaser {

struct LineShapeParams {
  double hwhm_mT;
  // Signed extremum-to-extremum height. Positive: maximum on the low-field side.
  double amplitude;
  double center_mT;

  void validate() const;
};

struct ExperimentConditions {
  double mw_frequency_GHz = 9.3;
  Orientation orientation{};
  double temperature_K = 300.0;
  double pump_power_mW = 0.0;
  double q_factor = 17000.0;

  void validate() const;
};

struct TraceMeta {
  double mw_frequency_GHz = 0.0;
  double theta_rad = 0.0;
  double temperature_K = 0.0;
  double pump_power_mW = 0.0;
  double q_factor = 0.0;
  std::string modulation_note;

  bool operator==(const TraceMeta&) const = default;
};

/// Field-swept first-derivative signal on a uniform, strictly increasing grid.
class SpectrumTrace {
 public:
  // Throws ValidationError if the grid is not strictly increasing and uniform,
  // or the arrays differ in length or hold fewer than two samples.
  SpectrumTrace(std::vector<double> field_mT, std::vector<double> signal, TraceMeta meta = {});

  std::span<const double> field_mT() const noexcept { return field_; }
  std::span<const double> signal() const noexcept { return signal_; }
  const TraceMeta& meta() const noexcept { return meta_; }
  std::size_t size() const noexcept { return field_.size(); }
  double step_mT() const noexcept;

 private:
  std::vector<double> field_;
  std::vector<double> signal_;
  TraceMeta meta_;
};

struct FieldGrid {
  double start_mT;
  double stop_mT;
  double step_mT;

  void validate() const;
  std::size_t count() const;
  std::vector<double> samples() const;
};

struct FieldWindow {
  double lo_mT;
  double hi_mT;
};

/// Signed population differences driving each transition. B_zero falls back to
/// the Boltzmann value for the experiment conditions when not given.
struct Polarization {
  double delta_p_minus = 0.0;
  double delta_p_plus = 0.0;
  std::optional<double> delta_p_zero;
};

struct SynthesisOptions {
  // Signal amplitude per unit population difference.
  double amplitude_scale = 1.0;
  // White noise is added only when a seed is supplied.
  double noise_sigma = 0.0;
  std::optional<std::uint64_t> seed;
  std::string modulation_note = "ideal first derivative";
};

struct PeakToPeak {
  double amplitude;
  double width_pp_mT;
  double center_mT;
};

/// Derivative of the Lorentzian G^2/((B-Bc)^2+G^2), normalised so the extremum-to-extremum
/// height equals |amplitude|. Extrema sit at Bc -+ G/sqrt(3).
double lorentzian_derivative(double field_mT, const LineShapeParams& params);

/// Partials of lorentzian_derivative with respect to (center, hwhm, amplitude).
struct LineShapeGradient {
  double value;
  double d_center;
  double d_hwhm;
  double d_amplitude;
};
LineShapeGradient lorentzian_derivative_gradient(double field_mT, const LineShapeParams& params);

/// Smallest grid covering every sub-line of the set with a margin of `margin_hwhm` widths.
FieldGrid covering_grid(const TransitionSet& transitions, double line_hwhm_mT, double step_mT,
                        double margin_hwhm = 20.0);

/// Sum of three transitions x three hyperfine sub-lines of Lorentzian derivatives.
///
/// Each sub-line amplitude is amplitude_scale * delta_p(transition) * weight(sub-line);
/// the sign of delta_p sets the phase. Throws ValidationError when a line centre
/// +- 5 widths falls outside the grid.
SpectrumTrace synthesize_spectrum(const SpinSystem& system, const ExperimentConditions& conditions,
                                  const FieldGrid& grid, double line_hwhm_mT,
                                  const Polarization& polarization,
                                  const SynthesisOptions& options = {});

/// Same, with resonance fields supplied by the caller.
SpectrumTrace synthesize_spectrum(const TransitionSet& transitions,
                                  const ExperimentConditions& conditions, const FieldGrid& grid,
                                  double line_hwhm_mT, const Polarization& polarization,
                                  double delta_p_boltzmann, const SynthesisOptions& options = {});

/// Extremum-to-extremum measurement inside `window`. Extrema are refined below the
/// grid step by local quartic interpolation. Amplitude is negative when the minimum
/// precedes the maximum in field. Throws ValidationError for an empty window and
/// NotFoundError when the height does not exceed `noise_floor`.
PeakToPeak peak_to_peak(const SpectrumTrace& trace, const FieldWindow& window,
                        double noise_floor = 0.0);

}  // namespace vsimaser
