#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsimaser/isotopes.hpp"
#include "vsimaser/population.hpp"
#include "vsimaser/spectrum.hpp"

namespace vsimaser {

enum class WeightMode { AbundanceConstrained, Free };

std::string_view to_string(WeightMode mode) noexcept;
WeightMode parse_weight_mode(std::string_view text);

/// A central Lorentzian-derivative line flanked by two hyperfine satellites at
/// centre -+ satellite_offset. In abundance-constrained mode both satellite amplitudes
/// equal amplitude * satellite_weight_ratio.
struct LineGroupFit {
  double center_mT = 0.0;
  double hwhm_central_mT = 0.0;
  double hwhm_satellite_mT = 0.0;
  double amplitude = 0.0;
  double satellite_amplitude_low = 0.0;
  double satellite_amplitude_high = 0.0;
  double satellite_offset_mT = 0.0;
  WeightMode weight_mode = WeightMode::AbundanceConstrained;
  double residual_rms = 0.0;
  // Variances in the order of parameter_names().
  std::vector<double> covariance_diag;
  int iterations = 0;

  std::vector<std::string> parameter_names() const;
  // Free-parameter values in the order of parameter_names().
  std::vector<double> parameter_values() const;
  // Central amplitude over the mean satellite amplitude.
  double central_to_satellite_ratio() const;
  double model(double field_mT) const;
};

struct LineGroupFitOptions {
  // One satellite's amplitude over the central amplitude in constrained mode.
  double satellite_weight_ratio = 0.0;
  // Optional per-sample weights over the window; empty means uniform.
  std::vector<double> weights;
  double relative_step_tolerance = 1e-8;
  int max_iterations = 500;

  // Constrained ratio from neighbour-shell statistics: (p_one / 2) / p_central.
  static LineGroupFitOptions from_isotopes(const IsotopeSiteProbabilities& iso);
};

/// Starting point from the window: centre at the extrema midpoint, widths from the
/// extrema spacing times sqrt(3)/2, central amplitude from the peak-to-peak height.
LineGroupFit estimate_line_group(const SpectrumTrace& trace, const FieldWindow& window,
                                 double satellite_offset_mT, WeightMode mode,
                                 double satellite_weight_ratio);

/// Weighted damped least squares of the triplet model over the samples in `window`.
/// Throws ConvergenceError (carrying the last iterate) after max_iterations and
/// DegenerateFitError when the normal equations are singular.
LineGroupFit fit_line_group(const SpectrumTrace& trace, const FieldWindow& window,
                            const LineGroupFit& initial, WeightMode mode,
                            const LineGroupFitOptions& options);

struct SuperradianceResult {
  double intensity_ratio;
  double number_ratio;
  double exponent_k;
};

/// k = ln(I+/I_HF) / ln(N+/N_HF).
SuperradianceResult superradiance_exponent(double i_plus, double i_hf, double n_plus, double n_hf);
/// Spin-number ratio taken from the neighbour-shell statistics (one satellite).
SuperradianceResult superradiance_exponent(double i_plus, double i_hf,
                                           const IsotopeSiteProbabilities& iso);
/// Intensities from a free-mode fit; I_HF is the mean of the two satellite magnitudes.
SuperradianceResult superradiance_from_fit(const LineGroupFit& fit,
                                           const IsotopeSiteProbabilities& iso);

struct SaturationPoint {
  double power_mW;
  double delta_p;
};

struct SaturationFit {
  SaturationParams params;
  double residual_rms = 0.0;
  int iterations = 0;
  // Set when the data carry no signal and P0, P_alpha cannot be identified.
  bool degenerate = false;
  // Variances of (delta_p_max, P0, P_alpha).
  std::vector<double> covariance_diag;
  // Objective after each accepted iteration.
  std::vector<double> cost_history;
};

struct SaturationFitOptions {
  double relative_step_tolerance = 1e-8;
  int max_iterations = 500;
};

/// Default start: delta_p_max from the largest |delta_p|, P0 the median power,
/// P_alpha the smallest power.
SaturationParams initial_saturation_guess(std::span<const SaturationPoint> points);

SaturationFit fit_saturation(std::span<const SaturationPoint> points,
                             const SaturationParams& initial,
                             const SaturationFitOptions& options = {});

struct WidthSample {
  double power_mW;
  double width_pp_mT;
};

struct LinewidthTrend {
  // Width at the highest power over width at the lowest power.
  double ratio_high_to_low;
  // Non-strictly monotone in power, either direction.
  bool monotone;
};

LinewidthTrend linewidth_trend(std::span<const WidthSample> samples);

}  // namespace vsimaser
