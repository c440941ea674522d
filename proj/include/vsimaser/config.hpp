#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vsimaser/analysis.hpp"
#include "vsimaser/spectrum.hpp"
#include "vsimaser/spin_model.hpp"
#include "vsimaser/threshold.hpp"

namespace vsimaser {

/// Validated run configuration.
///
/// The file format is flat `key = value` lines, optionally grouped under
/// `[spin]`, `[conditions]`, `[grid]`, `[polarization]`, `[fit]` and `[threshold]`
/// headers. Key names are unique across sections and carry their unit. Lines starting
/// with `#` or `;` are comments.
struct RunConfig {
  SpinSystem spin;
  // No default: commands that need hyperfine satellites require it.
  std::optional<double> hyperfine_a_mT;
  ExperimentConditions conditions;

  struct Grid {
    std::optional<double> start_mT;
    std::optional<double> stop_mT;
    double step_mT = 0.002;
    double line_hwhm_mT = 0.039;
  } grid;

  struct PolarizationBlock {
    // Used for B_minus / B_plus when they are not set explicitly, projected on theta.
    double delta_p_max = 0.03;
    std::optional<double> delta_p_minus;
    std::optional<double> delta_p_plus;
    std::optional<double> delta_p_zero;
    double amplitude_scale = 1.0;
    double noise_sigma = 0.0;
  } polarization;

  struct FitBlock {
    TransitionLabel transition = TransitionLabel::BPlus;
    WeightMode weight_mode = WeightMode::AbundanceConstrained;
    std::optional<double> window_start_mT;
    std::optional<double> window_stop_mT;
    int max_iterations = 500;
    double relative_tolerance = 1e-8;
  } fit;

  // Rates and frequencies in Hz (cycles per second) as written in the file.
  struct ThresholdBlock {
    std::optional<double> pump_rate_Hz;
    std::optional<double> relaxation_rate_Hz;
    std::optional<double> spin_decay_rate_Hz;
    std::optional<double> coupling_Hz;
    std::optional<double> cavity_freq_Hz;
    double spin_count = 7.8e13;
    std::optional<double> q_actual;
  } threshold;

  // Spin system with the hyperfine spacing; throws ValidationError if it is unset.
  SpinSystem spin_with_hyperfine() const;
  // B_minus takes +delta_p(theta), B_plus -delta_p(theta) unless set explicitly.
  Polarization polarization_values() const;
  // Converted to rad/s. Throws ValidationError naming any missing key.
  MaserParams maser_params() const;
  double q_actual() const;
};

/// Every key the loader accepts.
const std::vector<std::string>& config_keys();

/// Parses and validates. Each defaulted key is reported on `log` as
/// `# default: key = value`. Errors carry the line number or the key name.
RunConfig parse_config(std::istream& is, std::ostream* log = nullptr);
RunConfig load_config(const std::filesystem::path& path, std::ostream* log = nullptr);

}  // namespace vsimaser
