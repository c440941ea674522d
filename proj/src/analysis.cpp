#include "vsimaser/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vsimaser/errors.hpp"
#include "vsimaser/least_squares.hpp"

namespace vsimaser {

std::string_view to_string(WeightMode mode) noexcept {
  return mode == WeightMode::Free ? "free" : "abundance_constrained";
}

WeightMode parse_weight_mode(std::string_view text) {
  if (text == "free") return WeightMode::Free;
  if (text == "abundance_constrained") return WeightMode::AbundanceConstrained;
  throw ValidationError("unknown weight mode '" + std::string(text) +
                        "' (expected abundance_constrained or free)");
}

std::vector<std::string> LineGroupFit::parameter_names() const {
  if (weight_mode == WeightMode::Free) {
    return {"center_mT",  "hwhm_central_mT",         "hwhm_satellite_mT",       "amplitude",
            "satellite_amplitude_low", "satellite_amplitude_high", "satellite_offset_mT"};
  }
  return {"center_mT", "hwhm_central_mT", "hwhm_satellite_mT", "amplitude",
          "satellite_offset_mT"};
}

std::vector<double> LineGroupFit::parameter_values() const {
  if (weight_mode == WeightMode::Free) {
    return {center_mT, hwhm_central_mT,          hwhm_satellite_mT,  amplitude,
            satellite_amplitude_low, satellite_amplitude_high, satellite_offset_mT};
  }
  return {center_mT, hwhm_central_mT, hwhm_satellite_mT, amplitude, satellite_offset_mT};
}

double LineGroupFit::central_to_satellite_ratio() const {
  const double satellite = 0.5 * (satellite_amplitude_low + satellite_amplitude_high);
  return amplitude / satellite;
}

double LineGroupFit::model(double field_mT) const {
  return lorentzian_derivative(field_mT, {hwhm_central_mT, amplitude, center_mT}) +
         lorentzian_derivative(field_mT, {hwhm_satellite_mT, satellite_amplitude_low,
                                          center_mT - satellite_offset_mT}) +
         lorentzian_derivative(field_mT, {hwhm_satellite_mT, satellite_amplitude_high,
                                          center_mT + satellite_offset_mT});
}

LineGroupFitOptions LineGroupFitOptions::from_isotopes(const IsotopeSiteProbabilities& iso) {
  LineGroupFitOptions options;
  options.satellite_weight_ratio = 0.5 * iso.p_one_satellite / iso.p_central;
  return options;
}

LineGroupFit estimate_line_group(const SpectrumTrace& trace, const FieldWindow& window,
                                 double satellite_offset_mT, WeightMode mode,
                                 double satellite_weight_ratio) {
  const PeakToPeak pp = peak_to_peak(trace, window);
  LineGroupFit guess;
  guess.weight_mode = mode;
  guess.center_mT = pp.center_mT;
  guess.hwhm_central_mT = pp.width_pp_mT * std::sqrt(3.0) / 2.0;
  guess.hwhm_satellite_mT = guess.hwhm_central_mT;
  guess.amplitude = pp.amplitude;
  guess.satellite_amplitude_low = pp.amplitude * satellite_weight_ratio;
  guess.satellite_amplitude_high = guess.satellite_amplitude_low;
  guess.satellite_offset_mT = satellite_offset_mT;
  return guess;
}

namespace {

// Internal parameter layout. The centre is stored relative to a reference field and
// widths as logarithms so they stay positive.
struct TripletLayout {
  WeightMode mode;
  double reference_mT;
  double satellite_ratio;

  int size() const { return mode == WeightMode::Free ? 7 : 5; }
  int offset_index() const { return size() - 1; }

  Eigen::VectorXd pack(const LineGroupFit& fit) const {
    Eigen::VectorXd p(size());
    p(0) = fit.center_mT - reference_mT;
    p(1) = std::log(fit.hwhm_central_mT);
    p(2) = std::log(fit.hwhm_satellite_mT);
    p(3) = fit.amplitude;
    if (mode == WeightMode::Free) {
      p(4) = fit.satellite_amplitude_low;
      p(5) = fit.satellite_amplitude_high;
    }
    p(offset_index()) = fit.satellite_offset_mT;
    return p;
  }

  LineGroupFit unpack(const Eigen::VectorXd& p) const {
    LineGroupFit fit;
    fit.weight_mode = mode;
    fit.center_mT = reference_mT + p(0);
    fit.hwhm_central_mT = std::exp(p(1));
    fit.hwhm_satellite_mT = std::exp(p(2));
    fit.amplitude = p(3);
    if (mode == WeightMode::Free) {
      fit.satellite_amplitude_low = p(4);
      fit.satellite_amplitude_high = p(5);
    } else {
      fit.satellite_amplitude_low = p(3) * satellite_ratio;
      fit.satellite_amplitude_high = fit.satellite_amplitude_low;
    }
    fit.satellite_offset_mT = p(offset_index());
    return fit;
  }
};

void check_window_fit_input(const FieldWindow& window, const LineGroupFit& initial) {
  if (!(window.hi_mT > window.lo_mT)) throw ValidationError("fit window is empty");
  if (!(initial.center_mT >= window.lo_mT && initial.center_mT <= window.hi_mT)) {
    throw ValidationError("initial centre lies outside the fit window");
  }
  if (!(initial.hwhm_central_mT > 0.0 && initial.hwhm_satellite_mT > 0.0)) {
    throw ValidationError("initial widths must be > 0");
  }
  if (!(initial.satellite_offset_mT > 0.0)) {
    throw ValidationError("initial satellite offset must be > 0");
  }
}

}  // namespace

LineGroupFit fit_line_group(const SpectrumTrace& trace, const FieldWindow& window,
                            const LineGroupFit& initial, WeightMode mode,
                            const LineGroupFitOptions& options) {
  check_window_fit_input(window, initial);
  if (mode == WeightMode::AbundanceConstrained && !(options.satellite_weight_ratio > 0.0)) {
    throw ValidationError("abundance-constrained fit needs a positive satellite weight ratio");
  }

  const auto field = trace.field_mT();
  const auto signal = trace.signal();
  const auto begin = std::lower_bound(field.begin(), field.end(), window.lo_mT);
  const auto end = std::upper_bound(field.begin(), field.end(), window.hi_mT);
  const auto first = static_cast<std::size_t>(begin - field.begin());
  const auto count = static_cast<std::size_t>(end - begin);

  const TripletLayout layout{mode, initial.center_mT, options.satellite_weight_ratio};
  if (count <= static_cast<std::size_t>(layout.size())) {
    throw ValidationError("fit window holds too few samples");
  }
  Eigen::VectorXd sqrt_w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(count));
  if (!options.weights.empty()) {
    if (options.weights.size() != count) {
      throw ValidationError("weights length does not match the samples in the window");
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (!(options.weights[i] >= 0.0)) throw ValidationError("weights must be >= 0");
      sqrt_w(static_cast<Eigen::Index>(i)) = std::sqrt(options.weights[i]);
    }
  }

  const ResidualFunction residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                                        Eigen::MatrixXd* jac) {
    if (!p.allFinite()) return false;
    const LineGroupFit f = layout.unpack(p);
    r.resize(static_cast<Eigen::Index>(count));
    if (jac) jac->setZero(static_cast<Eigen::Index>(count), layout.size());
    const bool free = mode == WeightMode::Free;
    for (std::size_t k = 0; k < count; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const double b = field[first + k];
      const auto c = lorentzian_derivative_gradient(b, {f.hwhm_central_mT, f.amplitude, f.center_mT});
      const auto lo = lorentzian_derivative_gradient(
          b, {f.hwhm_satellite_mT, f.satellite_amplitude_low, f.center_mT - f.satellite_offset_mT});
      const auto hi = lorentzian_derivative_gradient(
          b, {f.hwhm_satellite_mT, f.satellite_amplitude_high, f.center_mT + f.satellite_offset_mT});
      r(i) = sqrt_w(i) * (c.value + lo.value + hi.value - signal[first + k]);
      if (!jac) continue;
      auto row = jac->row(i);
      row(0) = c.d_center + lo.d_center + hi.d_center;
      row(1) = c.d_hwhm * f.hwhm_central_mT;
      row(2) = (lo.d_hwhm + hi.d_hwhm) * f.hwhm_satellite_mT;
      if (free) {
        row(3) = c.d_amplitude;
        row(4) = lo.d_amplitude;
        row(5) = hi.d_amplitude;
      } else {
        row(3) = c.d_amplitude + layout.satellite_ratio * (lo.d_amplitude + hi.d_amplitude);
      }
      row(layout.offset_index()) = hi.d_center - lo.d_center;
      row *= sqrt_w(i);
    }
    return true;
  };

  LeastSquaresOptions ls;
  ls.relative_step_tolerance = options.relative_step_tolerance;
  ls.max_iterations = options.max_iterations;
  const double amp_scale = std::max(std::abs(initial.amplitude), 1e-300);
  ls.parameter_scale.assign(static_cast<std::size_t>(layout.size()), amp_scale);
  ls.parameter_scale[0] = initial.hwhm_central_mT;
  ls.parameter_scale[1] = 1.0;
  ls.parameter_scale[2] = 1.0;
  ls.parameter_scale.back() = initial.hwhm_central_mT;

  const LeastSquaresResult result = damped_least_squares(residual, layout.pack(initial), ls);
  LineGroupFit fit = layout.unpack(result.params);
  if (!result.converged) {
    throw ConvergenceError("line-group fit did not converge in " +
                               std::to_string(result.iterations) + " iterations",
                           fit.parameter_values(), result.iterations);
  }
  fit.iterations = result.iterations;
  fit.residual_rms = std::sqrt(2.0 * result.cost / sqrt_w.squaredNorm());
  fit.covariance_diag = covariance_diagonal(result);
  // Log-width variances to width variances (delta method).
  fit.covariance_diag[1] *= fit.hwhm_central_mT * fit.hwhm_central_mT;
  fit.covariance_diag[2] *= fit.hwhm_satellite_mT * fit.hwhm_satellite_mT;
  return fit;
}

SuperradianceResult superradiance_exponent(double i_plus, double i_hf, double n_plus, double n_hf) {
  if (!(i_plus > 0.0 && i_hf > 0.0 && n_plus > 0.0 && n_hf > 0.0)) {
    throw ValidationError("superradiance inputs must all be > 0");
  }
  if (n_plus == n_hf) {
    throw ValidationError("superradiance exponent undefined for equal spin numbers");
  }
  const double intensity_ratio = i_plus / i_hf;
  const double number_ratio = n_plus / n_hf;
  return SuperradianceResult{intensity_ratio, number_ratio,
                             std::log(intensity_ratio) / std::log(number_ratio)};
}

SuperradianceResult superradiance_exponent(double i_plus, double i_hf,
                                           const IsotopeSiteProbabilities& iso) {
  return superradiance_exponent(i_plus, i_hf, iso.p_central, 0.5 * iso.p_one_satellite);
}

SuperradianceResult superradiance_from_fit(const LineGroupFit& fit,
                                           const IsotopeSiteProbabilities& iso) {
  const double i_hf =
      0.5 * (std::abs(fit.satellite_amplitude_low) + std::abs(fit.satellite_amplitude_high));
  return superradiance_exponent(std::abs(fit.amplitude), i_hf, iso);
}

namespace {

void check_saturation_points(std::span<const SaturationPoint> points) {
  if (points.size() < 4) {
    throw ValidationError("saturation fit is underdetermined: need >= 4 points, got " +
                          std::to_string(points.size()));
  }
  std::vector<double> powers;
  for (const auto& pt : points) {
    if (!(pt.power_mW >= 0.0)) throw ValidationError("saturation powers must be >= 0");
    if (!std::isfinite(pt.delta_p)) throw ValidationError("saturation delta_p must be finite");
    powers.push_back(pt.power_mW);
  }
  std::sort(powers.begin(), powers.end());
  if (std::adjacent_find(powers.begin(), powers.end()) != powers.end()) {
    throw ValidationError("saturation powers must be distinct");
  }
}

}  // namespace

SaturationParams initial_saturation_guess(std::span<const SaturationPoint> points) {
  check_saturation_points(points);
  std::vector<double> powers;
  const SaturationPoint* largest = &points.front();
  for (const auto& pt : points) {
    powers.push_back(pt.power_mW);
    if (std::abs(pt.delta_p) > std::abs(largest->delta_p)) largest = &pt;
  }
  std::sort(powers.begin(), powers.end());
  const std::size_t n = powers.size();
  const double median = n % 2 ? powers[n / 2] : 0.5 * (powers[n / 2 - 1] + powers[n / 2]);
  return SaturationParams{largest->delta_p, median, powers.front()};
}

SaturationFit fit_saturation(std::span<const SaturationPoint> points,
                             const SaturationParams& initial, const SaturationFitOptions& options) {
  check_saturation_points(points);
  initial.validate();

  SaturationFit out;
  if (std::all_of(points.begin(), points.end(), [](const auto& pt) { return pt.delta_p == 0.0; })) {
    out.params = SaturationParams{0.0, initial.p0_mW, initial.p_alpha_mW};
    out.degenerate = true;
    out.covariance_diag.assign(3, std::numeric_limits<double>::quiet_NaN());
    out.cost_history = {0.0};
    return out;
  }

  // Parameters: (delta_p_max, ln P0, P_alpha).
  const ResidualFunction residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                                        Eigen::MatrixXd* jac) {
    if (!p.allFinite()) return false;
    const double amp = p(0);
    const double p0 = std::exp(p(1));
    const double p_alpha = p(2);
    if (!(p0 + p_alpha > 0.0)) return false;
    r.resize(static_cast<Eigen::Index>(points.size()));
    if (jac) jac->resize(r.size(), 3);
    for (std::size_t k = 0; k < points.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const double power = points[k].power_mW;
      const double log_ratio = std::log((p0 + power) / (p0 + p_alpha));
      r(i) = amp * log_ratio - points[k].delta_p;
      if (jac) {
        (*jac)(i, 0) = log_ratio;
        (*jac)(i, 1) = amp * p0 * (1.0 / (p0 + power) - 1.0 / (p0 + p_alpha));
        (*jac)(i, 2) = -amp / (p0 + p_alpha);
      }
    }
    return true;
  };

  LeastSquaresOptions ls;
  ls.relative_step_tolerance = options.relative_step_tolerance;
  ls.max_iterations = options.max_iterations;
  ls.parameter_scale = {std::max(std::abs(initial.delta_p_max), 1e-300), 1.0,
                        std::max(initial.p_alpha_mW, 1e-3 * initial.p0_mW)};
  const Eigen::Vector3d start(initial.delta_p_max, std::log(initial.p0_mW), initial.p_alpha_mW);
  const LeastSquaresResult result = damped_least_squares(residual, start, ls);
  if (!result.converged) {
    throw ConvergenceError("saturation fit did not converge in " +
                               std::to_string(result.iterations) + " iterations",
                           {result.params(0), std::exp(result.params(1)), result.params(2)},
                           result.iterations);
  }
  out.params = SaturationParams{result.params(0), std::exp(result.params(1)), result.params(2)};
  out.iterations = result.iterations;
  out.residual_rms = std::sqrt(2.0 * result.cost / static_cast<double>(points.size()));
  out.covariance_diag = covariance_diagonal(result);
  out.covariance_diag[1] *= out.params.p0_mW * out.params.p0_mW;
  out.cost_history = result.cost_history;
  return out;
}

LinewidthTrend linewidth_trend(std::span<const WidthSample> samples) {
  if (samples.size() < 2) throw ValidationError("linewidth trend needs >= 2 samples");
  std::vector<WidthSample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.power_mW < b.power_mW; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i].width_pp_mT > 0.0)) throw ValidationError("linewidths must be > 0");
    if (i > 0 && sorted[i].power_mW == sorted[i - 1].power_mW) {
      throw ValidationError("linewidth powers must be distinct");
    }
  }
  bool non_increasing = true;
  bool non_decreasing = true;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].width_pp_mT > sorted[i - 1].width_pp_mT) non_increasing = false;
    if (sorted[i].width_pp_mT < sorted[i - 1].width_pp_mT) non_decreasing = false;
  }
  return LinewidthTrend{sorted.back().width_pp_mT / sorted.front().width_pp_mT,
                        non_increasing || non_decreasing};
}

}  // namespace vsimaser
