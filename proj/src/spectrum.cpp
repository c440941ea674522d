#include "vsimaser/spectrum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "vsimaser/errors.hpp"
#include "vsimaser/population.hpp"

namespace vsimaser {

namespace {

// Maps the raw derivative -2 G^2 u / (u^2 + G^2)^2 onto unit extremum-to-extremum height.
const double kShapeNorm = 8.0 * std::sqrt(3.0) / 9.0;

constexpr double kClipMarginHwhm = 5.0;

}  // namespace

IsotopeSiteProbabilities isotope_site_probabilities(double abundance, int n_sites) {
  if (!(abundance >= 0.0 && abundance <= 1.0)) {
    throw ValidationError("isotope abundance must lie in [0, 1]");
  }
  if (n_sites < 1) throw ValidationError("n_sites must be >= 1");
  const double n = n_sites;
  const double central = std::pow(1.0 - abundance, n);
  const double one = n * abundance * std::pow(1.0 - abundance, n - 1.0);
  return IsotopeSiteProbabilities{central, one, std::max(0.0, 1.0 - central - one)};
}

void LineShapeParams::validate() const {
  if (!(hwhm_mT > 0.0)) throw ValidationError("line hwhm_mT must be > 0");
  if (!std::isfinite(amplitude) || !std::isfinite(center_mT)) {
    throw ValidationError("line amplitude and center must be finite");
  }
}

void ExperimentConditions::validate() const {
  if (!(mw_frequency_GHz > 0.0)) throw ValidationError("mw_frequency_GHz must be > 0");
  orientation.validate();
  if (!(temperature_K > 0.0)) throw ValidationError("temperature_K must be > 0");
  if (!(pump_power_mW >= 0.0)) throw ValidationError("pump_power_mW must be >= 0");
  if (!(q_factor > 0.0)) throw ValidationError("q_factor must be > 0");
}

SpectrumTrace::SpectrumTrace(std::vector<double> field_mT, std::vector<double> signal,
                             TraceMeta meta)
    : field_(std::move(field_mT)), signal_(std::move(signal)), meta_(std::move(meta)) {
  if (field_.size() != signal_.size()) {
    throw ValidationError("field and signal arrays differ in length (" +
                          std::to_string(field_.size()) + " vs " + std::to_string(signal_.size()) +
                          ")");
  }
  if (field_.size() < 2) throw ValidationError("a trace needs at least two samples");
  for (std::size_t i = 1; i < field_.size(); ++i) {
    if (!(field_[i] > field_[i - 1])) {
      throw ValidationError("field grid is not strictly increasing at sample " + std::to_string(i));
    }
  }
  const double mean_step = step_mT();
  for (std::size_t i = 1; i < field_.size(); ++i) {
    const double step = field_[i] - field_[i - 1];
    if (std::abs(step - mean_step) > 1e-9 * mean_step) {
      throw ValidationError("field grid is not uniform at sample " + std::to_string(i));
    }
  }
}

double SpectrumTrace::step_mT() const noexcept {
  return (field_.back() - field_.front()) / static_cast<double>(field_.size() - 1);
}

void FieldGrid::validate() const {
  if (!(step_mT > 0.0)) throw ValidationError("grid step must be > 0");
  if (!(stop_mT > start_mT)) throw ValidationError("grid stop must exceed start");
  if (!(start_mT >= 0.0)) throw ValidationError("grid start must be >= 0 mT");
}

std::size_t FieldGrid::count() const {
  validate();
  return static_cast<std::size_t>(std::floor((stop_mT - start_mT) / step_mT + 1e-9)) + 1;
}

std::vector<double> FieldGrid::samples() const {
  const std::size_t n = count();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = start_mT + static_cast<double>(i) * step_mT;
  return out;
}

double lorentzian_derivative(double field_mT, const LineShapeParams& params) {
  const double u = field_mT - params.center_mT;
  const double g = params.hwhm_mT;
  const double denom = u * u + g * g;
  return -params.amplitude * kShapeNorm * g * g * g * u / (denom * denom);
}

LineShapeGradient lorentzian_derivative_gradient(double field_mT, const LineShapeParams& params) {
  const double u = field_mT - params.center_mT;
  const double g = params.hwhm_mT;
  const double denom = u * u + g * g;
  const double denom3 = denom * denom * denom;
  const double unit = -kShapeNorm * g * g * g * u / (denom * denom);
  const double a = params.amplitude;
  return LineShapeGradient{
      a * unit,
      // d/du = -aK G^3 (G^2 - 3u^2) / denom^3; the centre enters as -u.
      a * kShapeNorm * g * g * g * (g * g - 3.0 * u * u) / denom3,
      -a * kShapeNorm * u * g * g * (3.0 * u * u - g * g) / denom3,
      unit,
  };
}

FieldGrid covering_grid(const TransitionSet& transitions, double line_hwhm_mT, double step_mT,
                        double margin_hwhm) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& t : transitions.transitions) {
    for (const auto& s : t.sub_lines) {
      lo = std::min(lo, t.resonance_field_mT + s.offset_mT);
      hi = std::max(hi, t.resonance_field_mT + s.offset_mT);
    }
  }
  const double margin = margin_hwhm * line_hwhm_mT;
  const double start = std::max(0.0, std::floor((lo - margin) / step_mT) * step_mT);
  const double span = std::ceil((hi + margin - start) / step_mT) * step_mT;
  return FieldGrid{start, start + span, step_mT};
}

SpectrumTrace synthesize_spectrum(const TransitionSet& transitions,
                                  const ExperimentConditions& conditions, const FieldGrid& grid,
                                  double line_hwhm_mT, const Polarization& polarization,
                                  double delta_p_boltzmann, const SynthesisOptions& options) {
  conditions.validate();
  if (!(line_hwhm_mT > 0.0)) throw ValidationError("line_hwhm_mT must be > 0");
  const double dp_zero = polarization.delta_p_zero.value_or(delta_p_boltzmann);
  for (double dp : {polarization.delta_p_minus, polarization.delta_p_plus, dp_zero}) {
    if (!std::isfinite(dp)) throw ValidationError("population differences must be finite");
  }

  std::vector<double> field = grid.samples();
  const double last = field.back();

  std::vector<LineShapeParams> lines;
  for (const auto& t : transitions.transitions) {
    double dp = 0.0;
    switch (t.label) {
      case TransitionLabel::BMinus: dp = polarization.delta_p_minus; break;
      case TransitionLabel::BZero: dp = dp_zero; break;
      case TransitionLabel::BPlus: dp = polarization.delta_p_plus; break;
    }
    for (const auto& s : t.sub_lines) {
      const double center = t.resonance_field_mT + s.offset_mT;
      if (center - kClipMarginHwhm * line_hwhm_mT < grid.start_mT ||
          center + kClipMarginHwhm * line_hwhm_mT > last) {
        throw ValidationError("grid too narrow: line of " + std::string(to_string(t.label)) +
                              " at " + std::to_string(center) + " mT would be clipped");
      }
      lines.push_back(LineShapeParams{line_hwhm_mT, options.amplitude_scale * dp * s.weight, center});
    }
  }

  std::vector<double> signal(field.size(), 0.0);
  for (std::size_t i = 0; i < field.size(); ++i) {
    double sum = 0.0;
    for (const auto& line : lines) sum += lorentzian_derivative(field[i], line);
    signal[i] = sum;
  }

  if (options.seed && options.noise_sigma > 0.0) {
    std::mt19937_64 rng(*options.seed);
    std::normal_distribution<double> noise(0.0, options.noise_sigma);
    for (double& v : signal) v += noise(rng);
  }

  TraceMeta meta{conditions.mw_frequency_GHz, conditions.orientation.theta_rad,
                 conditions.temperature_K,    conditions.pump_power_mW,
                 conditions.q_factor,         options.modulation_note};
  return SpectrumTrace(std::move(field), std::move(signal), std::move(meta));
}

SpectrumTrace synthesize_spectrum(const SpinSystem& system, const ExperimentConditions& conditions,
                                  const FieldGrid& grid, double line_hwhm_mT,
                                  const Polarization& polarization,
                                  const SynthesisOptions& options) {
  conditions.validate();
  const auto transitions =
      resonance_fields_exact(system, conditions.mw_frequency_GHz, conditions.orientation);
  return synthesize_spectrum(transitions, conditions, grid, line_hwhm_mT, polarization,
                             boltzmann_delta_p(conditions.mw_frequency_GHz, conditions.temperature_K),
                             options);
}

namespace {

struct Extremum {
  double field_mT;
  double value;
};

// Refines a discrete extremum at index `i` with a quartic through five neighbours.
Extremum refine_extremum(std::span<const double> field, std::span<const double> signal,
                         std::size_t i, bool is_max) {
  const std::size_t n = field.size();
  const Extremum discrete{field[i], signal[i]};
  if (n < 5) return discrete;
  const std::size_t first = std::clamp<std::size_t>(i < 2 ? 0 : i - 2, 0, n - 5);
  const double h = (field[n - 1] - field[0]) / static_cast<double>(n - 1);

  Eigen::Matrix<double, 5, 5> vandermonde;
  Eigen::Matrix<double, 5, 1> rhs;
  for (int r = 0; r < 5; ++r) {
    const double t = static_cast<double>(first + r) - static_cast<double>(i);
    double power = 1.0;
    for (int c = 0; c < 5; ++c) {
      vandermonde(r, c) = power;
      power *= t;
    }
    rhs(r) = signal[first + r];
  }
  const Eigen::Matrix<double, 5, 1> coef = vandermonde.partialPivLu().solve(rhs);
  auto poly = [&](double t) {
    return coef(0) + t * (coef(1) + t * (coef(2) + t * (coef(3) + t * coef(4))));
  };
  auto d1 = [&](double t) {
    return coef(1) + t * (2 * coef(2) + t * (3 * coef(3) + t * 4 * coef(4)));
  };
  auto d2 = [&](double t) { return 2 * coef(2) + t * (6 * coef(3) + t * 12 * coef(4)); };

  double t = 0.0;
  for (int iter = 0; iter < 30; ++iter) {
    const double curvature = d2(t);
    if (curvature == 0.0 || (is_max ? curvature > 0.0 : curvature < 0.0)) return discrete;
    const double step = d1(t) / curvature;
    t -= step;
    if (std::abs(t) > 1.0) return discrete;
    if (std::abs(step) < 1e-14) break;
  }
  const double value = poly(t);
  if (is_max ? value < discrete.value : value > discrete.value) return discrete;
  return Extremum{field[i] + t * h, value};
}

}  // namespace

PeakToPeak peak_to_peak(const SpectrumTrace& trace, const FieldWindow& window, double noise_floor) {
  const auto field = trace.field_mT();
  const auto signal = trace.signal();
  const auto begin = std::lower_bound(field.begin(), field.end(), window.lo_mT);
  const auto end = std::upper_bound(field.begin(), field.end(), window.hi_mT);
  if (!(window.hi_mT > window.lo_mT) || end - begin < 2) {
    throw ValidationError("peak-to-peak window holds fewer than two samples");
  }
  const auto i0 = static_cast<std::size_t>(begin - field.begin());
  const auto i1 = static_cast<std::size_t>(end - field.begin());
  std::size_t imax = i0, imin = i0;
  for (std::size_t i = i0; i < i1; ++i) {
    if (signal[i] > signal[imax]) imax = i;
    if (signal[i] < signal[imin]) imin = i;
  }
  if (!(signal[imax] - signal[imin] > noise_floor)) {
    throw NotFoundError("no line above the noise floor in the window");
  }
  const Extremum hi = refine_extremum(field, signal, imax, true);
  const Extremum lo = refine_extremum(field, signal, imin, false);
  const double height = hi.value - lo.value;
  return PeakToPeak{lo.field_mT < hi.field_mT ? -height : height,
                    std::abs(hi.field_mT - lo.field_mT), 0.5 * (hi.field_mT + lo.field_mT)};
}

}  // namespace vsimaser
