#include "vsimaser/spin_model.hpp"

#include <cmath>
#include <string>

#include "vsimaser/errors.hpp"
#include "vsimaser/isotopes.hpp"

namespace vsimaser {

namespace {

constexpr double kMinSearchField_mT = 1.0;

bool is_half_integer(double spin) {
  const double twice = 2.0 * spin;
  return spin > 0.0 && std::isfinite(spin) && twice == std::round(twice);
}

}  // namespace

void SpinSystem::validate() const {
  if (!is_half_integer(spin)) {
    throw ValidationError("spin must be a positive multiple of 1/2, got " + std::to_string(spin));
  }
  if (!(g_factor > 0.0)) throw ValidationError("g_factor must be > 0");
  if (!(zfs_d_MHz >= 0.0)) throw ValidationError("zfs_d_MHz must be >= 0");
  if (!(hyperfine_A_mT >= 0.0)) throw ValidationError("hyperfine_A_mT must be >= 0");
  if (!(abundance_i_half >= 0.0 && abundance_i_half <= 1.0)) {
    throw ValidationError("abundance_i_half must lie in [0, 1]");
  }
  if (n_neighbor_sites < 1) throw ValidationError("n_neighbor_sites must be >= 1");
}

Orientation Orientation::from_degrees(double theta_deg) {
  return Orientation{theta_deg * std::numbers::pi / 180.0};
}

double Orientation::degrees() const noexcept { return theta_rad * 180.0 / std::numbers::pi; }

void Orientation::validate() const {
  if (!(theta_rad >= 0.0 && theta_rad <= std::numbers::pi)) {
    throw ValidationError("theta must lie in [0, pi] rad");
  }
}

std::string_view to_string(TransitionLabel label) noexcept {
  switch (label) {
    case TransitionLabel::BMinus: return "B_minus";
    case TransitionLabel::BZero: return "B_zero";
    case TransitionLabel::BPlus: return "B_plus";
  }
  return "?";
}

TransitionLabel parse_transition_label(std::string_view text) {
  for (auto label : kAllTransitions) {
    if (to_string(label) == text) return label;
  }
  throw ValidationError("unknown transition label '" + std::string(text) +
                        "' (expected B_minus, B_zero or B_plus)");
}

const Transition& TransitionSet::at(TransitionLabel label) const {
  for (const auto& t : transitions) {
    if (t.label == label) return t;
  }
  throw ValidationError("transition " + std::string(to_string(label)) + " not present");
}

SpinOperators spin_operators(double spin) {
  if (!is_half_integer(spin)) {
    throw ValidationError("spin must be a positive multiple of 1/2, got " + std::to_string(spin));
  }
  const int dim = static_cast<int>(std::lround(2.0 * spin)) + 1;
  Eigen::MatrixXcd raise = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = spin - i;
    sz(i, i) = m;
    // <m+1| S+ |m> sits one row above the diagonal in this ordering.
    if (i > 0) raise(i - 1, i) = std::sqrt(spin * (spin + 1.0) - m * (m + 1.0));
  }
  const Eigen::MatrixXcd lower = raise.adjoint();
  const std::complex<double> i_unit(0.0, 1.0);
  return SpinOperators{0.5 * (raise + lower), (raise - lower) / (2.0 * i_unit), sz};
}

Eigen::MatrixXcd zero_field_hamiltonian(const SpinSystem& system) {
  system.validate();
  const auto ops = spin_operators(system.spin);
  const auto dim = ops.z.rows();
  const double s = system.spin;
  return system.zfs_d_MHz *
         (ops.z * ops.z - (s * (s + 1.0) / 3.0) * Eigen::MatrixXcd::Identity(dim, dim));
}

Eigen::MatrixXcd build_hamiltonian(const SpinSystem& system, double field_mT,
                                   const Orientation& orient) {
  if (!(field_mT >= 0.0)) throw ValidationError("field must be >= 0 mT");
  orient.validate();
  const auto ops = spin_operators(system.spin);
  const double zeeman = system.zeeman_MHz_per_mT() * field_mT;
  return zeeman * (std::sin(orient.theta_rad) * ops.x + std::cos(orient.theta_rad) * ops.z) +
         zero_field_hamiltonian(system);
}

Eigen::VectorXd energy_levels(const SpinSystem& system, double field_mT, const Orientation& orient) {
  // phi = 0 keeps the Hamiltonian real symmetric.
  const Eigen::MatrixXd h = build_hamiltonian(system, field_mT, orient).real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().reverse();
}

namespace {

// Gap between descending levels k and k+1 minus the microwave quantum.
double gap_residual(const SpinSystem& system, const Orientation& orient, int k, double mw_MHz,
                    double field_mT) {
  const Eigen::VectorXd e = energy_levels(system, field_mT, orient);
  return e(k) - e(k + 1) - mw_MHz;
}

double solve_resonance(const SpinSystem& system, const Orientation& orient, int k, double mw_MHz,
                       const RootFinderOptions& options) {
  double lo = kMinSearchField_mT;
  double hi = 2.0 * mw_MHz / system.zeeman_MHz_per_mT();
  double f_lo = gap_residual(system, orient, k, mw_MHz, lo);
  double f_hi = gap_residual(system, orient, k, mw_MHz, hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw NoResonanceError("no resonance for level pair " + std::to_string(k) + " in [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "] mT");
  }
  while (hi - lo > options.bracket_tolerance_mT) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = gap_residual(system, orient, k, mw_MHz, mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  // Secant polish, kept inside the bracket.
  double a = lo, fa = f_lo;
  double b = hi, fb = f_hi;
  for (int i = 0; i < options.max_polish_steps; ++i) {
    if (fb == fa) break;
    const double next = b - fb * (b - a) / (fb - fa);
    if (!(next >= lo && next <= hi)) break;
    if (std::abs(next - b) <= 1e-15 * std::abs(next)) {
      b = next;
      break;
    }
    a = b;
    fa = fb;
    b = next;
    fb = gap_residual(system, orient, k, mw_MHz, b);
    if (fb == 0.0) break;
  }
  return b;
}

}  // namespace

TransitionSet resonance_fields_exact(const SpinSystem& system, double mw_frequency_GHz,
                                     const Orientation& orient, const RootFinderOptions& options) {
  system.validate();
  orient.validate();
  if (system.spin != 1.5) throw ValidationError("resonance_fields_exact requires spin 3/2");
  if (!(mw_frequency_GHz > 0.0)) throw ValidationError("mw_frequency_GHz must be > 0");
  const double mw_MHz = mw_frequency_GHz * 1e3;

  const auto iso = isotope_site_probabilities(system.abundance_i_half, system.n_neighbor_sites);
  const std::vector<SubLine> sub_lines = {{-system.hyperfine_A_mT, 0.5 * iso.p_one_satellite},
                                          {0.0, iso.p_central},
                                          {system.hyperfine_A_mT, 0.5 * iso.p_one_satellite}};
  constexpr std::array<int, 3> signs = {+1, +1, -1};

  TransitionSet out;
  out.mw_frequency_GHz = mw_frequency_GHz;
  for (int k = 0; k < 3; ++k) {
    out.transitions.push_back(Transition{kAllTransitions[k],
                                         solve_resonance(system, orient, k, mw_MHz, options),
                                         signs[k], sub_lines});
  }
  return out;
}

double splitting_first_order(const SpinSystem& system, const Orientation& orient) {
  system.validate();
  const double c = std::cos(orient.theta_rad);
  return 2.0 * system.zfs_d_MHz * (3.0 * c * c - 1.0) / system.zeeman_MHz_per_mT();
}

double magic_angle() noexcept { return std::acos(1.0 / std::sqrt(3.0)); }

Eigen::Matrix3d zfs_tensor(const SpinSystem& system) {
  const double d = system.zfs_d_MHz;
  return Eigen::Vector3d(d / 3.0, d / 3.0, -2.0 * d / 3.0).asDiagonal();
}

}  // namespace vsimaser
