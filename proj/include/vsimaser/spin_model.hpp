#pragma once

#include <Eigen/Dense>

#include <array>
#include <string_view>
#include <vector>

#include "vsimaser/constants.hpp"

namespace vsimaser {

/// Static parameters of an axial spin defect and its nuclear environment.
///
/// Energies are in MHz and fields in mT throughout the library. For S = 3/2 the
/// zero-field splitting between the +-3/2 and +-1/2 Kramers doublets is 2D.
struct SpinSystem {
  double spin = 1.5;
  double g_factor = constants::free_electron_g;
  double zfs_d_MHz = 35.0;
  // Spacing between a transition's central line and each hyperfine satellite.
  double hyperfine_A_mT = 0.0;
  // Fraction of neighbour sites occupied by a spin-1/2 nucleus (29Si).
  double abundance_i_half = 0.047;
  int n_neighbor_sites = 12;

  // Throws ValidationError naming the offending field.
  void validate() const;

  double zfs_MHz() const noexcept { return 2.0 * zfs_d_MHz; }
  // Electron Zeeman frequency per unit field, MHz/mT.
  double zeeman_MHz_per_mT() const noexcept { return g_factor * constants::bohr_MHz_per_mT; }
};

/// Polar angle between the applied field and the defect symmetry (c) axis.
struct Orientation {
  double theta_rad = 0.0;

  static Orientation from_degrees(double theta_deg);
  double degrees() const noexcept;
  void validate() const;
};

enum class TransitionLabel { BMinus, BZero, BPlus };

inline constexpr std::array<TransitionLabel, 3> kAllTransitions = {
    TransitionLabel::BMinus, TransitionLabel::BZero, TransitionLabel::BPlus};

std::string_view to_string(TransitionLabel label) noexcept;
// Accepts "B_minus", "B_zero", "B_plus"; throws ValidationError otherwise.
TransitionLabel parse_transition_label(std::string_view text);

struct SubLine {
  double offset_mT;
  double weight;
};

struct Transition {
  TransitionLabel label;
  double resonance_field_mT;
  // +1 absorptive, -1 emissive under optical pumping.
  int sign;
  std::vector<SubLine> sub_lines;
};

struct TransitionSet {
  std::vector<Transition> transitions;
  double mw_frequency_GHz = 0.0;

  const Transition& at(TransitionLabel label) const;
};

struct SpinOperators {
  Eigen::MatrixXcd x;
  Eigen::MatrixXcd y;
  Eigen::MatrixXcd z;
};

/// Angular momentum matrices in the |m> basis ordered m = S, S-1, ..., -S.
SpinOperators spin_operators(double spin);

/// Field-independent axial term D (Sz^2 - S(S+1)/3), in MHz.
Eigen::MatrixXcd zero_field_hamiltonian(const SpinSystem& system);

/// Spin Hamiltonian in MHz, defect frame with the field tilted by theta in the xz plane.
Eigen::MatrixXcd build_hamiltonian(const SpinSystem& system, double field_mT,
                                   const Orientation& orient);

/// Eigenvalues of build_hamiltonian, descending.
Eigen::VectorXd energy_levels(const SpinSystem& system, double field_mT, const Orientation& orient);

struct RootFinderOptions {
  // Bisection stops once the bracket is narrower than this; secant steps then polish the root.
  double bracket_tolerance_mT = 1e-4;
  int max_polish_steps = 50;
};

/// Exact resonance fields of the three Delta m = +-1 transitions of an S = 3/2 defect.
///
/// Transitions are labelled by level adjacency in descending energy order
/// (3/2<->1/2 is B_minus, 1/2<->-1/2 is B_zero, -1/2<->-3/2 is B_plus), so the labels
/// follow the levels through the magic-angle crossing rather than field order.
/// Each transition carries hyperfine sub-lines at {-A, 0, +A} weighted by the
/// single-29Si site probabilities. Throws NoResonanceError if a gap never reaches the
/// microwave quantum inside [1 mT, 2 h nu / (g muB)].
TransitionSet resonance_fields_exact(const SpinSystem& system, double mw_frequency_GHz,
                                     const Orientation& orient,
                                     const RootFinderOptions& options = {});

/// First-order angular splitting B_plus - B_minus in mT: 2D(3cos^2 theta - 1)/(g muB).
double splitting_first_order(const SpinSystem& system, const Orientation& orient);

/// arccos(1/sqrt 3).
double magic_angle() noexcept;

/// Traceless axial ZFS tensor diag(D/3, D/3, -2D/3) in MHz.
Eigen::Matrix3d zfs_tensor(const SpinSystem& system);

}  // namespace vsimaser
