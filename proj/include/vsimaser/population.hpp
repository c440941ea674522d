#pragma once

#include <Eigen/Dense>

#include "vsimaser/spin_model.hpp"

namespace vsimaser {

// Largest |delta p| attainable with full polarisation into the +-1/2 states.
inline constexpr double kMaxPopulationDifference = 0.5;

struct PopulationState {
  // Signed: negative means the upper level of the transition is overpopulated.
  double delta_p;
  TransitionLabel transition;

  bool within_physical_bound() const noexcept;
};

struct SaturationParams {
  double delta_p_max;
  double p0_mW;
  double p_alpha_mW;

  void validate() const;
};

/// Thermal population difference across the central (+1/2 <-> -1/2) pair of a
/// four-level ladder with uniform gaps h*nu.
double boltzmann_delta_p(double mw_frequency_GHz, double temperature_K);

/// Scale a pumped/dark peak-to-peak amplitude ratio by the thermal reference.
/// Out-of-bound results are returned unclamped; check within_physical_bound().
PopulationState delta_p_from_intensities(double i_exc, double i_dark, double delta_p_boltzmann,
                                         TransitionLabel transition = TransitionLabel::BPlus);

/// Laboratory-frame projection 1/2 delta_p_max (3cos^2 theta - 1).
double angular_delta_p(double delta_p_max, const Orientation& orient);

/// delta_p_max * ln((P0 + P) / (P0 + P_alpha)).
double saturation_delta_p(const SaturationParams& params, double power_mW);

/// Population-difference tensor: the ZFS tensor scaled by delta_p_max / (2 ZFS).
Eigen::Matrix3d population_tensor(const SpinSystem& system, double delta_p_max);

}  // namespace vsimaser
