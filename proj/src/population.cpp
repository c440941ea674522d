#include "vsimaser/population.hpp"

#include <cmath>

#include "vsimaser/constants.hpp"
#include "vsimaser/errors.hpp"

namespace vsimaser {

bool PopulationState::within_physical_bound() const noexcept {
  return std::abs(delta_p) <= kMaxPopulationDifference;
}

void SaturationParams::validate() const {
  if (!(p0_mW > 0.0)) throw ValidationError("saturation p0_mW must be > 0");
  if (!(p_alpha_mW >= 0.0)) throw ValidationError("saturation p_alpha_mW must be >= 0");
  if (!std::isfinite(delta_p_max)) throw ValidationError("saturation delta_p_max must be finite");
}

double boltzmann_delta_p(double mw_frequency_GHz, double temperature_K) {
  if (!(temperature_K > 0.0)) throw ValidationError("temperature_K must be > 0");
  if (!(mw_frequency_GHz > 0.0)) throw ValidationError("mw_frequency_GHz must be > 0");
  if (std::isinf(temperature_K)) return 0.0;
  const double x = constants::planck_J_s * mw_frequency_GHz * 1e9 /
                   (constants::boltzmann_J_per_K * temperature_K);
  // Levels at m*x for m = +-1/2, +-3/2; the common factor cancels in the ratio.
  return std::sinh(0.5 * x) / (std::cosh(0.5 * x) + std::cosh(1.5 * x));
}

PopulationState delta_p_from_intensities(double i_exc, double i_dark, double delta_p_boltzmann,
                                         TransitionLabel transition) {
  if (i_dark == 0.0) throw ValidationError("dark reference amplitude is zero");
  return PopulationState{i_exc / i_dark * delta_p_boltzmann, transition};
}

double angular_delta_p(double delta_p_max, const Orientation& orient) {
  const double c = std::cos(orient.theta_rad);
  return 0.5 * delta_p_max * (3.0 * c * c - 1.0);
}

double saturation_delta_p(const SaturationParams& params, double power_mW) {
  if (!(power_mW >= 0.0)) throw ValidationError("pump power must be >= 0 mW");
  if (!(params.p0_mW + params.p_alpha_mW > 0.0)) {
    throw ValidationError("P0 + P_alpha must be > 0");
  }
  return params.delta_p_max *
         std::log((params.p0_mW + power_mW) / (params.p0_mW + params.p_alpha_mW));
}

Eigen::Matrix3d population_tensor(const SpinSystem& system, double delta_p_max) {
  if (system.zfs_d_MHz == 0.0) throw ValidationError("population tensor needs a non-zero ZFS");
  return delta_p_max / (2.0 * system.zfs_MHz()) * zfs_tensor(system);
}

}  // namespace vsimaser
