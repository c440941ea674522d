#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "vsimaser/errors.hpp"
#include "vsimaser/population.hpp"

using namespace vsimaser;
using doctest::Approx;

TEST_CASE("Boltzmann difference at X band and room temperature") {
  const double dp = boltzmann_delta_p(9.3, 300.0);
  CHECK(dp == Approx(oracle::boltzmann_central_pair(9.3e9, 300.0)).epsilon(1e-12));
  CHECK(dp == Approx(3.72e-4).epsilon(2e-3));
  CHECK(dp > 0.0);
}

TEST_CASE("property: Boltzmann difference matches the partition-sum oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> nu(0.5, 100.0);
  std::uniform_real_distribution<double> log_t(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double f = nu(rng);
    const double t = std::pow(10.0, log_t(rng));
    CAPTURE(f);
    CAPTURE(t);
    CHECK(boltzmann_delta_p(f, t) ==
          Approx(oracle::boltzmann_central_pair(f * 1e9, t)).epsilon(1e-12));
  }
}

TEST_CASE("Boltzmann difference limits") {
  CHECK(boltzmann_delta_p(9.3, std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(boltzmann_delta_p(9.3, 600.0) ==
        Approx(0.5 * boltzmann_delta_p(9.3, 300.0)).epsilon(1e-5));
  CHECK_THROWS_AS(boltzmann_delta_p(9.3, 0.0), ValidationError);
  CHECK_THROWS_AS(boltzmann_delta_p(9.3, -4.0), ValidationError);
  CHECK_THROWS_AS(boltzmann_delta_p(0.0, 300.0), ValidationError);
}

TEST_CASE("population difference from intensities") {
  const double dpb = boltzmann_delta_p(9.3, 300.0);
  CHECK(delta_p_from_intensities(2.5, 2.5, dpb).delta_p == dpb);
  CHECK(delta_p_from_intensities(100.0, 1.0, 3.7e-4).delta_p == Approx(3.7e-2));
  const auto plus = delta_p_from_intensities(-80.0, 1.0, dpb, TransitionLabel::BPlus);
  const auto minus = delta_p_from_intensities(80.0, 1.0, dpb, TransitionLabel::BMinus);
  CHECK(plus.delta_p == -minus.delta_p);
  CHECK(plus.transition == TransitionLabel::BPlus);
  CHECK_THROWS_AS(delta_p_from_intensities(1.0, 0.0, dpb), ValidationError);
}

TEST_CASE("out-of-bound population differences are reported, not clamped") {
  const auto s = delta_p_from_intensities(2000.0, 1.0, 3.7e-4);
  CHECK(s.delta_p == Approx(0.74));
  CHECK_FALSE(s.within_physical_bound());
  CHECK(PopulationState{-0.5, TransitionLabel::BPlus}.within_physical_bound());
}

TEST_CASE("property: intensity ratio homogeneity") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> amp(-50.0, 50.0);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double e = amp(rng), d = amp(rng) + 60.0, c = scale(rng);
    const double base = delta_p_from_intensities(e, d, 3.7e-4).delta_p;
    CHECK(delta_p_from_intensities(c * e, d, 3.7e-4).delta_p == Approx(c * base).epsilon(1e-13));
    CHECK(delta_p_from_intensities(e, c * d, 3.7e-4).delta_p == Approx(base / c).epsilon(1e-13));
  }
}

TEST_CASE("angular projection") {
  CHECK(angular_delta_p(0.03, Orientation{0.0}) == 0.03);
  CHECK(angular_delta_p(0.03, Orientation{std::numbers::pi / 2}) == Approx(-0.015).epsilon(1e-14));
  CHECK(std::abs(angular_delta_p(0.03, Orientation{magic_angle()})) < 1e-17);
  CHECK(angular_delta_p(0.03, Orientation{0.0}) /
            std::abs(angular_delta_p(0.03, Orientation{std::numbers::pi / 2})) ==
        Approx(2.0).epsilon(1e-14));
}

TEST_CASE("property: angular projection is proportional to the first-order splitting") {
  SpinSystem s;
  const double slope = angular_delta_p(0.03, Orientation{0.0}) /
                       splitting_first_order(s, Orientation{0.0});
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> theta(0.0, std::numbers::pi);
  for (int trial = 0; trial < 200; ++trial) {
    const Orientation o{theta(rng)};
    const double c = std::cos(o.theta_rad);
    if (std::abs(3 * c * c - 1) < 0.05) continue;
    CHECK(angular_delta_p(0.03, o) / splitting_first_order(s, o) == Approx(slope).epsilon(1e-12));
  }
  CHECK(slope == Approx(0.03 / (2.0 * s.zfs_MHz()) * s.zeeman_MHz_per_mT()).epsilon(1e-12));
}

TEST_CASE("saturation curve") {
  const SaturationParams p{0.03, 40.0, 5.0};
  CHECK(saturation_delta_p(p, 5.0) == 0.0);
  const SaturationParams q{0.03, 40.0, 0.0};
  CHECK(saturation_delta_p(q, 40.0 * (std::numbers::e - 1.0)) == Approx(0.03).epsilon(1e-14));
  CHECK_THROWS_AS(saturation_delta_p(p, -1.0), ValidationError);
  CHECK_THROWS_AS(saturation_delta_p(SaturationParams{0.03, -5.0, 5.0}, 1.0), ValidationError);
  CHECK_THROWS_AS(SaturationParams({0.03, 0.0, 1.0}).validate(), ValidationError);
  CHECK_THROWS_AS(SaturationParams({0.03, 1.0, -1.0}).validate(), ValidationError);
}

TEST_CASE("property: saturation curve is increasing and concave") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> dp(0.001, 0.5);
  std::uniform_real_distribution<double> p0(1.0, 500.0);
  std::uniform_real_distribution<double> pw(0.0, 1000.0);
  for (int trial = 0; trial < 200; ++trial) {
    const SaturationParams s{dp(rng), p0(rng), pw(rng) * 0.1};
    const double p = pw(rng), h = 1.0 + pw(rng) * 0.01;
    CHECK(saturation_delta_p(s, 2 * p + 1e-3) > saturation_delta_p(s, p));
    const double mid = saturation_delta_p(s, p + h);
    CHECK(mid > 0.5 * (saturation_delta_p(s, p) + saturation_delta_p(s, p + 2 * h)));
  }
}

TEST_CASE("population tensor is the ZFS tensor scaled by delta_p_max / (2 ZFS)") {
  SpinSystem s;
  const auto t = population_tensor(s, 0.03);
  CHECK(std::abs(t.trace()) < 1e-16);
  CHECK(t(2, 2) == Approx(-0.03 / 6.0).epsilon(1e-14));
  CHECK(t(0, 0) == Approx(0.03 / 12.0).epsilon(1e-14));
  SpinSystem flat;
  flat.zfs_d_MHz = 0.0;
  CHECK_THROWS_AS(population_tensor(flat, 0.03), ValidationError);
}
