#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "vsimaser/config.hpp"
#include "vsimaser/errors.hpp"

using namespace vsimaser;
using doctest::Approx;

namespace {

RunConfig parse(const std::string& text, std::ostream* log = nullptr) {
  std::istringstream in(text);
  return parse_config(in, log);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config takes every default and logs it") {
  std::ostringstream log;
  const auto cfg = parse("zfs_d_mhz = 35\n", &log);
  CHECK(cfg.spin.g_factor == 2.0023);
  CHECK(cfg.spin.zfs_d_MHz == 35.0);
  CHECK(cfg.spin.abundance_i_half == 0.047);
  CHECK(cfg.spin.n_neighbor_sites == 12);
  CHECK(cfg.conditions.mw_frequency_GHz == 9.3);
  CHECK(cfg.conditions.temperature_K == 300.0);
  CHECK(cfg.grid.step_mT == 0.002);
  CHECK(cfg.fit.transition == TransitionLabel::BPlus);
  CHECK(cfg.fit.weight_mode == WeightMode::AbundanceConstrained);
  CHECK(cfg.fit.max_iterations == 500);
  CHECK(cfg.fit.relative_tolerance == 1e-8);
  CHECK(cfg.threshold.spin_count == 7.8e13);
  CHECK_FALSE(cfg.hyperfine_a_mT.has_value());
  const std::string text = log.str();
  CHECK(text.find("# default: g_factor = 2.0023") != std::string::npos);
  CHECK(text.find("zfs_d_mhz") == std::string::npos);
  CHECK_THROWS_AS(cfg.spin_with_hyperfine(), ValidationError);
  CHECK_THROWS_AS(cfg.maser_params(), ValidationError);
}

TEST_CASE("an empty config is valid") {
  CHECK(parse("").spin.zfs_d_MHz == 35.0);
}

TEST_CASE("angles are given in degrees") {
  const auto cfg = parse("[conditions]\ntheta_deg = 54.7356\n");
  CHECK(cfg.conditions.orientation.theta_rad == Approx(0.955317).epsilon(1e-6));
  CHECK(error_of("theta_deg = 190\n").find("theta") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with a suggestion") {
  const std::string e = error_of("zfs_d = 35\n");
  CHECK(e.find("config line 1") != std::string::npos);
  CHECK(e.find("'zfs_d'") != std::string::npos);
  CHECK(e.find("did you mean 'zfs_d_mhz'") != std::string::npos);
  CHECK(error_of("# c\n\ng_facter = 2\n").find("'g_factor'") != std::string::npos);
  CHECK(error_of("g_factor = 2\n").empty());
}

TEST_CASE("syntax and placement errors carry the line number") {
  CHECK(error_of("[spin]\nmw_frequency_ghz = 9.3\n").find("belongs in [conditions]") !=
        std::string::npos);
  CHECK(error_of("[nonsense]\n").find("unknown section") != std::string::npos);
  CHECK(error_of("g_factor = 2\ng_factor = 2\n").find("config line 2: duplicate") !=
        std::string::npos);
  CHECK(error_of("g_factor 2\n").find("config line 1") != std::string::npos);
  CHECK(error_of("g_factor =\n").find("no value") != std::string::npos);
  CHECK(error_of("[spin\n").find("unterminated") != std::string::npos);
}

TEST_CASE("values are validated by key name") {
  CHECK(error_of("g_factor = two\n").find("g_factor") != std::string::npos);
  CHECK(error_of("temperature_k = -3\n").find("temperature_k") != std::string::npos);
  CHECK(error_of("n_neighbor_sites = 2.5\n").find("n_neighbor_sites") != std::string::npos);
  CHECK(error_of("weight_mode = loose\n").find("weight mode") != std::string::npos);
  CHECK(error_of("fit_transition = B_side\n").find("B_side") != std::string::npos);
  CHECK(error_of("field_start_mt = 300\n").find("field_stop_mt") != std::string::npos);
  CHECK(error_of("spin = 1.2\n").find("spin") != std::string::npos);
}

TEST_CASE("trailing comments are allowed") {
  const auto cfg = parse("hyperfine_a_mt = 0.3   # illustrative\n; full-line comment\n");
  REQUIRE(cfg.hyperfine_a_mT.has_value());
  CHECK(*cfg.hyperfine_a_mT == 0.3);
  CHECK(cfg.spin_with_hyperfine().hyperfine_A_mT == 0.3);
}

TEST_CASE("population differences beyond the physical bound warn") {
  std::ostringstream log;
  const auto cfg = parse("delta_p_plus = -0.7\n", &log);
  CHECK(*cfg.polarization.delta_p_plus == -0.7);
  CHECK(log.str().find("# warning: delta_p_plus") != std::string::npos);
}

TEST_CASE("polarisation defaults follow the angular projection") {
  const auto cfg = parse("theta_deg = 90\ndelta_p_max = 0.04\n");
  const auto p = cfg.polarization_values();
  CHECK(p.delta_p_minus == Approx(-0.02).epsilon(1e-12));
  CHECK(p.delta_p_plus == Approx(0.02).epsilon(1e-12));
  CHECK_FALSE(p.delta_p_zero.has_value());
  const auto fixed = parse("delta_p_minus = 0.1\ndelta_p_plus = -0.09\ndelta_p_zero = 0\n");
  CHECK(fixed.polarization_values().delta_p_plus == -0.09);
  CHECK(*fixed.polarization_values().delta_p_zero == 0.0);
}

TEST_CASE("threshold rates convert from Hz to rad/s") {
  const auto cfg = parse(
      "[threshold]\npump_rate_hz = 1000\nrelaxation_rate_hz = 100\nspin_decay_rate_hz = 1e6\n"
      "coupling_hz = 0.1\nq_actual = 84000\n");
  const auto p = cfg.maser_params();
  const double two_pi = 2.0 * std::numbers::pi;
  CHECK(p.pump_rate == Approx(1000.0 * two_pi));
  CHECK(p.cavity_freq == Approx(9.3e9 * two_pi));
  CHECK(p.spin_photon_coupling == Approx(0.1 * two_pi));
  CHECK(p.spin_count == 7.8e13);
  CHECK(cfg.q_actual() == 84000.0);
  CHECK(parse("q_factor = 20000\n").q_actual() == 20000.0);
  const std::string missing = [] {
    try {
      parse("pump_rate_hz = 10\n").maser_params();
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  }();
  CHECK(missing.find("relaxation_rate_hz") != std::string::npos);
}

TEST_CASE("key list and missing files") {
  CHECK(config_keys().size() == 34);
  CHECK(config_keys().front() == "spin");
  CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ValidationError);
}
