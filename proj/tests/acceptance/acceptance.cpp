// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vsimaser/analysis.hpp"
#include "vsimaser/cli.hpp"
#include "vsimaser/io.hpp"
#include "vsimaser/population.hpp"
#include "vsimaser/spectrum.hpp"
#include "vsimaser/spin_model.hpp"
#include "vsimaser/threshold.hpp"

namespace fs = std::filesystem;
using namespace vsimaser;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool close_rel(double got, double want, double rel) {
  return std::abs(got - want) <= rel * std::abs(want);
}

std::string fmt(double v) { return io::format_number(v); }

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("vsimaser_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  return code;
}

// Linear interpolation of the first + to - sign change of column `col`.
double zero_crossing(const std::vector<std::vector<double>>& rows, std::size_t col) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double a = rows[i - 1][col], b = rows[i][col];
    if (a > 0.0 && b <= 0.0) {
      return rows[i - 1][0] + (rows[i][0] - rows[i - 1][0]) * a / (a - b);
    }
  }
  return std::nan("");
}

Outcome magic_angle_crossing(const Scratch& s) {
  const auto cfg = s.write("magic.ini", "zfs_d_mhz = 35\nmw_frequency_ghz = 9.3\n");
  const auto csv = s.path("sweep.csv");
  const auto start = std::chrono::steady_clock::now();
  const int code = run_cli({"sweep-angle", "--config", cfg, "--theta-start-deg", "0",
                            "--theta-stop-deg", "180", "--theta-step-deg", "0.1", "--out", csv});
  const double elapsed = seconds_since(start);
  if (code != 0) return {false, "sweep-angle exit code " + std::to_string(code)};
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(io::parse_number(cell, "cell"));
    rows.push_back(row);
  }
  const double exact = zero_crossing(rows, 1);
  const double first = zero_crossing(rows, 2);
  const bool ok = rows.size() == 1801 && std::abs(exact - 54.7356) <= 0.01 &&
                  std::abs(first - 54.7356) <= 0.01 && elapsed < 1.0;
  return {ok, "exact " + fmt(exact) + " deg, first-order " + fmt(first) + " deg, " +
                  std::to_string(rows.size()) + " rows in " + fmt(elapsed) + " s"};
}

Outcome splitting_consistency() {
  SpinSystem s;
  s.zfs_d_MHz = 35.0;
  double worst = 0.0;
  for (int i = 0; i <= 900; ++i) {
    const Orientation o = Orientation::from_degrees(0.1 * i);
    const auto t = resonance_fields_exact(s, 9.3, o);
    const double exact = t.at(TransitionLabel::BPlus).resonance_field_mT -
                         t.at(TransitionLabel::BMinus).resonance_field_mT;
    const double first = splitting_first_order(s, o);
    worst = std::max(worst, std::abs(exact - first) / std::abs(first));
  }
  const auto t0 = resonance_fields_exact(s, 9.3, Orientation{0.0});
  const double split_MHz = (t0.at(TransitionLabel::BPlus).resonance_field_mT -
                            t0.at(TransitionLabel::BMinus).resonance_field_mT) *
                           s.zeeman_MHz_per_mT();
  const double rel0 = std::abs(split_MHz - 2.0 * s.zfs_MHz()) / (2.0 * s.zfs_MHz());
  return {worst <= 5e-3 && rel0 <= 1e-9, "max relative deviation " + fmt(worst) +
                                             ", theta=0 splitting " + fmt(split_MHz) +
                                             " MHz (relative error " + fmt(rel0) + ")"};
}

Outcome isotope_statistics() {
  const auto p = isotope_site_probabilities(0.047, 12);
  const auto e = oracle::enumerate_shell(0.047, 12);
  const double ratio = p.central_to_satellite_ratio();
  const bool ok = std::abs(p.p_central - 0.561) <= 5e-4 && std::abs(p.p_one_satellite - 0.332) <= 5e-4 &&
                  std::abs(ratio - 3.38) <= 5e-3 && close_rel(p.p_central, e.p0, 1e-12) &&
                  close_rel(p.p_one_satellite, e.p1, 1e-12);
  return {ok, "p_central " + fmt(p.p_central) + ", p_one " + fmt(p.p_one_satellite) + ", ratio " +
                  fmt(ratio)};
}

Outcome superradiance() {
  const auto r = superradiance_exponent(13.64, 1.0, 3.38, 1.0);
  std::string out;
  const int code = run_cli({"superradiance", "--i-plus", "13.64", "--i-hf", "1.0"}, &out);
  std::istringstream in(out);
  double cli_k = std::nan("");
  for (const auto& [k, v] : io::read_report(in)) {
    if (k == "exponent_k") cli_k = io::parse_number(v, k);
  }
  const bool ok = std::abs(r.exponent_k - 2.15) <= 0.05 && code == 0 && std::abs(cli_k - 2.15) <= 0.05;
  return {ok, "k = " + fmt(r.exponent_k) + " (CLI with isotope statistics: " + fmt(cli_k) + ")"};
}

Outcome anisotropy_proportionality() {
  SpinSystem s;
  const double dp_max = 0.03;
  double lo = INFINITY, hi = -INFINITY;
  int used = 0;
  for (int i = 0; i <= 1800; ++i) {
    const Orientation o = Orientation::from_degrees(0.1 * i);
    const double c = std::cos(o.theta_rad);
    if (std::abs(3 * c * c - 1) < 0.05) continue;
    const double ratio = angular_delta_p(dp_max, o) / splitting_first_order(s, o);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    ++used;
  }
  const double slope_expected = dp_max / (2.0 * s.zfs_MHz()) * s.zeeman_MHz_per_mT();
  const double spread = (hi - lo) / std::abs(hi);
  const double factor = angular_delta_p(dp_max, Orientation{0.0}) /
                        std::abs(angular_delta_p(dp_max, Orientation::from_degrees(90.0)));
  const bool ok = spread <= 1e-9 && close_rel(hi, slope_expected, 1e-9) && factor == 2.0;
  return {ok, std::to_string(used) + " angles, ratio spread " + fmt(spread) + ", slope " + fmt(hi) +
                  " per mT, factor " + fmt(factor)};
}

Outcome boltzmann() {
  const double got = boltzmann_delta_p(9.3, 300.0);
  const double want = oracle::boltzmann_central_pair(9.3e9, 300.0);
  const double rel = std::abs(got - want) / want;
  return {rel <= 1e-12, "delta_p_B " + fmt(got) + ", oracle " + fmt(want) + ", relative " + fmt(rel)};
}

Outcome fit_round_trips() {
  const auto start = std::chrono::steady_clock::now();
  SpinSystem s;
  s.hyperfine_A_mT = 0.3;
  ExperimentConditions c;
  const auto set = resonance_fields_exact(s, 9.3, c.orientation);
  const double hwhm = 0.039;
  const FieldGrid grid = covering_grid(set, hwhm, 0.002);
  const Polarization pol{0.0, -0.03, 0.0};
  const auto iso = isotope_site_probabilities(s.abundance_i_half, s.n_neighbor_sites);
  const auto options = LineGroupFitOptions::from_isotopes(iso);
  const double center = set.at(TransitionLabel::BPlus).resonance_field_mT;
  const FieldWindow window{center - 0.3 - 10 * hwhm, center + 0.3 + 10 * hwhm};
  const std::vector<double> want = {center, hwhm, hwhm, -0.03 * iso.p_central, 0.3};

  const auto clean = synthesize_spectrum(s, c, grid, hwhm, pol);
  const auto guess = estimate_line_group(clean, window, 0.28, WeightMode::AbundanceConstrained,
                                         options.satellite_weight_ratio);
  const auto fit = fit_line_group(clean, window, guess, WeightMode::AbundanceConstrained, options);
  double worst_line = 0.0;
  const auto got = fit.parameter_values();
  for (std::size_t i = 0; i < want.size(); ++i) {
    worst_line = std::max(worst_line, std::abs(got[i] - want[i]) / std::abs(want[i]));
  }

  const SaturationParams sat{0.006, 20.0, 2.0};
  std::vector<SaturationPoint> pts;
  for (double p : {2.0, 10.0, 30.0, 80.0, 200.0, 500.0, 1000.0, 2000.0}) {
    pts.push_back({p, saturation_delta_p(sat, p)});
  }
  const auto sfit = fit_saturation(pts, initial_saturation_guess(pts));
  const double worst_sat = std::max({std::abs(sfit.params.delta_p_max / sat.delta_p_max - 1.0),
                                     std::abs(sfit.params.p0_mW / sat.p0_mW - 1.0),
                                     std::abs(sfit.params.p_alpha_mW / sat.p_alpha_mW - 1.0)});

  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SynthesisOptions noisy;
    noisy.noise_sigma = 0.01 * std::abs(want[3]);
    noisy.seed = seed;
    const auto trace = synthesize_spectrum(s, c, grid, hwhm, pol, noisy);
    try {
      const auto g = estimate_line_group(trace, window, 0.28, WeightMode::AbundanceConstrained,
                                         options.satellite_weight_ratio);
      const auto f = fit_line_group(trace, window, g, WeightMode::AbundanceConstrained, options);
      if (std::abs(f.center_mT - center) <= 0.1 * hwhm) ++within;
    } catch (const std::exception&) {
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = worst_line <= 1e-6 && worst_sat <= 1e-6 && within >= 95 && elapsed < 10.0;
  return {ok, "triplet max relative error " + fmt(worst_line) + ", saturation " + fmt(worst_sat) +
                  ", noisy centres within 0.1 width: " + std::to_string(within) + "/100, " +
                  fmt(elapsed) + " s"};
}

Outcome threshold_algebra() {
  const double two_pi = 2.0 * std::numbers::pi;
  const MaserParams base{two_pi * 1e3, two_pi * 1e2, two_pi * 1e6, two_pi * 9.3e9, 7.8e13, two_pi * 0.1};
  bool ok = true;
  std::vector<std::string> failures;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) {
      ok = false;
      failures.emplace_back(what);
    }
  };
  const double q = threshold_q(base);
  expect(close_rel(q, oracle::q_threshold(base.pump_rate, base.relaxation_rate, base.spin_decay_rate,
                                          base.cavity_freq, base.spin_count,
                                          base.spin_photon_coupling),
                   1e-14),
         "formula");
  const std::vector<double> n = {1e12, 1e13, 1e14, 1e15};
  const auto nr = threshold_sweep(base, "spin_count", n);
  for (std::size_t i = 1; i < nr.size(); ++i) expect(nr[i].q_min < nr[i - 1].q_min, "N monotone");
  const std::vector<double> k = {1e4, 1e5, 1e6, 1e7};
  const auto kr = threshold_sweep(base, "spin_decay_rate", k);
  for (std::size_t i = 1; i < kr.size(); ++i) expect(kr[i].q_min > kr[i - 1].q_min, "kappa monotone");
  std::vector<double> w;
  for (double eps : {1.0, 1e-1, 1e-2, 1e-4, 1e-6}) w.push_back(base.relaxation_rate * (1.0 + eps));
  const auto wr = threshold_sweep(base, "pump_rate", w);
  for (std::size_t i = 1; i < wr.size(); ++i) expect(wr[i].q_min > wr[i - 1].q_min, "pole monotone");
  expect(wr.back().q_min > 1e5 * wr.front().q_min, "divergence");
  const std::vector<double> none = {base.relaxation_rate};
  expect(threshold_sweep(base, "pump_rate", none).front().status == SweepStatus::NoInversion,
         "no inversion row");
  expect(std::abs(masing_margin(q, base).margin - 1.0) <= 1e-12, "unit margin");
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    MaserParams a = base;
    a.spin_decay_rate *= c;
    a.spin_count *= c;
    expect(close_rel(threshold_q(a), q, 1e-12), "kappa/N scaling");
    MaserParams b = base;
    b.pump_rate *= c;
    b.relaxation_rate *= c;
    expect(close_rel(threshold_q(b), q, 1e-12), "omega/gamma scaling");
  }
  std::string detail = "Q_min " + fmt(q) + " for the illustrative rates";
  for (const auto& f : failures) detail += "; failed: " + f;
  return {ok, detail};
}

Outcome lineshape_identity() {
  const double g = 0.039;
  TransitionSet set;
  set.mw_frequency_GHz = 9.3;
  set.transitions = {{TransitionLabel::BMinus, 330.0, 1, {{0.0, 1.0}}},
                     {TransitionLabel::BZero, 332.5, 1, {{0.0, 1.0}}},
                     {TransitionLabel::BPlus, 335.0, -1, {{0.0, 1.0}}}};
  const auto t = synthesize_spectrum(set, {}, FieldGrid{328.0, 337.0, g / 50}, g, {1.0, -1.0, 0.0}, 0.0);
  const auto pp = peak_to_peak(t, {329.5, 330.5});
  const double want = 2 * g / std::sqrt(3.0);
  const double rel = std::abs(pp.width_pp_mT - want) / want;

  std::vector<WidthSample> samples;
  const double widths[] = {0.045, 0.035, 0.028, 0.0225};
  const double powers[] = {0.0, 100.0, 300.0, 900.0};
  for (int k = 0; k < 4; ++k) {
    const double hw = widths[k] * std::sqrt(3.0) / 2.0;
    const auto tk =
        synthesize_spectrum(set, {}, FieldGrid{328.0, 337.0, hw / 50}, hw, {1.0, -1.0, 0.0}, 0.0);
    samples.push_back({powers[k], peak_to_peak(tk, {329.5, 330.5}).width_pp_mT});
  }
  const auto trend = linewidth_trend(samples);
  const bool ok = rel <= 1e-4 && std::abs(trend.ratio_high_to_low - 0.5) <= 0.01 && trend.monotone;
  return {ok, "width " + fmt(pp.width_pp_mT) + " mT vs " + fmt(want) + " (relative " + fmt(rel) +
                  "), narrowing ratio " + fmt(trend.ratio_high_to_low)};
}

Outcome determinism(const Scratch& s) {
  const auto cfg = s.write(
      "det.ini",
      "[spin]\nhyperfine_a_mt = 0.3\n[polarization]\nnoise_sigma = 2e-5\n"
      "[threshold]\npump_rate_hz = 1000\nrelaxation_rate_hz = 100\nspin_decay_rate_hz = 1e6\n"
      "coupling_hz = 0.1\n");
  std::ostringstream sat;
  sat << "power_mW,delta_p\n";
  for (double p : {2.0, 10.0, 30.0, 80.0, 200.0, 500.0}) {
    sat << fmt(p) << ',' << fmt(0.006 * std::log((20.0 + p) / 22.0) + 1e-5 * std::sin(p)) << '\n';
  }
  const auto points = s.write("sat.csv", sat.str());
  if (run_cli({"synth", "--config", cfg, "--seed", "42", "--out", s.path("trace.csv")}) != 0) {
    return {false, "synth failed"};
  }
  const std::vector<std::vector<std::string>> commands = {
      {"synth", "--config", cfg, "--seed", "42"},
      {"sweep-angle", "--config", cfg, "--theta-step-deg", "0.5"},
      {"fit", "--config", cfg, "--trace", s.path("trace.csv")},
      {"fit", "--config", cfg, "--trace", s.path("trace.csv"), "--mode", "free"},
      {"fit-saturation", "--points", points},
      {"superradiance", "--config", cfg, "--i-plus", "13.64", "--i-hf", "1"},
      {"threshold", "--config", cfg},
      {"sweep-threshold", "--config", cfg, "--axis", "spin_count", "--values", "1e12,1e13,1e14"},
  };
  int identical = 0;
  std::string failed;
  for (const auto& base : commands) {
    std::string stdout_a, stdout_b;
    auto a = base, b = base;
    a.insert(a.end(), {"--out", s.path("a.out")});
    b.insert(b.end(), {"--out", s.path("b.out")});
    const bool files_ok = run_cli(a) == 0 && run_cli(b) == 0 &&
                          slurp(s.path("a.out")) == slurp(s.path("b.out")) &&
                          !slurp(s.path("a.out")).empty();
    const bool stdout_ok = run_cli(base, &stdout_a) == 0 && run_cli(base, &stdout_b) == 0 &&
                           stdout_a == stdout_b && stdout_a == slurp(s.path("a.out"));
    if (files_ok && stdout_ok) {
      ++identical;
    } else {
      failed += " " + base.front();
    }
  }
  const bool ok = identical == static_cast<int>(commands.size());
  return {ok, std::to_string(identical) + "/" + std::to_string(commands.size()) +
                  " command runs byte-identical" + (failed.empty() ? "" : "; differing:" + failed)};
}

}  // namespace

int main() {
  Scratch scratch;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"magic-angle zero crossing of the angular sweep", [&] { return magic_angle_crossing(scratch); }},
      {"exact vs first-order splitting", splitting_consistency},
      {"neighbour-shell isotope statistics", isotope_statistics},
      {"superradiance exponent", superradiance},
      {"population anisotropy proportional to splitting", anisotropy_proportionality},
      {"Boltzmann population difference vs partition sum", boltzmann},
      {"fit round-trips and noisy centre recovery", fit_round_trips},
      {"maser threshold algebra", threshold_algebra},
      {"derivative-Lorentzian width identity and narrowing ratio", lineshape_identity},
      {"byte-identical repeated CLI runs", [&] { return determinism(scratch); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first
              << " -- " << o.detail << '\n';
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
