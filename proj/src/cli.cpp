#include "vsimaser/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "vsimaser/analysis.hpp"
#include "vsimaser/config.hpp"
#include "vsimaser/constants.hpp"
#include "vsimaser/errors.hpp"
#include "vsimaser/io.hpp"
#include "vsimaser/population.hpp"
#include "vsimaser/spectrum.hpp"
#include "vsimaser/spin_model.hpp"
#include "vsimaser/threshold.hpp"

namespace vsimaser::cli {

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta_deg;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
};

RunConfig load(const CommonFlags& flags, std::ostream& err) {
  RunConfig cfg;
  if (flags.config.empty()) {
    std::istringstream empty;
    cfg = parse_config(empty, &err);
  } else {
    cfg = load_config(flags.config, &err);
  }
  if (flags.theta_deg) {
    if (!(*flags.theta_deg >= 0.0 && *flags.theta_deg <= 180.0)) {
      throw ValidationError("--theta-deg must lie in [0, 180]");
    }
    cfg.conditions.orientation = Orientation::from_degrees(*flags.theta_deg);
  }
  return cfg;
}

void emit(const Context& ctx, const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(ctx.out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot open '" + path + "' for writing");
  fn(file);
  if (!file) throw ValidationError("failed writing '" + path + "'");
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(io::parse_number(item, what));
  if (values.empty()) throw ValidationError(std::string(what) + " is empty");
  return values;
}

void add_standard_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Run configuration (key = value)");
  cmd->add_option("--out", flags.out, "Output file; stdout when omitted");
}

// Resolved field window for a fit: explicit flags, then config, then around the resonance.
FieldWindow fit_window(const RunConfig& cfg, const SpinSystem& system,
                       std::optional<double> start, std::optional<double> stop) {
  if (start.has_value() != stop.has_value()) {
    throw ValidationError("--window-start-mt and --window-stop-mt must be given together");
  }
  if (start) return FieldWindow{*start, *stop};
  if (cfg.fit.window_start_mT) return FieldWindow{*cfg.fit.window_start_mT, *cfg.fit.window_stop_mT};
  const auto transitions = resonance_fields_exact(system, cfg.conditions.mw_frequency_GHz,
                                                  cfg.conditions.orientation);
  const double center = transitions.at(cfg.fit.transition).resonance_field_mT;
  const double half = system.hyperfine_A_mT + 10.0 * cfg.grid.line_hwhm_mT;
  return FieldWindow{center - half, center + half};
}

void cmd_synth(const Context& ctx, const CommonFlags& flags, std::optional<double> noise_sigma) {
  const RunConfig cfg = load(flags, ctx.err);
  const SpinSystem system = cfg.spin_with_hyperfine();
  const auto transitions = resonance_fields_exact(system, cfg.conditions.mw_frequency_GHz,
                                                  cfg.conditions.orientation);
  const FieldGrid grid =
      cfg.grid.start_mT
          ? FieldGrid{*cfg.grid.start_mT, *cfg.grid.stop_mT, cfg.grid.step_mT}
          : covering_grid(transitions, cfg.grid.line_hwhm_mT, cfg.grid.step_mT);

  SynthesisOptions options;
  options.amplitude_scale = cfg.polarization.amplitude_scale;
  options.noise_sigma = noise_sigma.value_or(cfg.polarization.noise_sigma);
  options.seed = flags.seed;
  if (options.noise_sigma > 0.0 && !flags.seed) {
    ctx.err << "# note: noise_sigma ignored without --seed\n";
  }
  const double dp_b = boltzmann_delta_p(cfg.conditions.mw_frequency_GHz, cfg.conditions.temperature_K);
  const SpectrumTrace trace = synthesize_spectrum(transitions, cfg.conditions, grid,
                                                  cfg.grid.line_hwhm_mT,
                                                  cfg.polarization_values(), dp_b, options);
  emit(ctx, flags.out, [&](std::ostream& os) { io::write_trace_csv(os, trace); });
}

void cmd_sweep_angle(const Context& ctx, const CommonFlags& flags, double start_deg,
                     double stop_deg, double step_deg) {
  const RunConfig cfg = load(flags, ctx.err);
  if (!(step_deg > 0.0) || !(start_deg >= 0.0) || !(stop_deg <= 180.0) || !(stop_deg >= start_deg)) {
    throw ValidationError("angle sweep needs 0 <= start <= stop <= 180 and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1;
  emit(ctx, flags.out, [&](std::ostream& os) {
    os << "theta_deg,delta_b_mt_exact,delta_b_mt_firstorder,delta_p\n";
    for (std::size_t i = 0; i < count; ++i) {
      const double raw = start_deg + static_cast<double>(i) * step_deg;
      const double theta_deg = std::min(std::round(raw * 1e9) / 1e9, stop_deg);
      const Orientation orient = Orientation::from_degrees(theta_deg);
      const auto t = resonance_fields_exact(cfg.spin, cfg.conditions.mw_frequency_GHz, orient);
      const double exact = t.at(TransitionLabel::BPlus).resonance_field_mT -
                           t.at(TransitionLabel::BMinus).resonance_field_mT;
      os << io::format_number(theta_deg) << ',' << io::format_number(exact) << ','
         << io::format_number(splitting_first_order(cfg.spin, orient)) << ','
         << io::format_number(angular_delta_p(cfg.polarization.delta_p_max, orient)) << '\n';
    }
  });
}

void cmd_fit(const Context& ctx, const CommonFlags& flags, const std::string& trace_path,
             std::optional<std::string> mode_text, std::optional<std::string> transition_text,
             std::optional<double> window_start, std::optional<double> window_stop) {
  RunConfig cfg = load(flags, ctx.err);
  if (mode_text) cfg.fit.weight_mode = parse_weight_mode(*mode_text);
  if (transition_text) cfg.fit.transition = parse_transition_label(*transition_text);
  const SpinSystem system = cfg.spin_with_hyperfine();
  const SpectrumTrace trace = io::read_trace_csv(trace_path);
  const FieldWindow window = fit_window(cfg, system, window_start, window_stop);

  const auto iso = isotope_site_probabilities(system.abundance_i_half, system.n_neighbor_sites);
  LineGroupFitOptions options = LineGroupFitOptions::from_isotopes(iso);
  options.max_iterations = cfg.fit.max_iterations;
  options.relative_step_tolerance = cfg.fit.relative_tolerance;
  const LineGroupFit initial = estimate_line_group(trace, window, system.hyperfine_A_mT,
                                                   cfg.fit.weight_mode,
                                                   options.satellite_weight_ratio);
  const LineGroupFit fit = fit_line_group(trace, window, initial, cfg.fit.weight_mode, options);

  io::Report report;
  report.comment("line-group fit");
  report.add("transition", to_string(cfg.fit.transition));
  report.add("weight_mode", to_string(fit.weight_mode));
  report.add("window_start_mT", window.lo_mT);
  report.add("window_stop_mT", window.hi_mT);
  const auto names = fit.parameter_names();
  const auto values = fit.parameter_values();
  report.add("n_parameters", static_cast<long long>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) report.add(names[i], values[i]);
  if (fit.weight_mode == WeightMode::AbundanceConstrained) {
    report.add("satellite_amplitude_low", fit.satellite_amplitude_low);
    report.add("satellite_amplitude_high", fit.satellite_amplitude_high);
  }
  report.add("width_pp_mT", 2.0 * fit.hwhm_central_mT / std::sqrt(3.0));
  report.add("central_to_satellite_ratio", fit.central_to_satellite_ratio());
  if (fit.weight_mode == WeightMode::Free) {
    report.add("superradiance_exponent_k", superradiance_from_fit(fit, iso).exponent_k);
  }
  report.add("residual_rms", fit.residual_rms);
  report.add("iterations", static_cast<long long>(fit.iterations));
  for (std::size_t i = 0; i < names.size(); ++i) {
    report.add("stddev_" + names[i], std::sqrt(fit.covariance_diag[i]));
  }
  emit(ctx, flags.out, [&](std::ostream& os) { report.write(os); });
}

void cmd_fit_saturation(const Context& ctx, const CommonFlags& flags, const std::string& points_path) {
  const auto points = io::read_saturation_csv(points_path);
  const SaturationParams initial = initial_saturation_guess(points);
  const SaturationFit fit = fit_saturation(points, initial);
  io::Report report;
  report.comment("saturation fit: delta_p = delta_p_max * ln((P0 + P) / (P0 + P_alpha))");
  report.add("n_points", static_cast<long long>(points.size()));
  report.add("degenerate", fit.degenerate);
  report.add("delta_p_max", fit.params.delta_p_max);
  report.add("p0_mW", fit.params.p0_mW);
  report.add("p_alpha_mW", fit.params.p_alpha_mW);
  report.add("residual_rms", fit.residual_rms);
  report.add("iterations", static_cast<long long>(fit.iterations));
  const char* names[] = {"stddev_delta_p_max", "stddev_p0_mW", "stddev_p_alpha_mW"};
  for (std::size_t i = 0; i < 3; ++i) report.add(names[i], std::sqrt(fit.covariance_diag[i]));
  emit(ctx, flags.out, [&](std::ostream& os) { report.write(os); });
}

void cmd_superradiance(const Context& ctx, const CommonFlags& flags, double i_plus, double i_hf,
                       std::optional<double> n_plus, std::optional<double> n_hf) {
  if (n_plus.has_value() != n_hf.has_value()) {
    throw ValidationError("--n-plus and --n-hf must be given together");
  }
  SuperradianceResult result{};
  if (n_plus) {
    result = superradiance_exponent(i_plus, i_hf, *n_plus, *n_hf);
  } else {
    const RunConfig cfg = load(flags, ctx.err);
    result = superradiance_exponent(
        i_plus, i_hf,
        isotope_site_probabilities(cfg.spin.abundance_i_half, cfg.spin.n_neighbor_sites));
  }
  io::Report report;
  report.add("intensity_ratio", result.intensity_ratio);
  report.add("number_ratio", result.number_ratio);
  report.add("exponent_k", result.exponent_k);
  emit(ctx, flags.out, [&](std::ostream& os) { report.write(os); });
}

void cmd_threshold(const Context& ctx, const CommonFlags& flags, std::optional<double> q) {
  const RunConfig cfg = load(flags, ctx.err);
  const MaserParams p = cfg.maser_params();
  const double q_actual = q.value_or(cfg.q_actual());
  const double q_min = threshold_q(p);
  const MasingMargin margin = masing_margin(q_actual, p);
  io::Report report;
  report.comment("rates in Hz and rad/s; Q_min uses rad/s throughout");
  const auto both = [&](const std::string& key, double hz, double rad_per_s) {
    report.add(key + "_hz", hz);
    report.add(key + "_rad_per_s", rad_per_s);
  };
  const auto& t = cfg.threshold;
  both("pump_rate", *t.pump_rate_Hz, p.pump_rate);
  both("relaxation_rate", *t.relaxation_rate_Hz, p.relaxation_rate);
  both("spin_decay_rate", *t.spin_decay_rate_Hz, p.spin_decay_rate);
  both("cavity_freq", t.cavity_freq_Hz.value_or(cfg.conditions.mw_frequency_GHz * 1e9),
       p.cavity_freq);
  both("coupling", *t.coupling_Hz, p.spin_photon_coupling);
  report.add("spin_count", p.spin_count);
  report.add("q_min", q_min);
  report.add("q_actual", q_actual);
  report.add("margin", margin.margin);
  report.add("above_threshold", margin.above_threshold);
  emit(ctx, flags.out, [&](std::ostream& os) { report.write(os); });
}

void cmd_sweep_threshold(const Context& ctx, const CommonFlags& flags, const std::string& axis_name,
                         const std::string& values_text) {
  const RunConfig cfg = load(flags, ctx.err);
  const MaserAxis axis = parse_maser_axis(axis_name);
  // Rate and frequency axes are given in Hz; spin_count is a plain number.
  const double to_internal = axis == MaserAxis::SpinCount ? 1.0 : constants::two_pi;
  std::vector<double> values = parse_list(values_text, "--values");
  for (double& v : values) v *= to_internal;
  const auto rows = threshold_sweep(cfg.maser_params(), axis_name, values);
  emit(ctx, flags.out, [&](std::ostream& os) { io::write_threshold_csv(os, rows, 1.0 / to_internal); });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optically pumped S=3/2 spin-defect EPR, population and maser-threshold toolkit",
               "vsimaser"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<double> noise_sigma;
  double theta_start = 0.0, theta_stop = 180.0, theta_step = 0.1;
  std::string trace_path, points_path, axis_name, values_text;
  std::optional<std::string> mode_text, transition_text;
  std::optional<double> window_start, window_stop;
  double i_plus = 0.0, i_hf = 0.0;
  std::optional<double> n_plus, n_hf, q_override;

  auto* synth = app.add_subcommand("synth", "Synthesize a first-derivative EPR trace (CSV)");
  add_standard_flags(synth, flags);
  synth->add_option("--seed", flags.seed, "Noise seed; noise is off without it");
  synth->add_option("--theta-deg", flags.theta_deg, "Override the field angle");
  synth->add_option("--noise-sigma", noise_sigma, "Override noise_sigma");

  auto* sweep_angle = app.add_subcommand("sweep-angle", "Angular splitting and polarization table");
  add_standard_flags(sweep_angle, flags);
  sweep_angle->add_option("--theta-start-deg", theta_start);
  sweep_angle->add_option("--theta-stop-deg", theta_stop);
  sweep_angle->add_option("--theta-step-deg", theta_step);

  auto* fit = app.add_subcommand("fit", "Fit a hyperfine line group in a trace CSV");
  add_standard_flags(fit, flags);
  fit->add_option("--trace", trace_path, "Trace CSV")->required();
  fit->add_option("--mode", mode_text, "abundance_constrained | free");
  fit->add_option("--transition", transition_text, "B_minus | B_zero | B_plus");
  fit->add_option("--window-start-mt", window_start);
  fit->add_option("--window-stop-mt", window_stop);
  fit->add_option("--theta-deg", flags.theta_deg, "Override the field angle");

  auto* fit_sat = app.add_subcommand("fit-saturation", "Fit the pump-power saturation curve");
  add_standard_flags(fit_sat, flags);
  fit_sat->add_option("--points", points_path, "CSV with header power_mW,delta_p")->required();

  auto* superradiance = app.add_subcommand("superradiance", "Superradiance exponent from intensities");
  add_standard_flags(superradiance, flags);
  superradiance->add_option("--i-plus", i_plus, "Central-line intensity")->required();
  superradiance->add_option("--i-hf", i_hf, "Single satellite intensity")->required();
  superradiance->add_option("--n-plus", n_plus, "Central spin number (default: isotope statistics)");
  superradiance->add_option("--n-hf", n_hf, "Satellite spin number");

  auto* threshold = app.add_subcommand("threshold", "Maser threshold Q and margin");
  add_standard_flags(threshold, flags);
  threshold->add_option("--q", q_override, "Cavity Q to test");

  auto* sweep_threshold = app.add_subcommand("sweep-threshold", "Threshold Q over one parameter");
  add_standard_flags(sweep_threshold, flags);
  sweep_threshold->add_option("--axis", axis_name, "MaserParams field name")->required();
  sweep_threshold->add_option("--values", values_text, "Comma-separated values (Hz for rates)")
      ->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const Context ctx{out, err};
  try {
    if (synth->parsed()) cmd_synth(ctx, flags, noise_sigma);
    else if (sweep_angle->parsed()) cmd_sweep_angle(ctx, flags, theta_start, theta_stop, theta_step);
    else if (fit->parsed()) cmd_fit(ctx, flags, trace_path, mode_text, transition_text, window_start, window_stop);
    else if (fit_sat->parsed()) cmd_fit_saturation(ctx, flags, points_path);
    else if (superradiance->parsed()) cmd_superradiance(ctx, flags, i_plus, i_hf, n_plus, n_hf);
    else if (threshold->parsed()) cmd_threshold(ctx, flags, q_override);
    else if (sweep_threshold->parsed()) cmd_sweep_threshold(ctx, flags, axis_name, values_text);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace vsimaser::cli
