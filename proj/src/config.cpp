#include "vsimaser/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "vsimaser/constants.hpp"
#include "vsimaser/errors.hpp"
#include "vsimaser/io.hpp"
#include "vsimaser/population.hpp"

namespace vsimaser {

namespace {

enum class Kind { Number, Integer, Transition, Mode };

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KeySpec {
  const char* name;
  const char* section;
  Kind kind;
  const char* default_text;  // nullptr: optional without default
  double min = -kInf;
  bool min_strict = false;
  double max = kInf;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"spin", "spin", Kind::Number, "1.5", 0.0, true},
      {"g_factor", "spin", Kind::Number, "2.0023", 0.0, true},
      {"zfs_d_mhz", "spin", Kind::Number, "35", 0.0},
      {"hyperfine_a_mt", "spin", Kind::Number, nullptr, 0.0, true},
      {"abundance_i_half", "spin", Kind::Number, "0.047", 0.0, false, 1.0},
      {"n_neighbor_sites", "spin", Kind::Integer, "12", 1.0},
      {"mw_frequency_ghz", "conditions", Kind::Number, "9.3", 0.0, true},
      {"theta_deg", "conditions", Kind::Number, "0", 0.0, false, 180.0},
      {"temperature_k", "conditions", Kind::Number, "300", 0.0, true},
      {"pump_power_mw", "conditions", Kind::Number, "0", 0.0},
      {"q_factor", "conditions", Kind::Number, "17000", 0.0, true},
      {"field_start_mt", "grid", Kind::Number, nullptr, 0.0},
      {"field_stop_mt", "grid", Kind::Number, nullptr, 0.0, true},
      {"field_step_mt", "grid", Kind::Number, "0.002", 0.0, true},
      {"line_hwhm_mt", "grid", Kind::Number, "0.039", 0.0, true},
      {"delta_p_max", "polarization", Kind::Number, "0.03"},
      {"delta_p_minus", "polarization", Kind::Number, nullptr},
      {"delta_p_plus", "polarization", Kind::Number, nullptr},
      {"delta_p_zero", "polarization", Kind::Number, nullptr},
      {"amplitude_scale", "polarization", Kind::Number, "1"},
      {"noise_sigma", "polarization", Kind::Number, "0", 0.0},
      {"fit_transition", "fit", Kind::Transition, "B_plus"},
      {"weight_mode", "fit", Kind::Mode, "abundance_constrained"},
      {"window_start_mt", "fit", Kind::Number, nullptr, 0.0},
      {"window_stop_mt", "fit", Kind::Number, nullptr, 0.0, true},
      {"max_iterations", "fit", Kind::Integer, "500", 1.0},
      {"relative_tolerance", "fit", Kind::Number, "1e-08", 0.0, true},
      {"pump_rate_hz", "threshold", Kind::Number, nullptr, 0.0, true},
      {"relaxation_rate_hz", "threshold", Kind::Number, nullptr, 0.0, true},
      {"spin_decay_rate_hz", "threshold", Kind::Number, nullptr, 0.0, true},
      {"coupling_hz", "threshold", Kind::Number, nullptr, 0.0, true},
      {"cavity_freq_hz", "threshold", Kind::Number, nullptr, 0.0, true},
      {"spin_count", "threshold", Kind::Number, "7.8e13", 0.0, true},
      {"q_actual", "threshold", Kind::Number, nullptr, 0.0, true},
  };
  return table;
}

const KeySpec* find_key(std::string_view name) {
  for (const auto& spec : key_table()) {
    if (name == spec.name) return &spec;
  }
  return nullptr;
}

bool is_section(std::string_view name) {
  return std::any_of(key_table().begin(), key_table().end(),
                     [&](const KeySpec& s) { return name == s.section; });
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string closest_key(std::string_view name) {
  const KeySpec* best = nullptr;
  std::size_t best_score = std::numeric_limits<std::size_t>::max();
  for (const auto& spec : key_table()) {
    const std::string_view candidate = spec.name;
    // A key that extends the typed name with a unit suffix is the likeliest intent.
    const std::size_t score =
        candidate.starts_with(name) ? 0 : edit_distance(name, candidate) + 1;
    if (score < best_score) {
      best_score = score;
      best = &spec;
    }
  }
  return best ? best->name : "";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void check_range(const KeySpec& spec, double value) {
  const bool low_ok = spec.min_strict ? value > spec.min : value >= spec.min;
  if (!low_ok || !(value <= spec.max) || !std::isfinite(value)) {
    std::string bound = std::string(spec.min_strict ? "> " : ">= ") + io::format_number(spec.min);
    if (std::isfinite(spec.max)) bound += " and <= " + io::format_number(spec.max);
    if (!std::isfinite(spec.min)) bound = "finite";
    throw ValidationError("config key '" + std::string(spec.name) + "' must be " + bound +
                          ", got " + io::format_number(value));
  }
}

class Values {
 public:
  Values(std::map<std::string, std::string> raw, std::ostream* log)
      : raw_(std::move(raw)), log_(log) {}

  std::optional<std::string> text(const char* key) {
    const KeySpec& spec = *find_key(key);
    if (auto it = raw_.find(key); it != raw_.end()) return it->second;
    if (!spec.default_text) return std::nullopt;
    if (log_) *log_ << "# default: " << key << " = " << spec.default_text << '\n';
    return std::string(spec.default_text);
  }

  std::optional<double> number(const char* key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    const double v = io::parse_number(*t, key);
    check_range(*find_key(key), v);
    return v;
  }

  double required_number(const char* key) { return *number(key); }

  int integer(const char* key) {
    const double v = required_number(key);
    if (v != std::round(v) || std::abs(v) > 1e9) {
      throw ValidationError("config key '" + std::string(key) + "' must be an integer");
    }
    return static_cast<int>(v);
  }

  std::ostream* log() const { return log_; }

 private:
  std::map<std::string, std::string> raw_;
  std::ostream* log_;
};

void warn_population_bound(std::ostream* log, const char* key, const std::optional<double>& v) {
  if (log && v && std::abs(*v) > kMaxPopulationDifference) {
    *log << "# warning: " << key << " = " << io::format_number(*v)
         << " exceeds the physical bound |delta_p| <= 0.5\n";
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& spec : key_table()) out.emplace_back(spec.name);
    return out;
  }();
  return keys;
}

RunConfig parse_config(std::istream& is, std::ostream* log) {
  std::map<std::string, std::string> raw;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') throw ValidationError(where + "unterminated section header");
      section = std::string(trim(t.substr(1, t.size() - 2)));
      if (!is_section(section)) throw ValidationError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where + "expected 'key = value'");
    const std::string key(trim(t.substr(0, eq)));
    std::string_view value = trim(t.substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string_view::npos) {
      value = trim(value.substr(0, hash));
    }
    if (key.empty()) throw ValidationError(where + "empty key");
    if (value.empty()) throw ValidationError(where + "key '" + key + "' has no value");
    const KeySpec* spec = find_key(key);
    if (!spec) {
      throw ValidationError(where + "unknown key '" + key + "' (did you mean '" +
                            closest_key(key) + "'?)");
    }
    if (!section.empty() && section != spec->section) {
      throw ValidationError(where + "key '" + key + "' belongs in [" + spec->section +
                            "], not [" + section + "]");
    }
    if (!raw.emplace(key, std::string(value)).second) {
      throw ValidationError(where + "duplicate key '" + key + "'");
    }
  }

  Values v(std::move(raw), log);
  RunConfig cfg;
  cfg.spin.spin = v.required_number("spin");
  cfg.spin.g_factor = v.required_number("g_factor");
  cfg.spin.zfs_d_MHz = v.required_number("zfs_d_mhz");
  cfg.hyperfine_a_mT = v.number("hyperfine_a_mt");
  cfg.spin.hyperfine_A_mT = cfg.hyperfine_a_mT.value_or(0.0);
  cfg.spin.abundance_i_half = v.required_number("abundance_i_half");
  cfg.spin.n_neighbor_sites = v.integer("n_neighbor_sites");
  try {
    cfg.spin.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config key 'spin': ") + e.what());
  }

  cfg.conditions.mw_frequency_GHz = v.required_number("mw_frequency_ghz");
  cfg.conditions.orientation = Orientation::from_degrees(v.required_number("theta_deg"));
  cfg.conditions.temperature_K = v.required_number("temperature_k");
  cfg.conditions.pump_power_mW = v.required_number("pump_power_mw");
  cfg.conditions.q_factor = v.required_number("q_factor");

  cfg.grid.start_mT = v.number("field_start_mt");
  cfg.grid.stop_mT = v.number("field_stop_mt");
  cfg.grid.step_mT = v.required_number("field_step_mt");
  cfg.grid.line_hwhm_mT = v.required_number("line_hwhm_mt");
  if (cfg.grid.start_mT.has_value() != cfg.grid.stop_mT.has_value()) {
    throw ValidationError("config keys 'field_start_mt' and 'field_stop_mt' must be set together");
  }
  if (cfg.grid.start_mT && !(*cfg.grid.stop_mT > *cfg.grid.start_mT)) {
    throw ValidationError("config key 'field_stop_mt' must exceed 'field_start_mt'");
  }

  cfg.polarization.delta_p_max = v.required_number("delta_p_max");
  cfg.polarization.delta_p_minus = v.number("delta_p_minus");
  cfg.polarization.delta_p_plus = v.number("delta_p_plus");
  cfg.polarization.delta_p_zero = v.number("delta_p_zero");
  cfg.polarization.amplitude_scale = v.required_number("amplitude_scale");
  cfg.polarization.noise_sigma = v.required_number("noise_sigma");
  warn_population_bound(log, "delta_p_max", cfg.polarization.delta_p_max);
  warn_population_bound(log, "delta_p_minus", cfg.polarization.delta_p_minus);
  warn_population_bound(log, "delta_p_plus", cfg.polarization.delta_p_plus);
  warn_population_bound(log, "delta_p_zero", cfg.polarization.delta_p_zero);

  cfg.fit.transition = parse_transition_label(*v.text("fit_transition"));
  cfg.fit.weight_mode = parse_weight_mode(*v.text("weight_mode"));
  cfg.fit.window_start_mT = v.number("window_start_mt");
  cfg.fit.window_stop_mT = v.number("window_stop_mt");
  if (cfg.fit.window_start_mT.has_value() != cfg.fit.window_stop_mT.has_value()) {
    throw ValidationError("config keys 'window_start_mt' and 'window_stop_mt' must be set together");
  }
  cfg.fit.max_iterations = v.integer("max_iterations");
  cfg.fit.relative_tolerance = v.required_number("relative_tolerance");

  cfg.threshold.pump_rate_Hz = v.number("pump_rate_hz");
  cfg.threshold.relaxation_rate_Hz = v.number("relaxation_rate_hz");
  cfg.threshold.spin_decay_rate_Hz = v.number("spin_decay_rate_hz");
  cfg.threshold.coupling_Hz = v.number("coupling_hz");
  cfg.threshold.cavity_freq_Hz = v.number("cavity_freq_hz");
  cfg.threshold.spin_count = v.required_number("spin_count");
  cfg.threshold.q_actual = v.number("q_actual");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, std::ostream* log) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  return parse_config(in, log);
}

SpinSystem RunConfig::spin_with_hyperfine() const {
  if (!hyperfine_a_mT) {
    throw ValidationError("config key 'hyperfine_a_mt' is required for this command");
  }
  SpinSystem s = spin;
  s.hyperfine_A_mT = *hyperfine_a_mT;
  return s;
}

Polarization RunConfig::polarization_values() const {
  const double projected = angular_delta_p(polarization.delta_p_max, conditions.orientation);
  return Polarization{polarization.delta_p_minus.value_or(projected),
                      polarization.delta_p_plus.value_or(-projected), polarization.delta_p_zero};
}

MaserParams RunConfig::maser_params() const {
  auto need = [](const std::optional<double>& v, const char* key) {
    if (!v) throw ValidationError("config key '" + std::string(key) + "' is required");
    return *v * constants::two_pi;
  };
  MaserParams p{};
  p.pump_rate = need(threshold.pump_rate_Hz, "pump_rate_hz");
  p.relaxation_rate = need(threshold.relaxation_rate_Hz, "relaxation_rate_hz");
  p.spin_decay_rate = need(threshold.spin_decay_rate_Hz, "spin_decay_rate_hz");
  p.spin_photon_coupling = need(threshold.coupling_Hz, "coupling_hz");
  p.cavity_freq = threshold.cavity_freq_Hz.value_or(conditions.mw_frequency_GHz * 1e9) *
                  constants::two_pi;
  p.spin_count = threshold.spin_count;
  return p;
}

double RunConfig::q_actual() const { return threshold.q_actual.value_or(conditions.q_factor); }

}  // namespace vsimaser
