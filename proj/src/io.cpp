#include "vsimaser/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "vsimaser/errors.hpp"

namespace vsimaser::io {

namespace {

constexpr std::string_view kTraceHeader = "field_mT,signal";
constexpr std::string_view kSaturationHeader = "power_mW,delta_p";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  return out;
}

// Splits "a,b" into two trimmed fields; false if the count is not two.
bool split_pair(std::string_view line, std::string_view& a, std::string_view& b) {
  const auto comma = line.find(',');
  if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
    return false;
  }
  a = trim(line.substr(0, comma));
  b = trim(line.substr(comma + 1));
  return true;
}

bool try_parse(std::string_view text, double& value) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

// Reads "# key: value" lines and the header; returns the 1-based line number of the header.
std::size_t read_preamble(std::istream& is, std::string_view header, TraceMeta* meta) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (!meta) continue;
      const auto body = trim(t.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      const auto key = trim(body.substr(0, colon));
      const auto value = trim(body.substr(colon + 1));
      if (key == "modulation_note") {
        meta->modulation_note = std::string(value);
      } else if (key == "mw_frequency_GHz") {
        meta->mw_frequency_GHz = parse_number(value, key);
      } else if (key == "theta_rad") {
        meta->theta_rad = parse_number(value, key);
      } else if (key == "temperature_K") {
        meta->temperature_K = parse_number(value, key);
      } else if (key == "pump_power_mW") {
        meta->pump_power_mW = parse_number(value, key);
      } else if (key == "q_factor") {
        meta->q_factor = parse_number(value, key);
      }
      continue;
    }
    if (t != header) {
      throw ValidationError("line " + std::to_string(line_no) + ": missing header '" +
                            std::string(header) + "'");
    }
    return line_no;
  }
  throw ValidationError("missing header '" + std::string(header) + "' (no data lines)");
}

template <typename Row>
std::vector<Row> read_pairs(std::istream& is, std::size_t line_no) {
  std::vector<Row> rows;
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    std::string_view a, b;
    double x = 0.0, y = 0.0;
    if (!split_pair(t, a, b) || !try_parse(a, x) || !try_parse(b, y)) {
      throw ValidationError("line " + std::to_string(line_no) + ": malformed row '" +
                            std::string(t) + "'");
    }
    rows.push_back(Row{x, y});
  }
  return rows;
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw NumericalError("number formatting failed");
  return std::string(buf.data(), ptr);
}

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  if (!try_parse(text, value)) {
    throw ValidationError("'" + std::string(what) + "': not a number: '" + std::string(text) + "'");
  }
  return value;
}

void write_trace_csv(std::ostream& os, const SpectrumTrace& trace) {
  const auto& m = trace.meta();
  os << "# mw_frequency_GHz: " << format_number(m.mw_frequency_GHz) << '\n'
     << "# theta_rad: " << format_number(m.theta_rad) << '\n'
     << "# temperature_K: " << format_number(m.temperature_K) << '\n'
     << "# pump_power_mW: " << format_number(m.pump_power_mW) << '\n'
     << "# q_factor: " << format_number(m.q_factor) << '\n'
     << "# modulation_note: " << m.modulation_note << '\n'
     << kTraceHeader << '\n';
  const auto field = trace.field_mT();
  const auto signal = trace.signal();
  for (std::size_t i = 0; i < field.size(); ++i) {
    os << format_number(field[i]) << ',' << format_number(signal[i]) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const SpectrumTrace& trace) {
  auto out = open_output(path);
  write_trace_csv(out, trace);
}

SpectrumTrace read_trace_csv(std::istream& is) {
  TraceMeta meta;
  const std::size_t header_line = read_preamble(is, kTraceHeader, &meta);
  struct Sample {
    double field;
    double signal;
  };
  const auto rows = read_pairs<Sample>(is, header_line);
  std::vector<double> field, signal;
  field.reserve(rows.size());
  signal.reserve(rows.size());
  for (const auto& r : rows) {
    field.push_back(r.field);
    signal.push_back(r.signal);
  }
  return SpectrumTrace(std::move(field), std::move(signal), std::move(meta));
}

SpectrumTrace read_trace_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_trace_csv(in);
}

std::vector<SaturationPoint> read_saturation_csv(std::istream& is) {
  const std::size_t header_line = read_preamble(is, kSaturationHeader, nullptr);
  return read_pairs<SaturationPoint>(is, header_line);
}

std::vector<SaturationPoint> read_saturation_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_saturation_csv(in);
}

void write_threshold_csv(std::ostream& os, const std::vector<ThresholdRow>& rows,
                         double axis_display_scale) {
  os << "axis_value,q_min,status\n";
  for (const auto& row : rows) {
    os << format_number(row.axis_value * axis_display_scale) << ','
       << (std::isinf(row.q_min) ? std::string("inf") : format_number(row.q_min)) << ','
       << to_string(row.status) << '\n';
  }
}

void Report::comment(std::string text) { comments_.push_back(std::move(text)); }

void Report::add(std::string key, std::string value) {
  entries_.emplace_back(std::move(key), std::move(value));
}

void Report::add(std::string key, double value) { add(std::move(key), format_number(value)); }

void Report::add(std::string key, long long value) {
  add(std::move(key), std::to_string(value));
}

void Report::add(std::string key, bool value) {
  add(std::move(key), std::string(value ? "true" : "false"));
}

void Report::write(std::ostream& os) const {
  for (const auto& c : comments_) os << "# " << c << '\n';
  for (const auto& [key, value] : entries_) os << key << " = " << value << '\n';
}

std::vector<std::pair<std::string, std::string>> read_report(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("report line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    out.emplace_back(std::string(trim(t.substr(0, eq))), std::string(trim(t.substr(eq + 1))));
  }
  return out;
}

}  // namespace vsimaser::io
