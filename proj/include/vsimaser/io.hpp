#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vsimaser/analysis.hpp"
#include "vsimaser/spectrum.hpp"
#include "vsimaser/threshold.hpp"

namespace vsimaser::io {

/// Shortest decimal form that parses back to the identical double.
std::string format_number(double value);

/// Strict full-string parse; throws ValidationError naming `what` on failure.
double parse_number(std::string_view text, std::string_view what);

// Trace CSV: optional "# key: value" metadata lines, the header "field_mT,signal",
// then one numeric row per sample.
void write_trace_csv(std::ostream& os, const SpectrumTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const SpectrumTrace& trace);
SpectrumTrace read_trace_csv(std::istream& is);
SpectrumTrace read_trace_csv(const std::filesystem::path& path);

// Saturation points CSV: header "power_mW,delta_p".
std::vector<SaturationPoint> read_saturation_csv(std::istream& is);
std::vector<SaturationPoint> read_saturation_csv(const std::filesystem::path& path);

// Threshold sweep CSV: header "axis_value,q_min,status".
void write_threshold_csv(std::ostream& os, const std::vector<ThresholdRow>& rows,
                         double axis_display_scale = 1.0);

/// `key = value` report with optional leading `#` comment lines.
class Report {
 public:
  void comment(std::string text);
  void add(std::string key, std::string value);
  void add(std::string key, const char* value) { add(std::move(key), std::string(value)); }
  void add(std::string key, std::string_view value) { add(std::move(key), std::string(value)); }
  void add(std::string key, double value);
  void add(std::string key, long long value);
  void add(std::string key, bool value);

  void write(std::ostream& os) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
    return entries_;
  }

 private:
  std::vector<std::string> comments_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Parses a report back into ordered key/value pairs; comments are skipped.
std::vector<std::pair<std::string, std::string>> read_report(std::istream& is);

}  // namespace vsimaser::io
