#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vsimaser::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command line (without the program name). Reports and CSV go to `out`
/// unless --out names a file; diagnostics and logged defaults go to `err`.
///
/// Commands: synth, sweep-angle, fit, fit-saturation, superradiance, threshold,
/// sweep-threshold. Returns 0 on success, 2 on invalid input, 3 on numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vsimaser::cli
