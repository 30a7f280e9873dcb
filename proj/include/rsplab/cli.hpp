#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rsplab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

enum class OutputFormat { Json, Csv };

struct ExperimentConfig {
  std::string subcommand;
  std::optional<int> d;
  std::optional<int> n;
  std::string family = "shift";  // shift | pauli | equatorial | file:<path>
  std::string sampler = "auto";  // auto | haar | equatorial
  int samples = 100;
  std::uint64_t seed = 0;
  double tol = 1e-7;
  std::optional<double> generic_margin;
  OutputFormat output = OutputFormat::Json;
  std::optional<std::string> out_path;
};

/// Runs one subcommand. `args` excludes the program name. Primary output goes
/// to `out` (or --out), diagnostics to `err`. Returns 0, 1 or 2.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rsplab::cli
