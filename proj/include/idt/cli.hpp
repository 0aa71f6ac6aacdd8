#pragma once

// Batch experiment runner behind the `idtlab` command.
//
// Configs are flat `key = value` files with dotted sections:
//
//   seed = 42
//   n_paths = 20000
//   grid = 0.5, 1, 2
//   spec.kind = mixture
//   spec.base.kind = fbm
//   spec.base.hurst = 0.3
//   spec.atoms = 1:0.5, 2:0.5
//   test.pos.kind = idt
//   test.pos.n = 2
//   threshold_table = ../calibration/thresholds.json
//
// `#` starts a comment. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "idt/calibration.hpp"

namespace idt::cli {

/// Malformed or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kAllPass = 0, kSomeFail = 1, kUsageError = 2 };

struct AssociationParams {
  LevyFamily family;
  double alpha;
  std::vector<double> t_list;
  double level;
};

struct TestDescriptor {
  std::string label;
  std::string kind_name;
  std::variant<TestKind, AssociationParams> params;
  /// True-null version of `params` used for calibration.
  std::optional<TestKind> null_kind;
};

struct ExperimentConfig {
  ProcessSpec spec;
  TimeGrid grid;
  std::size_t n_paths;
  std::uint64_t seed;
  std::vector<std::size_t> times;
  std::vector<TestDescriptor> tests;
  std::filesystem::path output_dir;
  /// A path, or the literal "calibrate" for inline calibration.
  std::string threshold_table;
  double quantile;
  std::size_t calibration_reps;
  std::vector<double> calibration_quantiles;
  bool export_csv;
  bool export_binary;
  /// Every key with the value actually used, defaults included.
  std::map<std::string, std::string> resolved;

  EcfSetup setup() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_paths;
  std::optional<std::filesystem::path> output_dir;
};

/// Relative paths inside the config resolve against `base_dir`.
ExperimentConfig parse_config(std::istream& is,
                              const std::filesystem::path& base_dir,
                              const Overrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const Overrides& overrides = {});

/// Runs every test, writes report_<label>.json, summary.json and
/// summary.tap (plus ensemble files when export.* is set).
int run(const ExperimentConfig& config, std::ostream& log);

/// Calibrates every distance-type test of the config under its null and
/// merges the entries into the threshold table.
int calibrate_cmd(const ExperimentConfig& config, std::ostream& log);

/// Writes paths.csv and/or paths.idt into the output directory.
int export_paths(const ExperimentConfig& config, std::ostream& log);

/// Pretty-prints summary.json and the per-test reports found in `dir`.
int report(const std::filesystem::path& dir, std::ostream& out);

/// Entry point shared by the binary and the tests.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace idt::cli
