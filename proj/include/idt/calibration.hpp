#pragma once

// Null calibration of ECF-distance thresholds and the versioned table that
// stores them.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "idt/statlab.hpp"

namespace idt {

struct IdtKind {
  double alpha;
  int n;
  IdtMode mode = IdtMode::kPower;
};
struct SelfSimilarityKind {
  double h;
  double a;
};
struct StabilityKind {
  double beta;
  int n;
};
struct TemporalSdKind {
  double alpha;
  double b;
};
/// Lamperti transform of the spec sampled at e^{y}, y on a uniform grid;
/// the EcfSetup's grid and times are not used, its θ grid must have
/// dimension `window`.
struct StationarityKind {
  double alpha;
  double y_start;
  double y_step;
  std::size_t y_count;
  std::size_t window;
  std::size_t shift;
};

/// A distance-type test together with the exponent it is asked to verify.
using TestKind = std::variant<IdtKind, SelfSimilarityKind, StabilityKind,
                              TemporalSdKind, StationarityKind>;

/// Structural identity of a test, excluding the exponent under test, so a
/// negative control looks up the same threshold as its true-null twin.
std::string kind_key(const TestKind& kind);

TestReport run_test(const TestKind& kind, const ProcessSpec& spec,
                    const EcfSetup& setup, const RngState& rng,
                    double threshold);

/// Statistics of `n_reps` runs; repetition r uses rng.split(r).
std::vector<double> null_statistics(const TestKind& kind,
                                    const ProcessSpec& null_spec,
                                    const EcfSetup& setup, std::size_t n_reps,
                                    const RngState& rng);

/// Order statistic k = ceil(q n) (1-based). Needs n >= 1/(1-q) for q < 1.
double empirical_quantile(std::vector<double> stats, double quantile);

/// Empirical `quantile` of the statistic under a true-null configuration.
double calibrate(const ProcessSpec& null_spec, const TestKind& kind,
                 const EcfSetup& setup, std::size_t n_reps, double quantile,
                 const RngState& rng);

struct CalibrationKey {
  std::string test;
  std::string family;
  std::size_t n_paths;
  std::string theta_grid;
  double quantile;

  std::string str() const;
};

struct CalibrationEntry {
  CalibrationKey key;
  double threshold;
  std::size_t n_reps;
  std::uint64_t seed;
};

/// JSON file {"version": 1, "entries": {<key>: {...}}}; keys are sorted on
/// output so equal tables are byte-identical.
class ThresholdTable {
 public:
  static constexpr int kVersion = 1;

  static ThresholdTable load(const std::filesystem::path& path);
  static ThresholdTable from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  void insert(const CalibrationEntry& entry);
  std::optional<CalibrationEntry> find(const CalibrationKey& key) const;
  /// Throws ContractError naming the missing key.
  double threshold(const CalibrationKey& key) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::string, CalibrationEntry> entries_;
};

CalibrationKey make_key(const TestKind& kind, const ProcessSpec& spec,
                        const EcfSetup& setup, double quantile);

}  // namespace idt
