#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

namespace idt {

/// How `statistic` and `threshold` are compared.
enum class Decision {
  kDistance,  // pass iff statistic <= threshold
  kPValue,    // statistic is a p-value; pass iff statistic >= threshold
};

/// Outcome of one verification. Immutable once built.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> details;

  static TestReport make(std::string name, double statistic, double threshold,
                         Decision decision, std::uint64_t n_samples,
                         std::uint64_t seed,
                         std::map<std::string, std::string> details = {});
};

/// Keys come out sorted, so equal reports serialize to equal bytes.
nlohmann::json to_json(const TestReport& r);
TestReport report_from_json(const nlohmann::json& j);

/// TAP line, e.g. `ok 3 - idt[n=2] statistic=0.0123 threshold=0.02`.
std::string to_tap(const TestReport& r, std::size_t index);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

}  // namespace idt
