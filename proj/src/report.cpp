#include "idt/report.hpp"

#include <array>
#include <charconv>
#include <system_error>

namespace idt {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

TestReport TestReport::make(std::string name, double statistic,
                            double threshold, Decision decision,
                            std::uint64_t n_samples, std::uint64_t seed,
                            std::map<std::string, std::string> details) {
  TestReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.threshold = threshold;
  r.n_samples = n_samples;
  r.seed = seed;
  r.details = std::move(details);
  if (decision == Decision::kDistance) {
    r.pass = statistic <= threshold;
    r.details["decision"] = "statistic <= threshold";
  } else {
    r.pass = statistic >= threshold;
    r.details["decision"] = "p_value >= level";
  }
  return r;
}

nlohmann::json to_json(const TestReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["statistic"] = r.statistic;
  j["threshold"] = r.threshold;
  j["pass"] = r.pass;
  j["n_samples"] = r.n_samples;
  j["seed"] = r.seed;
  j["details"] = r.details;
  return j;
}

TestReport report_from_json(const nlohmann::json& j) {
  TestReport r;
  r.name = j.at("name").get<std::string>();
  r.statistic = j.at("statistic").get<double>();
  r.threshold = j.at("threshold").get<double>();
  r.pass = j.at("pass").get<bool>();
  r.n_samples = j.at("n_samples").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.details = j.at("details").get<std::map<std::string, std::string>>();
  return r;
}

std::string to_tap(const TestReport& r, std::size_t index) {
  return std::string(r.pass ? "ok " : "not ok ") + std::to_string(index) +
         " - " + r.name + " statistic=" + format_double(r.statistic) +
         " threshold=" + format_double(r.threshold) +
         " n=" + std::to_string(r.n_samples) + " seed=" + std::to_string(r.seed);
}

}  // namespace idt
