#include "idt/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "idt/errors.hpp"
#include "idt/parallel.hpp"
#include "idt/serialize.hpp"
#include "idt/transforms.hpp"

namespace idt {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<double> y_grid_of(const StationarityKind& s) {
  std::vector<double> y(s.y_count);
  for (std::size_t i = 0; i < s.y_count; ++i) {
    y[i] = s.y_start + static_cast<double>(i) * s.y_step;
  }
  return y;
}

}  // namespace

std::string kind_key(const TestKind& kind) {
  return std::visit(
      Overloaded{
          [](const IdtKind& k) {
            return "idt[n=" + std::to_string(k.n) + ",mode=" +
                   (k.mode == IdtMode::kPower ? "power" : "sum") + "]";
          },
          [](const SelfSimilarityKind& k) {
            return "selfsimilarity[a=" + format_double(k.a) + "]";
          },
          [](const StabilityKind& k) {
            return "stability[n=" + std::to_string(k.n) + "]";
          },
          [](const TemporalSdKind& k) {
            return "temporal_sd[b=" + format_double(k.b) + "]";
          },
          [](const StationarityKind& k) {
            return "stationarity[window=" + std::to_string(k.window) +
                   ",shift=" + std::to_string(k.shift) +
                   ",y=" + format_double(k.y_start) + ":" +
                   format_double(k.y_step) + ":" + std::to_string(k.y_count) +
                   "]";
          }},
      kind);
}

TestReport run_test(const TestKind& kind, const ProcessSpec& spec,
                    const EcfSetup& setup, const RngState& rng,
                    double threshold) {
  return std::visit(
      Overloaded{
          [&](const IdtKind& k) {
            return idt_test(spec, k.alpha, k.n, setup, rng, threshold, k.mode);
          },
          [&](const SelfSimilarityKind& k) {
            return selfsimilarity_test(spec, k.h, k.a, setup, rng, threshold);
          },
          [&](const StabilityKind& k) {
            return stability_test(spec, k.beta, k.n, setup, rng, threshold);
          },
          [&](const TemporalSdKind& k) {
            return temporal_sd_test(spec, k.alpha, k.b, setup, rng, threshold);
          },
          [&](const StationarityKind& k) {
            if (k.y_count < 2 || !(k.y_step > 0.0)) {
              throw DomainError("stationarity needs >= 2 y points, step > 0");
            }
            const auto y = y_grid_of(k);
            std::vector<double> times;
            for (double v : y) times.push_back(std::exp(v));
            const auto raw =
                generate(spec, TimeGrid(times), setup.n_paths, rng.split(1));
            auto report = stationarity_test(lamperti_apply(raw, k.alpha, y),
                                            k.window, k.shift, setup.thetas,
                                            threshold);
            report.seed = rng.seed();
            report.details["alpha"] = format_double(k.alpha);
            return report;
          }},
      kind);
}

std::vector<double> null_statistics(const TestKind& kind,
                                    const ProcessSpec& null_spec,
                                    const EcfSetup& setup, std::size_t n_reps,
                                    const RngState& rng) {
  std::vector<double> stats(n_reps);
  const double inf = std::numeric_limits<double>::infinity();
  parallel::for_ranges(n_reps, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      stats[r] = run_test(kind, null_spec, setup, rng.split(r), inf).statistic;
    }
  });
  return stats;
}

double empirical_quantile(std::vector<double> stats, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) {
    throw DomainError("quantile must lie in (0, 1]");
  }
  if (stats.empty()) throw DomainError("no statistics to take a quantile of");
  if (quantile < 1.0) {
    const double needed = std::ceil(1.0 / (1.0 - quantile) - 1e-9);
    if (static_cast<double>(stats.size()) < needed) {
      throw DomainError("quantile " + format_double(quantile) + " needs at "
                        "least " + format_double(needed) + " repetitions");
    }
  }
  std::sort(stats.begin(), stats.end());
  const double n = static_cast<double>(stats.size());
  auto k = static_cast<std::size_t>(std::ceil(quantile * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, stats.size());
  return stats[k - 1];
}

double calibrate(const ProcessSpec& null_spec, const TestKind& kind,
                 const EcfSetup& setup, std::size_t n_reps, double quantile,
                 const RngState& rng) {
  // Validate the request before spending any Monte Carlo time.
  empirical_quantile(std::vector<double>(std::max<std::size_t>(n_reps, 1), 0.0),
                     quantile);
  if (n_reps == 0) throw DomainError("calibration needs n_reps >= 1");
  return empirical_quantile(null_statistics(kind, null_spec, setup, n_reps, rng),
                            quantile);
}

std::string CalibrationKey::str() const {
  return test + "|" + family + "|N=" + std::to_string(n_paths) + "|" +
         theta_grid + "|q=" + format_double(quantile);
}

CalibrationKey make_key(const TestKind& kind, const ProcessSpec& spec,
                        const EcfSetup& setup, double quantile) {
  std::string theta = setup.theta_grid_id();
  if (std::holds_alternative<StationarityKind>(kind)) theta = setup.thetas.id;
  return {kind_key(kind), spec.describe(), setup.n_paths, theta, quantile};
}

ThresholdTable ThresholdTable::from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kVersion) {
    throw ContractError("unsupported calibration table version");
  }
  ThresholdTable t;
  for (const auto& [k, v] : j.at("entries").items()) {
    CalibrationEntry e{
        {v.at("test").get<std::string>(), v.at("family").get<std::string>(),
         v.at("n_paths").get<std::size_t>(),
         v.at("theta_grid").get<std::string>(), v.at("quantile").get<double>()},
        v.at("threshold").get<double>(),
        v.at("n_reps").get<std::size_t>(),
        v.at("seed").get<std::uint64_t>()};
    t.insert(e);
  }
  return t;
}

ThresholdTable ThresholdTable::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ContractError("cannot open threshold table " + path.string());
  return from_json(nlohmann::json::parse(is));
}

nlohmann::json ThresholdTable::to_json() const {
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [k, e] : entries_) {
    entries[k] = {{"test", e.key.test},
                  {"family", e.key.family},
                  {"n_paths", e.key.n_paths},
                  {"theta_grid", e.key.theta_grid},
                  {"quantile", e.key.quantile},
                  {"threshold", e.threshold},
                  {"n_reps", e.n_reps},
                  {"seed", e.seed}};
  }
  return {{"version", kVersion}, {"entries", entries}};
}

void ThresholdTable::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump(2) + "\n");
}

void ThresholdTable::insert(const CalibrationEntry& entry) {
  entries_.insert_or_assign(entry.key.str(), entry);
}

std::optional<CalibrationEntry> ThresholdTable::find(
    const CalibrationKey& key) const {
  const auto it = entries_.find(key.str());
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double ThresholdTable::threshold(const CalibrationKey& key) const {
  const auto e = find(key);
  if (!e) throw ContractError("no calibrated threshold for " + key.str());
  return e->threshold;
}

}  // namespace idt
