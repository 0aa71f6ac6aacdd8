#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "idt/cli.hpp"
#include "idt/errors.hpp"
#include "idt/parallel.hpp"
#include "idt/serialize.hpp"

namespace idt::cli {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

EcfSetup setup_for(const ExperimentConfig& c, const TestKind& kind) {
  if (const auto* s = std::get_if<StationarityKind>(&kind)) {
    return EcfSetup{c.grid, c.times, default_theta_grid(s->window), c.n_paths};
  }
  return c.setup();
}

/// Null statistics for one distance test; the stream depends only on the
/// calibration key so tables do not depend on test order.
std::vector<double> null_stats_for(const ExperimentConfig& c,
                                   const TestKind& null_kind) {
  const EcfSetup setup = setup_for(c, null_kind);
  const std::string base = make_key(null_kind, c.spec, setup, 0.0).str();
  const RngState rng = RngState(c.seed).split(fnv1a("calibrate|" + base));
  return null_statistics(null_kind, c.spec, setup, c.calibration_reps, rng);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_ensembles(const ExperimentConfig& c, bool csv, bool binary,
                     std::ostream& log) {
  const auto e = generate(c.spec, c.grid, c.n_paths, RngState(c.seed));
  std::filesystem::create_directories(c.output_dir);
  if (csv) {
    std::ostringstream os;
    write_csv(e, os);
    write_file_atomic(c.output_dir / "paths.csv", os.str());
    log << "wrote " << (c.output_dir / "paths.csv").string() << "\n";
  }
  if (binary) {
    std::ostringstream os(std::ios::binary);
    write_binary(e, os);
    write_file_atomic(c.output_dir / "paths.idt", os.str());
    log << "wrote " << (c.output_dir / "paths.idt").string() << "\n";
  }
}

}  // namespace

int run(const ExperimentConfig& c, std::ostream& log) {
  std::optional<ThresholdTable> table;
  if (c.threshold_table != "calibrate") {
    table = ThresholdTable::load(c.threshold_table);
  }
  std::filesystem::create_directories(c.output_dir);

  nlohmann::json summary_tests = nlohmann::json::array();
  std::string tap = "1.." + std::to_string(c.tests.size()) + "\n";
  bool all_pass = true;
  std::size_t index = 0;
  for (const auto& t : c.tests) {
    ++index;
    const RngState rng = RngState(c.seed).split(fnv1a("run|" + t.label));
    TestReport rep;
    std::string source;
    if (const auto* assoc = std::get_if<AssociationParams>(&t.params)) {
      rep = association_test(c.spec, assoc->family, assoc->alpha, assoc->t_list,
                             c.n_paths, rng, assoc->level);
      source = "level";
    } else {
      const auto& kind = std::get<TestKind>(t.params);
      const EcfSetup setup = setup_for(c, kind);
      double threshold = 0.0;
      if (table) {
        threshold = table->threshold(make_key(kind, c.spec, setup, c.quantile));
        source = "table";
      } else {
        threshold = empirical_quantile(null_stats_for(c, *t.null_kind),
                                       c.quantile);
        source = "inline calibration (" + std::to_string(c.calibration_reps) +
                 " reps)";
      }
      rep = run_test(kind, c.spec, setup, rng, threshold);
      rep.details["calibration_key"] = kind_key(kind);
      rep.details["quantile"] = format_double(c.quantile);
    }
    rep.details["label"] = t.label;
    rep.details["threshold_source"] = source;
    all_pass = all_pass && rep.pass;

    nlohmann::json doc{{"label", t.label},
                       {"kind", t.kind_name},
                       {"report", to_json(rep)},
                       {"config", c.resolved}};
    write_file_atomic(c.output_dir / ("report_" + t.label + ".json"),
                      doc.dump(2) + "\n");
    summary_tests.push_back({{"label", t.label},
                             {"kind", t.kind_name},
                             {"pass", rep.pass},
                             {"statistic", rep.statistic},
                             {"threshold", rep.threshold}});
    const auto line = to_tap(rep, index) + " [" + t.label + "]";
    tap += line + "\n";
    log << line << "\n";
  }
  if (c.export_csv || c.export_binary) {
    write_ensembles(c, c.export_csv, c.export_binary, log);
  }
  nlohmann::json summary{{"all_pass", all_pass},
                         {"config", c.resolved},
                         {"tests", summary_tests},
                         {"timestamp", utc_timestamp()}};
  write_file_atomic(c.output_dir / "summary.json", summary.dump(2) + "\n");
  write_file_atomic(c.output_dir / "summary.tap", tap);
  return all_pass ? kAllPass : kSomeFail;
}

int calibrate_cmd(const ExperimentConfig& c, std::ostream& log) {
  if (c.threshold_table == "calibrate") {
    throw ConfigError("field 'threshold_table': calibrate needs a table path");
  }
  ThresholdTable table;
  if (std::filesystem::exists(c.threshold_table)) {
    table = ThresholdTable::load(c.threshold_table);
  }
  std::set<std::string> done;
  for (const auto& t : c.tests) {
    if (!t.null_kind) continue;
    const EcfSetup setup = setup_for(c, *t.null_kind);
    const std::string base = make_key(*t.null_kind, c.spec, setup, 0.0).str();
    if (!done.insert(base).second) continue;
    const auto stats = null_stats_for(c, *t.null_kind);
    for (double q : c.calibration_quantiles) {
      const auto key = make_key(*t.null_kind, c.spec, setup, q);
      const double thr = empirical_quantile(stats, q);
      table.insert({key, thr, c.calibration_reps, c.seed});
      log << key.str() << " -> " << format_double(thr) << "\n";
    }
  }
  std::filesystem::create_directories(
      std::filesystem::path(c.threshold_table).parent_path());
  table.save(c.threshold_table);
  return kAllPass;
}

int export_paths(const ExperimentConfig& c, std::ostream& log) {
  const bool either = c.export_csv || c.export_binary;
  write_ensembles(c, either ? c.export_csv : true,
                  either ? c.export_binary : true, log);
  return kAllPass;
}

int report(const std::filesystem::path& dir, std::ostream& out) {
  std::ifstream is(dir / "summary.json");
  if (!is) throw ConfigError("no summary.json in " + dir.string());
  const auto summary = nlohmann::json::parse(is);
  out << "summary of " << dir.string() << " ("
      << summary.value("timestamp", std::string("?")) << ")\n";
  for (const auto& t : summary.at("tests")) {
    const auto label = t.at("label").get<std::string>();
    out << (t.at("pass").get<bool>() ? "  PASS  " : "  FAIL  ")
        << std::left << std::setw(20) << label << std::setw(16)
        << t.at("kind").get<std::string>()
        << " statistic=" << format_double(t.at("statistic").get<double>())
        << " threshold=" << format_double(t.at("threshold").get<double>())
        << "\n";
    std::ifstream rs(dir / ("report_" + label + ".json"));
    if (rs) {
      const auto doc = nlohmann::json::parse(rs);
      for (const auto& [k, v] : doc.at("report").at("details").items()) {
        out << "          " << k << ": " << v.get<std::string>() << "\n";
      }
    }
  }
  const bool pass = summary.at("all_pass").get<bool>();
  out << (pass ? "all tests passed\n" : "some tests failed\n");
  return pass ? kAllPass : kSomeFail;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"idtlab: simulate alpha-IDT processes and verify their "
               "distributional identities"};
  app.require_subcommand(1);

  std::string config_path;
  std::string report_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> threads;

  auto common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config file")
        ->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--paths", paths, "override n_paths");
    sub->add_option("--out", out_dir, "override the output directory");
    sub->add_option("--threads", threads,
                    "worker threads (default: IDTLAB_THREADS or hardware)");
  };
  auto* run_cmd = app.add_subcommand("run", "run the configured tests");
  common(run_cmd);
  auto* cal_cmd = app.add_subcommand("calibrate", "write null thresholds");
  common(cal_cmd);
  auto* exp_cmd = app.add_subcommand("export", "write ensemble files");
  common(exp_cmd);
  auto* rep_cmd = app.add_subcommand("report", "pretty-print a run directory");
  rep_cmd->add_option("dir", report_dir, "output directory of a run")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kAllPass : kUsageError;
  }

  if (threads) {
    parallel::set_threads(*threads);
  } else if (const char* env = std::getenv("IDTLAB_THREADS")) {
    parallel::set_threads(static_cast<std::size_t>(std::strtoull(env, nullptr, 10)));
  }

  try {
    if (rep_cmd->parsed()) return report(report_dir, out);
    Overrides ov;
    ov.seed = seed;
    ov.n_paths = paths;
    if (out_dir) ov.output_dir = std::filesystem::path(*out_dir);
    const auto config = load_config(config_path, ov);
    if (run_cmd->parsed()) return run(config, out);
    if (cal_cmd->parsed()) return calibrate_cmd(config, out);
    return export_paths(config, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kUsageError;
}

}  // namespace idt::cli
