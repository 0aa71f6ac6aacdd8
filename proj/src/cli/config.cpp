#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "idt/cli.hpp"
#include "idt/errors.hpp"

namespace idt::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

/// Key/value store that remembers which keys were consumed and the value
/// (default or explicit) used for each.
class KeyValues {
 public:
  static KeyValues parse(std::istream& is) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected 'key = value'");
      }
      const auto key = trim(std::string_view(t).substr(0, eq));
      const auto value = trim(std::string_view(t).substr(eq + 1));
      if (key.empty()) {
        throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      }
      if (!kv.values_.emplace(key, value).second) {
        throw ConfigError("duplicate key '" + key + "'");
      }
      kv.order_.push_back(key);
    }
    return kv;
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> get(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    resolved_[key] = it->second;
    return it->second;
  }

  std::string require(const std::string& key) {
    auto v = get(key);
    if (!v) throw ConfigError("missing required field '" + key + "'");
    return *v;
  }

  std::string text_or(const std::string& key, const std::string& def) {
    if (auto v = get(key)) return *v;
    resolved_[key] = def;
    return def;
  }

  double number(const std::string& key) {
    return to_number(key, require(key));
  }

  double number_or(const std::string& key, double def) {
    if (auto v = get(key)) return to_number(key, *v);
    resolved_[key] = format_double(def);
    return def;
  }

  std::uint64_t integer(const std::string& key) {
    return to_integer(key, require(key));
  }

  std::uint64_t integer_or(const std::string& key, std::uint64_t def) {
    if (auto v = get(key)) return to_integer(key, *v);
    resolved_[key] = std::to_string(def);
    return def;
  }

  bool flag_or(const std::string& key, bool def) {
    const auto v = text_or(key, def ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("field '" + key + "': expected true/false, got '" + v +
                      "'");
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(require(key))) {
      out.push_back(to_number(key, item));
    }
    if (out.empty()) throw ConfigError("field '" + key + "' is empty");
    return out;
  }

  std::vector<TimeAtom> atoms(const std::string& key) {
    std::vector<TimeAtom> out;
    for (const auto& item : split_list(require(key))) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw ConfigError("field '" + key + "': atoms look like u:weight");
      }
      out.push_back({to_number(key, trim(item.substr(0, colon))),
                     to_number(key, trim(item.substr(colon + 1)))});
    }
    if (out.empty()) throw ConfigError("field '" + key + "' is empty");
    return out;
  }

  /// Distinct second segments of keys `<prefix>.<label>.*`, in file order.
  std::vector<std::string> labels(const std::string& prefix) const {
    std::vector<std::string> out;
    const std::string p = prefix + ".";
    for (const auto& key : order_) {
      if (key.rfind(p, 0) != 0) continue;
      const auto rest = key.substr(p.size());
      const auto label = rest.substr(0, rest.find('.'));
      if (std::find(out.begin(), out.end(), label) == out.end()) {
        out.push_back(label);
      }
    }
    return out;
  }

  void check_all_used() const {
    for (const auto& key : order_) {
      if (!used_.count(key)) throw ConfigError("unknown field '" + key + "'");
    }
  }

  void record(const std::string& key, const std::string& value) {
    resolved_[key] = value;
  }

  const std::map<std::string, std::string>& resolved() const {
    return resolved_;
  }

 private:
  static double to_number(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ConfigError("field '" + key + "': expected a number, got '" + s +
                        "'");
    }
    return v;
  }

  static std::uint64_t to_integer(const std::string& key,
                                  const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ConfigError("field '" + key +
                        "': expected a nonnegative integer, got '" + s + "'");
    }
    return v;
  }

  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
  std::set<std::string> used_;
  std::map<std::string, std::string> resolved_;
};

LevyFamily parse_family(KeyValues& kv, const std::string& prefix) {
  const auto kind = kv.require(prefix + ".kind");
  if (kind == "brownian") {
    return Brownian{kv.number_or(prefix + ".volatility", 1.0),
                    kv.number_or(prefix + ".drift", 0.0)};
  }
  if (kind == "stable") {
    return StableMotion{kv.number(prefix + ".index"),
                        kv.number_or(prefix + ".skew", 0.0)};
  }
  if (kind == "gamma") {
    return GammaSubordinator{kv.number_or(prefix + ".shape", 1.0),
                             kv.number_or(prefix + ".rate", 1.0)};
  }
  if (kind == "compound_poisson") {
    return CompoundPoisson{kv.number(prefix + ".intensity"),
                           kv.number_or(prefix + ".jump_mean", 0.0),
                           kv.number_or(prefix + ".jump_sd", 1.0)};
  }
  throw ConfigError("field '" + prefix + ".kind': unknown Levy family '" +
                    kind + "'");
}

ProcessSpec parse_spec(KeyValues& kv, const std::string& prefix) {
  const auto kind = kv.require(prefix + ".kind");
  if (kind == "stable_line") {
    return ProcessSpec::stable_line(kv.number(prefix + ".alpha"));
  }
  if (kind == "power_line") {
    return ProcessSpec::power_line(kv.number(prefix + ".alpha"));
  }
  if (kind == "fbm") {
    return ProcessSpec::gaussian(Kernel::fbm(kv.number(prefix + ".hurst")));
  }
  if (kind == "spectral") {
    std::vector<SpectralAtom> atoms;
    for (const auto& a : kv.atoms(prefix + ".measure")) {
      atoms.push_back({a.u, a.weight});
    }
    return ProcessSpec::gaussian(
        Kernel::spectral(kv.number(prefix + ".alpha"),
                         SpectralMeasure(std::move(atoms))));
  }
  if (kind == "additive") {
    return ProcessSpec::additive(parse_family(kv, prefix + ".family"),
                                 kv.number(prefix + ".alpha"));
  }
  if (kind == "subordinated") {
    auto family = parse_family(kv, prefix + ".family");
    return ProcessSpec::subordinated(std::move(family),
                                     parse_spec(kv, prefix + ".chrono"));
  }
  if (kind == "mixture") {
    auto base = parse_spec(kv, prefix + ".base");
    return ProcessSpec::mixture(std::move(base), kv.atoms(prefix + ".atoms"));
  }
  if (kind == "phi") {
    auto family = parse_family(kv, prefix + ".family");
    return ProcessSpec::phi_functional(std::move(family),
                                       kv.atoms(prefix + ".atoms"),
                                       kv.number(prefix + ".alpha"));
  }
  throw ConfigError("field '" + prefix + ".kind': unknown process kind '" +
                    kind + "'");
}

int small_int(KeyValues& kv, const std::string& key, int def) {
  const auto v = kv.integer_or(key, static_cast<std::uint64_t>(def));
  if (v > 1000) throw ConfigError("field '" + key + "' is too large");
  return static_cast<int>(v);
}

TestDescriptor parse_test(KeyValues& kv, const std::string& label,
                          const ProcessSpec& spec, const TimeGrid& grid) {
  const std::string p = "test." + label;
  const auto kind = kv.require(p + ".kind");
  const double exponent = spec.idt_exponent();
  TestDescriptor d{label, kind, IdtKind{exponent, 2}, std::nullopt};
  if (kind == "idt") {
    const auto mode_text = kv.text_or(p + ".mode", "power");
    if (mode_text != "power" && mode_text != "sum") {
      throw ConfigError("field '" + p + ".mode': expected power or sum");
    }
    const auto mode = mode_text == "power" ? IdtMode::kPower : IdtMode::kSum;
    IdtKind k{kv.number_or(p + ".alpha", exponent), small_int(kv, p + ".n", 2),
              mode};
    d.params = k;
    d.null_kind = IdtKind{exponent, k.n, mode};
  } else if (kind == "selfsimilarity") {
    SelfSimilarityKind k{kv.number(p + ".h"), kv.number_or(p + ".a", 2.0)};
    d.params = k;
    d.null_kind = SelfSimilarityKind{kv.number_or(p + ".null_h", k.h), k.a};
  } else if (kind == "stability") {
    StabilityKind k{kv.number(p + ".beta"), small_int(kv, p + ".n", 2)};
    d.params = k;
    d.null_kind = StabilityKind{kv.number_or(p + ".null_beta", k.beta), k.n};
  } else if (kind == "temporal_sd") {
    TemporalSdKind k{kv.number_or(p + ".alpha", exponent),
                     kv.number_or(p + ".b", 0.5)};
    d.params = k;
    d.null_kind = TemporalSdKind{exponent, k.b};
  } else if (kind == "stationarity") {
    StationarityKind k{kv.number_or(p + ".alpha", exponent),
                       kv.number_or(p + ".y_start", -1.0),
                       kv.number_or(p + ".y_step", 0.25),
                       static_cast<std::size_t>(kv.integer_or(p + ".y_count", 8)),
                       static_cast<std::size_t>(kv.integer_or(p + ".window", 2)),
                       static_cast<std::size_t>(kv.integer_or(p + ".shift", 1))};
    d.params = k;
    StationarityKind null = k;
    null.alpha = exponent;
    d.null_kind = null;
  } else if (kind == "association") {
    AssociationParams a{parse_family(kv, p + ".family"),
                        kv.number_or(p + ".alpha", exponent),
                        std::vector<double>(grid.begin(), grid.end()),
                        kv.number_or(p + ".level", 0.01)};
    if (kv.has(p + ".t_list")) a.t_list = kv.numbers(p + ".t_list");
    d.params = std::move(a);
  } else {
    throw ConfigError("field '" + p + ".kind': unknown test kind '" + kind +
                      "'");
  }
  return d;
}

}  // namespace

ExperimentConfig parse_config(std::istream& is,
                              const std::filesystem::path& base_dir,
                              const Overrides& overrides) {
  KeyValues kv = KeyValues::parse(is);
  if (overrides.seed) kv.set("seed", std::to_string(*overrides.seed));
  if (overrides.n_paths) kv.set("n_paths", std::to_string(*overrides.n_paths));

  try {
    const std::uint64_t seed = kv.integer("seed");
    const auto n_paths = static_cast<std::size_t>(kv.integer("n_paths"));
    if (n_paths < 100) throw ConfigError("field 'n_paths' must be >= 100");
    TimeGrid grid(kv.numbers("grid"));
    ProcessSpec spec = parse_spec(kv, "spec");
    kv.record("spec.canonical", spec.describe());

    std::vector<std::size_t> times;
    if (kv.has("times")) {
      for (double t : kv.numbers("times")) {
        if (t < 0 || t != std::floor(t) || t >= static_cast<double>(grid.size())) {
          throw ConfigError("field 'times': entries are grid indices");
        }
        times.push_back(static_cast<std::size_t>(t));
      }
    } else {
      for (std::size_t i = 0; i < std::min<std::size_t>(grid.size(), 3); ++i) {
        times.push_back(i);
      }
    }
    if (times.size() > 3) throw ConfigError("field 'times': at most 3 times");
    if (kv.text_or("theta_grid", "m12") != "m12") {
      throw ConfigError("field 'theta_grid': only 'm12' is available");
    }

    std::vector<TestDescriptor> tests;
    for (const auto& label : kv.labels("test")) {
      tests.push_back(parse_test(kv, label, spec, grid));
    }

    std::filesystem::path out_dir =
        overrides.output_dir ? *overrides.output_dir
                             : base_dir / kv.text_or("output_dir", "out");

    std::string table = kv.text_or("threshold_table", "calibrate");
    if (table != "calibrate") table = (base_dir / table).lexically_normal().string();

    const double quantile = kv.number_or("quantile", 0.99);
    const auto reps =
        static_cast<std::size_t>(kv.integer_or("calibrate.reps", 200));
    std::vector<double> quantiles{quantile};
    if (kv.has("calibrate.quantiles")) quantiles = kv.numbers("calibrate.quantiles");
    const bool csv = kv.flag_or("export.csv", false);
    const bool binary = kv.flag_or("export.binary", false);

    kv.check_all_used();
    auto resolved = kv.resolved();
    resolved.erase("output_dir");
    return ExperimentConfig{std::move(spec),     std::move(grid),
                            n_paths,             seed,
                            std::move(times),    std::move(tests),
                            std::move(out_dir),  std::move(table),
                            quantile,            reps,
                            std::move(quantiles), csv,
                            binary,              std::move(resolved)};
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid parameter: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const Overrides& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is, path.parent_path(), overrides);
}

EcfSetup ExperimentConfig::setup() const {
  return EcfSetup{grid, times, default_theta_grid(times.size()), n_paths};
}

}  // namespace idt::cli
