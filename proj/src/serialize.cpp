#include "idt/serialize.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "idt/errors.hpp"

namespace idt {

namespace {

constexpr std::string_view kMagic = "IDT1";

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char*>(b.data()), 8);
  if (!is) throw ContractError("truncated binary ensemble");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ContractError("malformed number in ensemble file: '" +
                        std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

nlohmann::json ensemble_metadata(const PathEnsemble& e) {
  nlohmann::json j;
  j["format"] = std::string(kMagic);
  j["rows"] = e.n_paths();
  j["cols"] = e.n_times();
  j["grid"] = std::vector<double>(e.grid().begin(), e.grid().end());
  j["seed"] = e.seed();
  j["spec"] = e.spec() ? nlohmann::json(e.spec()->describe()) : nlohmann::json();
  j["provenance"] = e.provenance();
  j["jitter"] = e.jitter();
  return j;
}

void write_csv(const PathEnsemble& e, std::ostream& os) {
  std::string out;
  for (std::size_t j = 0; j < e.n_times(); ++j) {
    if (j > 0) out += ',';
    out += "t=" + format_double(e.grid()[j]);
  }
  out += '\n';
  for (std::size_t i = 0; i < e.n_paths(); ++i) {
    for (std::size_t j = 0; j < e.n_times(); ++j) {
      if (j > 0) out += ',';
      out += format_double(e.at(i, j));
    }
    out += '\n';
  }
  os << out;
}

PathEnsemble read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ContractError("empty CSV ensemble");
  std::vector<double> times;
  for (auto field : split_commas(line)) {
    if (field.substr(0, 2) != "t=") {
      throw ContractError("CSV header fields must look like t=<value>");
    }
    times.push_back(parse_double(field.substr(2)));
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != times.size()) {
      throw ContractError("CSV row " + std::to_string(rows + 1) +
                          " has the wrong number of columns");
    }
    for (auto f : fields) values.push_back(parse_double(f));
    ++rows;
  }
  return PathEnsemble(TimeGrid::real_line(std::move(times)), rows, std::move(values),
                      std::nullopt, 0, "csv");
}

void write_binary(const PathEnsemble& e, std::ostream& os) {
  const std::string meta = ensemble_metadata(e).dump();
  os.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  put_u64(os, meta.size());
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  for (double v : e.values()) put_u64(os, std::bit_cast<std::uint64_t>(v));
}

nlohmann::json read_binary_metadata(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), 4);
  if (!is || std::string_view(magic.data(), 4) != kMagic) {
    throw ContractError("not an IDT1 ensemble (bad magic)");
  }
  const std::uint64_t len = get_u64(is);
  std::string meta(len, '\0');
  is.read(meta.data(), static_cast<std::streamsize>(len));
  if (!is) throw ContractError("truncated binary ensemble header");
  return nlohmann::json::parse(meta);
}

PathEnsemble read_binary(std::istream& is) {
  const auto meta = read_binary_metadata(is);
  const auto rows = meta.at("rows").get<std::size_t>();
  const auto cols = meta.at("cols").get<std::size_t>();
  auto grid = meta.at("grid").get<std::vector<double>>();
  if (grid.size() != cols) throw ContractError("grid/cols mismatch in header");
  std::vector<double> values(rows * cols);
  for (double& v : values) v = std::bit_cast<double>(get_u64(is));
  return PathEnsemble(TimeGrid::real_line(std::move(grid)), rows, std::move(values),
                      std::nullopt, meta.at("seed").get<std::uint64_t>(),
                      meta.at("provenance").get<std::string>(),
                      meta.at("jitter").get<double>());
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace idt
