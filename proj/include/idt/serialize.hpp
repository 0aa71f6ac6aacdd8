#pragma once

// Ensemble file formats.
//
// CSV: header `t=<time>` per column, then one row per path. Numbers use the
// shortest round-trip decimal form, so a write/read cycle is bit-exact.
//
// Binary: the 4 bytes "IDT1", a little-endian u64 byte length L, L bytes of
// UTF-8 JSON metadata, then rows*cols little-endian IEEE-754 doubles in
// row-major order.

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include <json.hpp>

#include "idt/processes.hpp"

namespace idt {

void write_csv(const PathEnsemble& e, std::ostream& os);
PathEnsemble read_csv(std::istream& is);

void write_binary(const PathEnsemble& e, std::ostream& os);
PathEnsemble read_binary(std::istream& is);

nlohmann::json ensemble_metadata(const PathEnsemble& e);
nlohmann::json read_binary_metadata(std::istream& is);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace idt
