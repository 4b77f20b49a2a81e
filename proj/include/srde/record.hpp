#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "srde/solver.hpp"

namespace srde {

/// Binary path record, little-endian. Layout in docs/path-record.md.
inline constexpr std::uint32_t kPathRecordVersion = 1;

void write_path_record(std::ostream& os, const PathRecord& rec);
void write_path_record(const std::string& path, const PathRecord& rec);
PathRecord read_path_record(std::istream& is);
PathRecord read_path_record(const std::string& path);

}  // namespace srde
