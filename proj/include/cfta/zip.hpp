#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace cfta {

// Minimal ZIP support for GTFS archives: stored and deflated members, no
// ZIP64, no encryption. Member names are returned without directory prefix.
std::map<std::string, std::string> read_zip(std::filesystem::path const&);

// Writes deflated members with a fixed 1980-01-01 timestamp so archives of
// equal content are byte-identical.
void write_zip(std::filesystem::path const&,
               std::map<std::string, std::string> const& members);

}  // namespace cfta
