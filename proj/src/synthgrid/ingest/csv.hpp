#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace synthgrid::ingest {

// RFC-4180-ish field splitting: commas, double-quoted fields, "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

// Strict decimal parse of the whole field; false on trailing garbage.
bool parse_double(std::string_view field, double& out);

std::string_view trim(std::string_view s);

}  // namespace synthgrid::ingest
