#pragma once

#include <filesystem>
#include <optional>

#include "synthgrid/ingest/types.hpp"

namespace synthgrid::ingest {

// Day matrix CSV (no header, one day per row, 96 columns) plus a sidecar
// `<stem>.json` holding channel, dates and the normalization record.
void save_profile_set(const DailyProfileSet& set, const std::filesystem::path& csv_path);

// Reads the sidecar when present; otherwise `fallback_channel` is required.
DailyProfileSet load_profile_set(const std::filesystem::path& csv_path,
                                 std::optional<Channel> fallback_channel = std::nullopt);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace synthgrid::ingest
