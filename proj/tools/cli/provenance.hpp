#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

namespace synthgrid::cli {

std::string sha256_file(const std::filesystem::path& path);

// ISO-8601 UTC; SOURCE_DATE_EPOCH, when set, replaces the wall clock.
std::string utc_timestamp();

// Writes text through a temporary file and a rename.
void write_text_atomically(const std::filesystem::path& path, const std::string& text);

struct CommandRecord {
  std::string command;
  nlohmann::ordered_json arguments = nlohmann::ordered_json::object();
  std::string started_at;
  std::vector<std::filesystem::path> artifacts;  // absolute paths under the run root
};

// Appends one command entry (with artifact hashes) to <root>/run.json and
// refreshes its config copy.
void record_command(const std::filesystem::path& root, const nlohmann::ordered_json& config,
                    const CommandRecord& record);

}  // namespace synthgrid::cli
