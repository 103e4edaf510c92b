#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace synthgrid::cli {

namespace fs = std::filesystem;

inline const std::vector<std::string> kChannelNames = {"load", "pv", "ev"};
inline const std::vector<std::string> kModelNames = {"gmm", "gan", "vaegan"};

// Stable ordinals for deriving per-module seeds as global_seed + ordinal.
enum class SeedOrdinal : std::uint64_t { kIngest = 0, kGmm = 1, kGan = 2, kVaeGan = 3, kGenerate = 4, kHems = 5 };

inline std::uint64_t derive_seed(std::uint64_t global, SeedOrdinal ordinal) {
  return global + static_cast<std::uint64_t>(ordinal);
}

int channel_code(const std::string& name);

struct ChannelSource {
  std::string format = "power";  // "power" (timestamp,power CSV) or "sessions" (EV sessions)
  fs::path path;
  std::string timestamp_column = "timestamp";
  std::string power_column = "power_w";
  double level_kw = 3.6;

  static ChannelSource sessions() {
    ChannelSource s;
    s.format = "sessions";
    return s;
  }
  bool operator==(const ChannelSource&) const = default;
};

struct HemsSection {
  nlohmann::ordered_json env = nlohmann::ordered_json::object();  // forwarded to the HEMS module
  std::optional<fs::path> prices;
  int runs = 10;
  std::string train_source = "real";  // "real" or a model name

  bool operator==(const HemsSection&) const = default;
};

struct RunConfig {
  fs::path output_dir = "run";
  std::uint64_t seed = 0;
  std::vector<std::string> channels = kChannelNames;
  double split_ratio = 0.8;
  ChannelSource load, pv, ev = ChannelSource::sessions();
  nlohmann::ordered_json gmm = nlohmann::ordered_json::object();
  nlohmann::ordered_json gan = nlohmann::ordered_json::object();
  nlohmann::ordered_json vaegan = nlohmann::ordered_json::object();
  std::optional<std::int64_t> generate_days;
  nlohmann::ordered_json evaluate = nlohmann::ordered_json::object();
  HemsSection hems;

  const ChannelSource& source(const std::string& channel) const;
  // Module config with the derived seed filled in unless the file fixed one.
  nlohmann::ordered_json model_config(const std::string& model) const;
  nlohmann::ordered_json hems_env() const { return hems.env; }

  bool operator==(const RunConfig&) const = default;
};

// Relative paths resolve against `base_dir`. Throws CliError(kExitUsage).
RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir);
nlohmann::ordered_json to_json(const RunConfig& c);
RunConfig load_run_config(const fs::path& path);

// Structural and module-level checks; every referenced input path must exist.
void validate(const RunConfig& c);

}  // namespace synthgrid::cli
