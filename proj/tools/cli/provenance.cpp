#include "cli/provenance.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>

#include "cli/handles.hpp"

namespace synthgrid::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitRuntime, "cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw CliError(kExitRuntime, "sha256 initialisation failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) t = static_cast<std::time_t>(std::atoll(sde));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char out[32];
  std::strftime(out, sizeof out, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return out;
}

void write_text_atomically(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw CliError(kExitRuntime, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void record_command(const fs::path& root, const ordered_json& config, const CommandRecord& record) {
  const fs::path file = root / "run.json";
  ordered_json run = {{"tool", "synthgrid"}, {"version", sg_version()}, {"commands", ordered_json::array()}};
  if (std::ifstream in(file); in) {
    try {
      auto previous = ordered_json::parse(in);
      if (previous.contains("commands") && previous["commands"].is_array()) run["commands"] = previous["commands"];
    } catch (const nlohmann::json::exception&) {
      // unreadable history is dropped
    }
  }
  run["config"] = config;
  ordered_json artifacts = ordered_json::object();
  for (const auto& p : record.artifacts) artifacts[fs::relative(p, root).generic_string()] = sha256_file(p);
  run["commands"].push_back({{"command", record.command},
                             {"arguments", record.arguments},
                             {"started_at", record.started_at},
                             {"finished_at", utc_timestamp()},
                             {"artifacts", artifacts}});
  write_text_atomically(file, run.dump(2) + "\n");
}

}  // namespace synthgrid::cli
