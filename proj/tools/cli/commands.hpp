#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace synthgrid::cli {

struct Invocation {
  std::string command;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  bool force = false;
  std::optional<int> runs;
  std::optional<std::string> model;
  std::optional<std::string> channel;
  std::optional<std::int64_t> n_days;
  std::optional<std::string> train_source;
  std::optional<std::filesystem::path> real;
  std::optional<std::filesystem::path> synth;
};

// Executes one command and returns its exit code; diagnostics go to `err`.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace synthgrid::cli
