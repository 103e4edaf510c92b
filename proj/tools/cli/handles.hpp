#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "synthgrid/synthgrid.h"

namespace synthgrid::cli {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2, kExitClobber = 3 };

class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string& msg) : std::runtime_error(msg), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

inline void check(sg_status status, const std::string& what, int exit_code = kExitRuntime) {
  if (status != SG_OK) throw CliError(exit_code, what + ": " + sg_last_error());
}

struct SetDeleter {
  void operator()(sg_profile_set* p) const { sg_profile_set_free(p); }
};
struct GmmDeleter {
  void operator()(sg_gmm* p) const { sg_gmm_free(p); }
};
struct DeepDeleter {
  void operator()(sg_deep_model* p) const { sg_deep_free(p); }
};
struct HemsDeleter {
  void operator()(sg_hems_result* p) const { sg_hems_result_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { sg_string_free(p); }
};

using ProfileSet = std::unique_ptr<sg_profile_set, SetDeleter>;
using Gmm = std::unique_ptr<sg_gmm, GmmDeleter>;
using DeepModel = std::unique_ptr<sg_deep_model, DeepDeleter>;
using HemsResult = std::unique_ptr<sg_hems_result, HemsDeleter>;

inline std::string take_string(char* s) {
  std::unique_ptr<char, StringDeleter> owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

}  // namespace synthgrid::cli
