#include "cli/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "cli/handles.hpp"

namespace synthgrid::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void usage(const std::string& msg) { throw CliError(kExitUsage, "config: " + msg); }

class Section {
 public:
  Section(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) usage(context_ + " must be an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_[key].is_null()) return;
    try {
      out = j_[key].get<T>();
    } catch (const json::exception&) {
      usage(context_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_[key].is_null()) return nullptr;
    return &j_[key];
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) usage("unknown key " + context_ + "." + key);
  }

 private:
  const json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path.lexically_normal() : (base / path).lexically_normal();
}

ChannelSource read_source(const json& j, const std::string& name, ChannelSource src, const fs::path& base) {
  Section s(j, "data." + name);
  std::string path;
  s.read("format", src.format);
  s.read("path", path);
  s.read("timestamp_column", src.timestamp_column);
  s.read("power_column", src.power_column);
  s.read("level_kw", src.level_kw);
  s.finish();
  if (path.empty()) usage("data." + name + ".path is required");
  src.path = resolve(base, path);
  return src;
}

ordered_json source_json(const ChannelSource& s) {
  return {{"format", s.format},
          {"path", s.path.string()},
          {"timestamp_column", s.timestamp_column},
          {"power_column", s.power_column},
          {"level_kw", s.level_kw}};
}

ordered_json object_or_empty(const json* j, const std::string& context) {
  if (!j) return ordered_json::object();
  if (!j->is_object()) usage(context + " must be an object");
  return ordered_json::parse(j->dump());
}

void validate_module(const char* kind, const ordered_json& j, const std::string& context) {
  if (sg_config_validate(kind, j.dump().c_str()) != SG_OK) usage(context + ": " + sg_last_error());
}

void require_file(const fs::path& p, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) usage(what + " not found: " + p.string());
}

}  // namespace

int channel_code(const std::string& name) {
  const auto it = std::find(kChannelNames.begin(), kChannelNames.end(), name);
  if (it == kChannelNames.end()) throw CliError(kExitUsage, "unknown channel '" + name + "'");
  return static_cast<int>(it - kChannelNames.begin());
}

const ChannelSource& RunConfig::source(const std::string& channel) const {
  switch (channel_code(channel)) {
    case 0:
      return load;
    case 1:
      return pv;
    default:
      return ev;
  }
}

ordered_json RunConfig::model_config(const std::string& model) const {
  ordered_json j;
  SeedOrdinal ordinal;
  if (model == "gmm") {
    j = gmm;
    ordinal = SeedOrdinal::kGmm;
  } else if (model == "gan") {
    j = gan;
    j["model_type"] = "gan";
    ordinal = SeedOrdinal::kGan;
  } else if (model == "vaegan") {
    j = vaegan;
    j["model_type"] = "vaegan";
    ordinal = SeedOrdinal::kVaeGan;
  } else {
    throw CliError(kExitUsage, "unknown model '" + model + "' (expected gmm, gan or vaegan)");
  }
  if (!j.contains("seed") || j["seed"].is_null()) j["seed"] = derive_seed(seed, ordinal);
  return j;
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  Section top(j, "config");
  std::string out = c.output_dir.string();
  top.read("output_dir", out);
  c.output_dir = resolve(base_dir, out);
  top.read("seed", c.seed);
  top.read("channels", c.channels);

  if (const json* data = top.child("data")) {
    Section s(*data, "data");
    s.read("split_ratio", c.split_ratio);
    if (const json* v = s.child("load")) c.load = read_source(*v, "load", c.load, base_dir);
    if (const json* v = s.child("pv")) c.pv = read_source(*v, "pv", c.pv, base_dir);
    if (const json* v = s.child("ev")) c.ev = read_source(*v, "ev", c.ev, base_dir);
    s.finish();
  }
  c.gmm = object_or_empty(top.child("gmm"), "gmm");
  c.gan = object_or_empty(top.child("gan"), "gan");
  c.vaegan = object_or_empty(top.child("vaegan"), "vaegan");
  if (const json* g = top.child("generate")) {
    Section s(*g, "generate");
    std::int64_t n = 0;
    s.read("n_days", n);
    s.finish();
    if (g->contains("n_days") && !(*g)["n_days"].is_null()) c.generate_days = n;
  }
  c.evaluate = object_or_empty(top.child("evaluate"), "evaluate");
  if (const json* h = top.child("hems")) {
    if (!h->is_object()) usage("hems must be an object");
    ordered_json env = ordered_json::parse(h->dump());
    if (env.contains("prices")) {
      if (!env["prices"].is_null()) {
        if (!env["prices"].is_string()) usage("hems.prices must be a path");
        c.hems.prices = resolve(base_dir, env["prices"].get<std::string>());
      }
      env.erase("prices");
    }
    if (env.contains("runs")) {
      if (!env["runs"].is_number_integer()) usage("hems.runs must be an integer");
      c.hems.runs = env["runs"].get<int>();
      env.erase("runs");
    }
    if (env.contains("train_source")) {
      if (!env["train_source"].is_string()) usage("hems.train_source must be a string");
      c.hems.train_source = env["train_source"].get<std::string>();
      env.erase("train_source");
    }
    c.hems.env = std::move(env);
  }
  top.finish();
  return c;
}

ordered_json to_json(const RunConfig& c) {
  ordered_json hems = c.hems.env;
  hems["prices"] = c.hems.prices ? ordered_json(c.hems.prices->string()) : ordered_json(nullptr);
  hems["runs"] = c.hems.runs;
  hems["train_source"] = c.hems.train_source;
  return {{"output_dir", c.output_dir.string()},
          {"seed", c.seed},
          {"channels", c.channels},
          {"data",
           {{"split_ratio", c.split_ratio},
            {"load", source_json(c.load)},
            {"pv", source_json(c.pv)},
            {"ev", source_json(c.ev)}}},
          {"gmm", c.gmm},
          {"gan", c.gan},
          {"vaegan", c.vaegan},
          {"generate", {{"n_days", c.generate_days ? ordered_json(*c.generate_days) : ordered_json(nullptr)}}},
          {"evaluate", c.evaluate},
          {"hems", hems}};
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) usage("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    usage(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, fs::absolute(path).parent_path());
}

void validate(const RunConfig& c) {
  if (c.channels.empty()) usage("channels must not be empty");
  std::set<std::string> unique;
  for (const auto& ch : c.channels) {
    channel_code(ch);
    if (!unique.insert(ch).second) usage("channel '" + ch + "' listed twice");
  }
  if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) usage("data.split_ratio must lie in (0, 1)");
  for (const auto& ch : c.channels) {
    const auto& src = c.source(ch);
    if (src.format != "power" && src.format != "sessions")
      usage("data." + ch + ".format must be 'power' or 'sessions'");
    if (src.format == "sessions" && !(src.level_kw > 0.0)) usage("data." + ch + ".level_kw must be positive");
    if (src.path.empty()) usage("data." + ch + ".path is required");
    require_file(src.path, "data." + ch + ".path");
  }
  validate_module("gmm", c.model_config("gmm"), "gmm");
  validate_module("deep", c.model_config("gan"), "gan");
  validate_module("deep", c.model_config("vaegan"), "vaegan");
  if (c.generate_days && *c.generate_days <= 0) usage("generate.n_days must be positive");
  if (c.evaluate.contains("model_name")) usage("evaluate.model_name is set per model by the tool");
  validate_module("evaluate", c.evaluate, "evaluate");
  validate_module("hems", c.hems.env, "hems");
  if (c.hems.runs < 1) usage("hems.runs must be at least 1");
  if (c.hems.train_source != "real" &&
      std::find(kModelNames.begin(), kModelNames.end(), c.hems.train_source) == kModelNames.end())
    usage("hems.train_source must be 'real' or a model name");
  if (c.hems.prices) require_file(*c.hems.prices, "hems.prices");
}

}  // namespace synthgrid::cli
