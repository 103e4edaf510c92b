#include "synthgrid/deepgen/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <json.hpp>

#include "synthgrid/common/error.hpp"

namespace synthgrid::deepgen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kFormat = "synthgrid-checkpoint-1";

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kNone: return "none";
    case Activation::kTanh: return "tanh";
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "none";
}

Activation parse_activation(const std::string& s) {
  if (s == "none") return Activation::kNone;
  if (s == "tanh") return Activation::kTanh;
  if (s == "leaky_relu") return Activation::kLeakyRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw SchemaError("unknown activation '" + s + "'");
}

ordered_json arch_json(const ArchConfig& a) {
  return {{"seq_len", a.seq_len},
          {"latent_channels", a.latent_channels},
          {"hidden_channels", a.hidden_channels},
          {"dilations", a.dilations},
          {"kernel_size", 2},
          {"hidden_activation", activation_name(a.hidden_activation)},
          {"discriminator_activation", activation_name(a.discriminator_activation)},
          {"leaky_slope", a.leaky_slope},
          {"receptive_field", a.receptive_field()}};
}

ArchConfig arch_from_json(const json& j) {
  ArchConfig a;
  a.seq_len = j.at("seq_len").get<std::size_t>();
  a.latent_channels = j.at("latent_channels").get<std::size_t>();
  a.hidden_channels = j.at("hidden_channels").get<std::size_t>();
  a.dilations = j.at("dilations").get<std::vector<std::size_t>>();
  a.hidden_activation = parse_activation(j.at("hidden_activation").get<std::string>());
  a.discriminator_activation = parse_activation(j.at("discriminator_activation").get<std::string>());
  a.leaky_slope = j.at("leaky_slope").get<double>();
  return a;
}

void write_le_float(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  const unsigned char b[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                              static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

double read_le_float(const unsigned char* b) {
  const std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
                             (std::uint32_t(b[3]) << 24);
  return static_cast<double>(std::bit_cast<float>(bits));
}

void write_atomically(const fs::path& target, const std::string& bytes) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot replace " + target.string() + ": " + ec.message());
}

void save(const std::string& model_type, const ArchConfig& arch, const ModelMeta& meta, const NamedParams& params,
          const TrainConfig& config, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());

  std::ostringstream blob;
  ordered_json tensors = ordered_json::array();
  std::size_t offset = 0;
  for (const auto& [name, v] : params) {
    for (double x : v->value) {
      if (!std::isfinite(x)) throw NumericError("parameter " + name + " is not finite");
      write_le_float(blob, x);
    }
    tensors.push_back({{"name", name},
                       {"shape", {v->shape.b, v->shape.t, v->shape.c}},
                       {"offset", offset},
                       {"count", v->value.size()}});
    offset += v->value.size() * 4;
  }

  ordered_json m;
  m["format"] = kFormat;
  m["model_type"] = model_type;
  m["channel"] = std::string(to_string(meta.channel));
  if (meta.normalization)
    m["normalization"] = {{"min", meta.normalization->min}, {"max", meta.normalization->max}};
  else
    m["normalization"] = nullptr;
  m["architecture"] = arch_json(arch);
  m["seed"] = meta.seed;
  m["epoch"] = meta.epochs_completed;
  m["config"] = to_json(config);
  m["dtype"] = "float32-le";
  m["tensors"] = tensors;
  ordered_json hist = ordered_json::object();
  for (const auto& [name, curve] : meta.history) hist[name] = curve;
  m["loss_history"] = hist;

  write_atomically(dir / "weights.bin", blob.str());
  write_atomically(dir / "manifest.json", m.dump(2) + "\n");
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError("manifest.json: " + std::string(e.what()));
  }
  if (m.value("format", std::string()) != kFormat) throw SchemaError("not a synthgrid checkpoint: " + dir.string());
  return m;
}

// Fills `params` (already shaped from the architecture) from weights.bin.
void load_weights(const json& m, const fs::path& dir, const NamedParams& params, ModelMeta& meta) {
  std::ifstream in(dir / "weights.bin", std::ios::binary);
  if (!in) throw IoError("cannot open " + (dir / "weights.bin").string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto& tensors = m.at("tensors");
  if (tensors.size() != params.size())
    throw SchemaError("checkpoint has " + std::to_string(tensors.size()) + " tensors, architecture expects " +
                      std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = tensors[i];
    const auto& [name, v] = params[i];
    if (t.at("name").get<std::string>() != name)
      throw SchemaError("tensor " + std::to_string(i) + " is '" + t.at("name").get<std::string>() + "', expected '" +
                        name + "'");
    const auto shape = t.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 3 || Shape{shape[0], shape[1], shape[2]} != v->shape)
      throw SchemaError("tensor '" + name + "' has the wrong shape");
    const auto offset = t.at("offset").get<std::size_t>();
    const auto count = t.at("count").get<std::size_t>();
    if (count != v->value.size() || offset + 4 * count > bytes.size())
      throw SchemaError("tensor '" + name + "' lies outside weights.bin");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + offset;
    for (std::size_t k = 0; k < count; ++k) v->value[k] = read_le_float(p + 4 * k);
  }
  meta.channel = parse_channel(m.at("channel").get<std::string>());
  if (m.contains("normalization") && !m["normalization"].is_null())
    meta.normalization =
        NormalizationRecord{m["normalization"].at("min").get<double>(), m["normalization"].at("max").get<double>()};
  meta.seed = m.at("seed").get<std::uint64_t>();
  meta.epochs_completed = m.at("epoch").get<int>();
  meta.history.clear();
  if (m.contains("loss_history"))
    for (const auto& [name, curve] : m["loss_history"].items()) meta.history[name] = curve.get<std::vector<double>>();
}

template <typename Model>
Model load_as(const fs::path& dir, const std::string& expected) {
  const json m = read_manifest(dir);
  try {
    const auto type = m.at("model_type").get<std::string>();
    if (type != expected) throw SchemaError("checkpoint holds a '" + type + "' model, expected '" + expected + "'");
    Model model = Model::create(arch_from_json(m.at("architecture")), 0);
    load_weights(m, dir, model.named_parameters(), model.meta);
    return model;
  } catch (const json::exception& e) {
    throw SchemaError("manifest.json: " + std::string(e.what()));
  }
}

}  // namespace

void save_checkpoint(const VaeGanModel& model, const TrainConfig& config, const fs::path& dir) {
  save("vaegan", model.arch, model.meta, model.named_parameters(), config, dir);
}

void save_checkpoint(const VanillaGanModel& model, const TrainConfig& config, const fs::path& dir) {
  save("gan", model.arch, model.meta, model.named_parameters(), config, dir);
}

std::string checkpoint_model_type(const fs::path& dir) {
  const json m = read_manifest(dir);
  if (!m.contains("model_type") || !m["model_type"].is_string()) throw SchemaError("manifest lacks model_type");
  return m["model_type"].get<std::string>();
}

TrainConfig checkpoint_config(const fs::path& dir) {
  const json m = read_manifest(dir);
  if (!m.contains("config")) throw SchemaError("manifest lacks config");
  return train_config_from_json(m["config"]);
}

VaeGanModel load_vaegan(const fs::path& dir) { return load_as<VaeGanModel>(dir, "vaegan"); }
VanillaGanModel load_vanilla_gan(const fs::path& dir) { return load_as<VanillaGanModel>(dir, "gan"); }

}  // namespace synthgrid::deepgen
