#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthgrid/deepgen/layers.hpp"
#include "synthgrid/ingest/types.hpp"

namespace synthgrid::deepgen {

// Network dimensions shared by every module of one model.
struct ArchConfig {
  std::size_t seq_len = kStepsPerDay;
  std::size_t latent_channels = 8;
  std::size_t hidden_channels = 32;
  std::vector<std::size_t> dilations = {1, 2, 4, 8, 16};
  Activation hidden_activation = Activation::kTanh;
  Activation discriminator_activation = Activation::kLeakyRelu;
  double leaky_slope = 0.2;

  // 1 + sum of dilations for kernel-size-2 layers.
  std::size_t receptive_field() const;
};

// B sequences x T steps x 1 channel.
struct SequenceBatch {
  std::size_t batch = 0;
  std::size_t steps = kStepsPerDay;
  std::vector<double> values;

  static SequenceBatch from_rows(const DailyProfileSet& set, std::span<const std::size_t> rows);
  Var as_var() const;
};

struct LatentCode {
  Shape shape;
  std::vector<double> mean;
  std::vector<double> log_variance;
  std::vector<double> z;
  std::vector<double> z_next;  // supervisor prediction, same shape as z
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(const ArchConfig& arch, Rng& rng);

  struct Output {
    Var mean, log_variance, z;
  };
  // z = mean + exp(0.5 log_variance) * eps. Throws NumericError naming the
  // first layer with a non-finite activation.
  Output forward(const Var& x, const Var& eps) const;
  void collect(NamedParams& out) const;

  std::vector<ConvLayer> stack;
  ConvLayer mean_head, logvar_head;
  Activation activation = Activation::kTanh;
};

// One causal conv predicting the latent one step ahead.
class Supervisor {
 public:
  Supervisor() = default;
  Supervisor(const ArchConfig& arch, Rng& rng);
  Var forward(const Var& z) const { return conv.forward(z); }
  void collect(NamedParams& out) const;

  ConvLayer conv;
};

// Dilated stack decoding [B,T,L] latents to [B,T,1] values in (0,1).
// A learned per-step bias gives the stack its time-of-day position.
class Generator {
 public:
  Generator() = default;
  Generator(const ArchConfig& arch, Rng& rng);
  Var forward(const Var& z) const;
  void collect(NamedParams& out) const;

  std::vector<ConvLayer> stack;
  Var time_bias;
  ConvLayer head;
  Activation activation = Activation::kTanh;
};

// Dilated stack pooled over time to one probability per sequence, [B,1,1].
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(const ArchConfig& arch, Rng& rng);
  Var forward(const Var& x) const;
  void collect(NamedParams& out) const;

  std::vector<ConvLayer> stack;
  ConvLayer head;
  Var readout_weight, readout_bias;
  Activation activation = Activation::kLeakyRelu;
  double leaky_slope = 0.2;
};

// Per-epoch mean of every loss term, keyed by loss name.
using LossHistory = std::map<std::string, std::vector<double>>;

struct ModelMeta {
  Channel channel = Channel::kLoad;
  std::optional<NormalizationRecord> normalization;
  std::uint64_t seed = 0;
  int epochs_completed = 0;
  LossHistory history;
};

struct VaeGanModel {
  ArchConfig arch;
  Encoder encoder;
  Supervisor supervisor;
  Generator generator;
  Discriminator discriminator;
  ModelMeta meta;

  static VaeGanModel create(const ArchConfig& arch, std::uint64_t init_seed);
  NamedParams named_parameters() const;
};

struct VanillaGanModel {
  ArchConfig arch;
  Generator generator;
  Discriminator discriminator;
  ModelMeta meta;

  static VanillaGanModel create(const ArchConfig& arch, std::uint64_t init_seed);
  NamedParams named_parameters() const;
};

// Standard-normal tensor drawn from `rng`.
Var gaussian(Shape shape, Rng& rng);

LatentCode encode(const VaeGanModel& model, const SequenceBatch& x, std::uint64_t noise_seed);

// Rows decoded from N(0,1) latents, clipped to [0,1], normalized space.
DailyProfileSet generate_vaegan(const VaeGanModel& model, std::int64_t n_days, std::uint64_t seed);
DailyProfileSet generate_gan(const VanillaGanModel& model, std::int64_t n_days, std::uint64_t seed);

// Parameter values copied out / restored, for last-good snapshots.
std::vector<std::vector<double>> snapshot(const NamedParams& params);
void restore(const NamedParams& params, const std::vector<std::vector<double>>& values);
// Rounds every parameter to float32 precision (the checkpoint format).
void round_to_float(const NamedParams& params);
// Deep copy with fresh parameter nodes.
VaeGanModel clone(const VaeGanModel& m);
VanillaGanModel clone(const VanillaGanModel& m);

}  // namespace synthgrid::deepgen
