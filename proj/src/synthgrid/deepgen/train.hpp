#pragma once

#include <filesystem>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>

#include "synthgrid/deepgen/models.hpp"

namespace synthgrid::deepgen {

struct TrainConfig {
  std::string model_type = "vaegan";  // vaegan | gan
  std::size_t latent_channels = 8;
  std::size_t hidden_channels = 32;
  std::size_t batch_size = 32;
  int epochs = 500;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  // Vanilla GAN only: minimize ln(1 - D(G(z))) instead of -ln D(G(z)).
  bool saturating_generator_loss = false;

  void validate() const;
  ArchConfig arch() const;
};

nlohmann::ordered_json to_json(const TrainConfig& c);
// Unknown keys are rejected; missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);

struct TrainOptions {
  // Checkpoint rewritten after every epoch when set.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(int epoch, const LossHistory&)> on_epoch;
};

// Per batch: (1) encoder + supervisor on L_E, (2) generator + encoder on
// L_generator, (3) discriminator on L_D. Throws NumericError on divergence
// after restoring (and checkpointing) the last finite epoch.
VaeGanModel train_vaegan(const DailyProfileSet& train, const TrainConfig& config, const TrainOptions& options = {});
VanillaGanModel train_vanilla_gan(const DailyProfileSet& train, const TrainConfig& config,
                                  const TrainOptions& options = {});

}  // namespace synthgrid::deepgen
