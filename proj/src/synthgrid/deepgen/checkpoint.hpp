#pragma once

#include <filesystem>
#include <string>

#include "synthgrid/deepgen/models.hpp"
#include "synthgrid/deepgen/train.hpp"

namespace synthgrid::deepgen {

// Directory with `manifest.json` and `weights.bin` (float32 little-endian
// tensors concatenated in manifest order).
void save_checkpoint(const VaeGanModel& model, const TrainConfig& config, const std::filesystem::path& dir);
void save_checkpoint(const VanillaGanModel& model, const TrainConfig& config, const std::filesystem::path& dir);

// "vaegan" or "gan".
std::string checkpoint_model_type(const std::filesystem::path& dir);
// Training configuration recorded in the manifest.
TrainConfig checkpoint_config(const std::filesystem::path& dir);
VaeGanModel load_vaegan(const std::filesystem::path& dir);
VanillaGanModel load_vanilla_gan(const std::filesystem::path& dir);

}  // namespace synthgrid::deepgen
