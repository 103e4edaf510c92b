#include "synthgrid/deepgen/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthgrid/common/error.hpp"
#include "synthgrid/deepgen/checkpoint.hpp"
#include "synthgrid/deepgen/losses.hpp"

namespace synthgrid::deepgen {
namespace {

constexpr std::uint64_t kTrainStream = 0x9E3779B97F4A7C15ULL;

const std::vector<std::string> kVaeGanCurves = {"L_prior", "L_supervisor", "L_E",        "L_reconstr",
                                                "L_dG",    "L_generator",  "L_D_real",   "L_D_fake",
                                                "L_D_noise", "L_D"};
const std::vector<std::string> kGanCurves = {"L_G", "L_D"};

void require_trainable(const DailyProfileSet& train, const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw ParameterError("training set is empty");
  if (!train.normalized()) throw ContractError("deep models train on a normalized profile set");
  for (double v : train.values())
    if (!std::isfinite(v)) throw ContractError("training set contains non-finite values");
}

bool finite(const Var& v) { return std::isfinite(v->scalar()); }

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch)));
  return out;
}

template <typename Model>
[[noreturn]] void diverged(Model& model, const NamedParams& params, const std::vector<std::vector<double>>& good,
                          const TrainConfig& config, const TrainOptions& options, int epoch, const std::string& why) {
  restore(params, good);
  std::string msg = "training diverged in epoch " + std::to_string(epoch + 1) + " (" + why + ")";
  if (options.checkpoint_dir) {
    save_checkpoint(model, config, *options.checkpoint_dir);
    msg += "; last good checkpoint (epoch " + std::to_string(model.meta.epochs_completed) + ") kept in " +
           options.checkpoint_dir->string();
  }
  throw NumericError(msg);
}

}  // namespace

void TrainConfig::validate() const {
  if (model_type != "vaegan" && model_type != "gan")
    throw ParameterError("model_type must be 'vaegan' or 'gan', got '" + model_type + "'");
  if (latent_channels == 0 || hidden_channels == 0) throw ParameterError("channel widths must be positive");
  if (batch_size == 0) throw ParameterError("batch_size must be positive");
  if (epochs <= 0) throw ParameterError("epochs must be positive");
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ParameterError("Adam betas must lie in [0,1)");
}

ArchConfig TrainConfig::arch() const {
  ArchConfig a;
  a.latent_channels = latent_channels;
  a.hidden_channels = hidden_channels;
  return a;
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  return {{"model_type", c.model_type},       {"latent_channels", c.latent_channels},
          {"hidden_channels", c.hidden_channels}, {"batch_size", c.batch_size},
          {"epochs", c.epochs},               {"learning_rate", c.learning_rate},
          {"beta1", c.beta1},                 {"beta2", c.beta2},
          {"seed", c.seed},                   {"saturating_generator_loss", c.saturating_generator_loss}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (!j.is_object()) throw SchemaError("training config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "model_type") c.model_type = value.get<std::string>();
      else if (key == "latent_channels") c.latent_channels = value.get<std::size_t>();
      else if (key == "hidden_channels") c.hidden_channels = value.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "saturating_generator_loss") c.saturating_generator_loss = value.get<bool>();
      else throw SchemaError("unknown training config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

VaeGanModel train_vaegan(const DailyProfileSet& train, const TrainConfig& config, const TrainOptions& options) {
  require_trainable(train, config);
  VaeGanModel model = VaeGanModel::create(config.arch(), config.seed);
  model.meta.channel = train.channel();
  model.meta.normalization = train.normalization();
  for (const auto& name : kVaeGanCurves) model.meta.history[name];

  NamedParams enc, sup, gen, disc;
  model.encoder.collect(enc);
  model.supervisor.collect(sup);
  model.generator.collect(gen);
  model.discriminator.collect(disc);
  std::vector<Var> enc_sup = params_of(enc);
  for (const auto& p : params_of(sup)) enc_sup.push_back(p);
  std::vector<Var> gen_enc = params_of(gen);
  for (const auto& p : params_of(enc)) gen_enc.push_back(p);
  const NamedParams all = model.named_parameters();
  const std::vector<Var> all_vars = params_of(all);

  Adam opt_e(enc_sup, config.learning_rate, config.beta1, config.beta2);
  Adam opt_g(gen_enc, config.learning_rate, config.beta1, config.beta2);
  Adam opt_d(params_of(disc), config.learning_rate, config.beta1, config.beta2);

  Rng rng(config.seed ^ kTrainStream);
  const std::size_t L = model.arch.latent_channels;
  auto good = snapshot(all);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::map<std::string, double> sums;
    std::size_t batches = 0;
    try {
      for (const auto& rows : epoch_batches(train.days(), config.batch_size, rng)) {
        const auto batch = SequenceBatch::from_rows(train, rows);
        const Var x = batch.as_var();
        const Shape zshape{batch.batch, batch.steps, L};

        zero_grad(all_vars);
        const auto e = encoder_loss(model, x, gaussian(zshape, rng));
        if (!finite(e.total)) diverged(model, all, good, config, options, epoch, "L_E is not finite");
        backward(e.total);
        opt_e.step();

        zero_grad(all_vars);
        const auto g = generator_loss(model, x, gaussian(zshape, rng));
        if (!finite(g.total)) diverged(model, all, good, config, options, epoch, "L_generator is not finite");
        backward(g.total);
        opt_g.step();

        zero_grad(all_vars);
        const auto d = discriminator_loss(model.discriminator, x, g.fake, gaussian(x->shape, rng));
        if (!finite(d.total)) diverged(model, all, good, config, options, epoch, "L_D is not finite");
        backward(d.total);
        opt_d.step();

        sums["L_prior"] += g.prior->scalar();
        sums["L_supervisor"] += e.supervisor->scalar();
        sums["L_E"] += e.total->scalar();
        sums["L_reconstr"] += g.reconstr->scalar();
        sums["L_dG"] += g.adversarial->scalar();
        sums["L_generator"] += g.total->scalar();
        sums["L_D_real"] += d.real->scalar();
        sums["L_D_fake"] += d.fake->scalar();
        sums["L_D_noise"] += d.noise->scalar();
        sums["L_D"] += d.total->scalar();
        ++batches;
      }
    } catch (const NumericError& err) {
      if (std::string(err.what()).rfind("training diverged", 0) == 0) throw;
      diverged(model, all, good, config, options, epoch, err.what());
    }
    for (const auto& name : kVaeGanCurves)
      model.meta.history[name].push_back(sums[name] / static_cast<double>(batches));
    model.meta.epochs_completed = epoch + 1;
    good = snapshot(all);
    if (options.checkpoint_dir) save_checkpoint(model, config, *options.checkpoint_dir);
    if (options.on_epoch) options.on_epoch(epoch + 1, model.meta.history);
  }
  round_to_float(all);
  if (options.checkpoint_dir) save_checkpoint(model, config, *options.checkpoint_dir);
  return model;
}

VanillaGanModel train_vanilla_gan(const DailyProfileSet& train, const TrainConfig& config,
                                  const TrainOptions& options) {
  require_trainable(train, config);
  VanillaGanModel model = VanillaGanModel::create(config.arch(), config.seed);
  model.meta.channel = train.channel();
  model.meta.normalization = train.normalization();
  for (const auto& name : kGanCurves) model.meta.history[name];

  NamedParams gen, disc;
  model.generator.collect(gen);
  model.discriminator.collect(disc);
  const NamedParams all = model.named_parameters();
  const std::vector<Var> all_vars = params_of(all);
  Adam opt_g(params_of(gen), config.learning_rate, config.beta1, config.beta2);
  Adam opt_d(params_of(disc), config.learning_rate, config.beta1, config.beta2);

  Rng rng(config.seed ^ kTrainStream);
  const std::size_t L = model.arch.latent_channels;
  auto good = snapshot(all);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double sum_g = 0.0, sum_d = 0.0;
    std::size_t batches = 0;
    try {
      for (const auto& rows : epoch_batches(train.days(), config.batch_size, rng)) {
        const auto batch = SequenceBatch::from_rows(train, rows);
        const Var x = batch.as_var();
        const Var noise = gaussian({batch.batch, batch.steps, L}, rng);

        zero_grad(all_vars);
        Var fake;
        const Var lg = vanilla_generator_loss(model, noise, config.saturating_generator_loss, &fake);
        if (!finite(lg)) diverged(model, all, good, config, options, epoch, "generator loss is not finite");
        backward(lg);
        opt_g.step();

        zero_grad(all_vars);
        const Var ld = vanilla_discriminator_loss(model, x, fake);
        if (!finite(ld)) diverged(model, all, good, config, options, epoch, "discriminator loss is not finite");
        backward(ld);
        opt_d.step();

        sum_g += lg->scalar();
        sum_d += ld->scalar();
        ++batches;
      }
    } catch (const NumericError& err) {
      if (std::string(err.what()).rfind("training diverged", 0) == 0) throw;
      diverged(model, all, good, config, options, epoch, err.what());
    }
    model.meta.history["L_G"].push_back(sum_g / static_cast<double>(batches));
    model.meta.history["L_D"].push_back(sum_d / static_cast<double>(batches));
    model.meta.epochs_completed = epoch + 1;
    good = snapshot(all);
    if (options.checkpoint_dir) save_checkpoint(model, config, *options.checkpoint_dir);
    if (options.on_epoch) options.on_epoch(epoch + 1, model.meta.history);
  }
  round_to_float(all);
  if (options.checkpoint_dir) save_checkpoint(model, config, *options.checkpoint_dir);
  return model;
}

}  // namespace synthgrid::deepgen
