#include "synthgrid/deepgen/models.hpp"

#include <algorithm>
#include <cmath>

#include "synthgrid/common/error.hpp"

namespace synthgrid::deepgen {
namespace {

constexpr std::size_t kTaps = 2;
constexpr std::size_t kGenerateChunk = 64;

std::vector<ConvLayer> make_stack(std::size_t in, std::size_t hidden, const std::vector<std::size_t>& dilations,
                                  Rng& rng) {
  std::vector<ConvLayer> s;
  for (std::size_t i = 0; i < dilations.size(); ++i)
    s.push_back(make_conv(i == 0 ? in : hidden, hidden, kTaps, dilations[i], rng));
  return s;
}

void collect_stack(const std::string& prefix, const std::vector<ConvLayer>& s, NamedParams& out) {
  for (std::size_t i = 0; i < s.size(); ++i) s[i].collect(prefix + "." + std::to_string(i), out);
}

void check_finite(const Var& v, const char* module, std::size_t layer) {
  for (double x : v->value)
    if (!std::isfinite(x))
      throw NumericError(std::string(module) + " layer " + std::to_string(layer) + " produced a non-finite activation");
}

Var copy_param(const Var& v) { return parameter(v->shape, v->value); }

ConvLayer copy_conv(const ConvLayer& c) { return ConvLayer{copy_param(c.weight), copy_param(c.bias), c.dilation}; }

std::vector<ConvLayer> copy_stack(const std::vector<ConvLayer>& s) {
  std::vector<ConvLayer> out;
  for (const auto& c : s) out.push_back(copy_conv(c));
  return out;
}

Generator copy_generator(const Generator& g) {
  Generator out = g;
  out.stack = copy_stack(g.stack);
  out.time_bias = copy_param(g.time_bias);
  out.head = copy_conv(g.head);
  return out;
}

Discriminator copy_discriminator(const Discriminator& d) {
  Discriminator out = d;
  out.stack = copy_stack(d.stack);
  out.head = copy_conv(d.head);
  out.readout_weight = copy_param(d.readout_weight);
  out.readout_bias = copy_param(d.readout_bias);
  return out;
}

DailyProfileSet decode_latents(const Generator& g, const ArchConfig& arch, const ModelMeta& meta, std::int64_t n_days,
                               std::uint64_t seed) {
  if (n_days <= 0) throw ParameterError("number of days to generate must be positive");
  if (arch.seq_len != kStepsPerDay) throw ContractError("model sequence length is not 96");
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n_days) * kStepsPerDay);
  auto remaining = static_cast<std::size_t>(n_days);
  while (remaining > 0) {
    const std::size_t b = std::min(remaining, kGenerateChunk);
    const Var x = g.forward(gaussian({b, arch.seq_len, arch.latent_channels}, rng));
    for (double v : x->value) values.push_back(std::clamp(v, 0.0, 1.0));
    remaining -= b;
  }
  DailyProfileSet set(meta.channel, std::move(values));
  set.set_normalization(meta.normalization, true);
  return set;
}

}  // namespace

std::size_t ArchConfig::receptive_field() const {
  std::size_t f = 1;
  for (auto d : dilations) f += (kTaps - 1) * d;
  return f;
}

SequenceBatch SequenceBatch::from_rows(const DailyProfileSet& set, std::span<const std::size_t> rows) {
  SequenceBatch b;
  b.batch = rows.size();
  b.steps = kStepsPerDay;
  b.values.reserve(rows.size() * kStepsPerDay);
  for (auto r : rows) {
    const auto row = set.row(r);
    b.values.insert(b.values.end(), row.begin(), row.end());
  }
  return b;
}

Var SequenceBatch::as_var() const {
  for (double v : values)
    if (!std::isfinite(v)) throw ContractError("sequence batch contains non-finite values");
  return constant({batch, steps, 1}, values);
}

Encoder::Encoder(const ArchConfig& arch, Rng& rng)
    : stack(make_stack(1, arch.hidden_channels, arch.dilations, rng)),
      mean_head(make_conv(arch.hidden_channels, arch.latent_channels, 1, 1, rng)),
      logvar_head(make_conv(arch.hidden_channels, arch.latent_channels, 1, 1, rng)),
      activation(arch.hidden_activation) {}

Encoder::Output Encoder::forward(const Var& x, const Var& eps) const {
  Var h = x;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    h = activate(stack[i].forward(h), activation);
    check_finite(h, "encoder", i);
  }
  Output o;
  o.mean = mean_head.forward(h);
  o.log_variance = logvar_head.forward(h);
  check_finite(o.mean, "encoder", stack.size());
  check_finite(o.log_variance, "encoder", stack.size());
  if (!(eps->shape == o.mean->shape)) throw ContractError("reparameterization noise has the wrong shape");
  o.z = add(o.mean, mul(exp(scale(o.log_variance, 0.5)), eps));
  return o;
}

void Encoder::collect(NamedParams& out) const {
  collect_stack("encoder", stack, out);
  mean_head.collect("encoder.mean", out);
  logvar_head.collect("encoder.logvar", out);
}

Supervisor::Supervisor(const ArchConfig& arch, Rng& rng)
    : conv(make_conv(arch.latent_channels, arch.latent_channels, kTaps, 1, rng)) {}

void Supervisor::collect(NamedParams& out) const { conv.collect("supervisor.0", out); }

Generator::Generator(const ArchConfig& arch, Rng& rng)
    : stack(make_stack(arch.latent_channels, arch.hidden_channels, arch.dilations, rng)),
      time_bias(parameter({1, arch.seq_len, arch.hidden_channels},
                          std::vector<double>(arch.seq_len * arch.hidden_channels, 0.0))),
      head(make_conv(arch.hidden_channels, 1, 1, 1, rng)),
      activation(arch.hidden_activation) {}

Var Generator::forward(const Var& z) const {
  Var h = z;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    h = stack[i].forward(h);
    if (i == 0) h = add_time_bias(h, time_bias);
    h = activate(h, activation);
  }
  return sigmoid(head.forward(h));
}

void Generator::collect(NamedParams& out) const {
  collect_stack("generator", stack, out);
  out.emplace_back("generator.time_bias", time_bias);
  head.collect("generator.head", out);
}

Discriminator::Discriminator(const ArchConfig& arch, Rng& rng)
    : stack(make_stack(1, arch.hidden_channels, arch.dilations, rng)),
      head(make_conv(arch.hidden_channels, 1, 1, 1, rng)),
      activation(arch.discriminator_activation),
      leaky_slope(arch.leaky_slope) {
  const double limit = std::sqrt(6.0 / static_cast<double>(arch.seq_len + 1));
  std::uniform_real_distribution<double> u(-limit, limit);
  std::vector<double> w(arch.seq_len);
  for (double& v : w) v = u(rng);
  readout_weight = parameter({1, arch.seq_len, 1}, std::move(w));
  readout_bias = parameter({1, 1, 1}, {0.0});
}

Var Discriminator::forward(const Var& x) const {
  Var h = x;
  for (const auto& layer : stack) h = activate(layer.forward(h), activation, leaky_slope);
  return sigmoid(time_readout(head.forward(h), readout_weight, readout_bias));
}

void Discriminator::collect(NamedParams& out) const {
  collect_stack("discriminator", stack, out);
  head.collect("discriminator.head", out);
  out.emplace_back("discriminator.readout.weight", readout_weight);
  out.emplace_back("discriminator.readout.bias", readout_bias);
}

VaeGanModel VaeGanModel::create(const ArchConfig& arch, std::uint64_t init_seed) {
  if (arch.seq_len == 0 || arch.latent_channels == 0 || arch.hidden_channels == 0 || arch.dilations.empty())
    throw ParameterError("architecture dimensions must be positive");
  Rng rng(init_seed);
  VaeGanModel m;
  m.arch = arch;
  m.encoder = Encoder(arch, rng);
  m.supervisor = Supervisor(arch, rng);
  m.generator = Generator(arch, rng);
  m.discriminator = Discriminator(arch, rng);
  m.meta.seed = init_seed;
  return m;
}

NamedParams VaeGanModel::named_parameters() const {
  NamedParams out;
  encoder.collect(out);
  supervisor.collect(out);
  generator.collect(out);
  discriminator.collect(out);
  return out;
}

VanillaGanModel VanillaGanModel::create(const ArchConfig& arch, std::uint64_t init_seed) {
  if (arch.seq_len == 0 || arch.latent_channels == 0 || arch.hidden_channels == 0 || arch.dilations.empty())
    throw ParameterError("architecture dimensions must be positive");
  Rng rng(init_seed);
  VanillaGanModel m;
  m.arch = arch;
  m.generator = Generator(arch, rng);
  m.discriminator = Discriminator(arch, rng);
  m.meta.seed = init_seed;
  return m;
}

NamedParams VanillaGanModel::named_parameters() const {
  NamedParams out;
  generator.collect(out);
  discriminator.collect(out);
  return out;
}

Var gaussian(Shape shape, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(shape.size());
  for (double& x : v) x = n(rng);
  return constant(shape, std::move(v));
}

LatentCode encode(const VaeGanModel& model, const SequenceBatch& x, std::uint64_t noise_seed) {
  if (x.steps != model.arch.seq_len) throw ContractError("sequence length does not match the model");
  Rng rng(noise_seed);
  const Var eps = gaussian({x.batch, x.steps, model.arch.latent_channels}, rng);
  const auto out = model.encoder.forward(x.as_var(), eps);
  const Var zn = model.supervisor.forward(out.z);
  return LatentCode{out.z->shape, out.mean->value, out.log_variance->value, out.z->value, zn->value};
}

DailyProfileSet generate_vaegan(const VaeGanModel& model, std::int64_t n_days, std::uint64_t seed) {
  return decode_latents(model.generator, model.arch, model.meta, n_days, seed);
}

DailyProfileSet generate_gan(const VanillaGanModel& model, std::int64_t n_days, std::uint64_t seed) {
  return decode_latents(model.generator, model.arch, model.meta, n_days, seed);
}

std::vector<std::vector<double>> snapshot(const NamedParams& params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const auto& [name, v] : params) out.push_back(v->value);
  return out;
}

void restore(const NamedParams& params, const std::vector<std::vector<double>>& values) {
  if (values.size() != params.size()) throw ContractError("snapshot does not match parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) params[i].second->value = values[i];
}

void round_to_float(const NamedParams& params) {
  for (const auto& [name, v] : params)
    for (double& x : v->value) x = static_cast<double>(static_cast<float>(x));
}

VaeGanModel clone(const VaeGanModel& m) {
  VaeGanModel out = m;
  out.encoder.stack = copy_stack(m.encoder.stack);
  out.encoder.mean_head = copy_conv(m.encoder.mean_head);
  out.encoder.logvar_head = copy_conv(m.encoder.logvar_head);
  out.supervisor.conv = copy_conv(m.supervisor.conv);
  out.generator = copy_generator(m.generator);
  out.discriminator = copy_discriminator(m.discriminator);
  return out;
}

VanillaGanModel clone(const VanillaGanModel& m) {
  VanillaGanModel out = m;
  out.generator = copy_generator(m.generator);
  out.discriminator = copy_discriminator(m.discriminator);
  return out;
}

}  // namespace synthgrid::deepgen
