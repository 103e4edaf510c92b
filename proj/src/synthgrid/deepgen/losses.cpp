#include "synthgrid/deepgen/losses.hpp"

#include "synthgrid/common/error.hpp"

namespace synthgrid::deepgen {

Var loss_prior(const Var& mean, const Var& log_variance) {
  if (!(mean->shape == log_variance->shape)) throw ContractError("loss_prior: shape mismatch");
  const Var inner = sub(add_scalar(add(square(mean), exp(log_variance)), -1.0), log_variance);
  return scale(deepgen::mean(inner), 0.5 * static_cast<double>(mean->shape.c));
}

Var loss_reconstr(const Var& x_hat, const Var& x) {
  if (!(x_hat->shape == x->shape)) throw ContractError("loss_reconstr: shape mismatch");
  return mean(square(sub(x_hat, x)));
}

Var loss_supervisor(const Var& z, const Var& z_next) {
  if (!(z->shape == z_next->shape)) throw ContractError("loss_supervisor: shape mismatch");
  const std::size_t T = z->shape.t;
  if (T < 2) throw ContractError("loss_supervisor: need at least two steps");
  return mean(square(sub(slice_time(z_next, 0, T - 1), slice_time(z, 1, T))));
}

Var loss_adversarial(const Var& d_fake, bool saturating) {
  if (saturating) return scale(bce(d_fake, 0.0), -1.0);
  return bce(d_fake, 1.0);
}

VaeGanTerms encoder_loss(const VaeGanModel& model, const Var& x, const Var& eps) {
  const auto enc = model.encoder.forward(x, eps);
  VaeGanTerms t;
  t.prior = loss_prior(enc.mean, enc.log_variance);
  t.supervisor = loss_supervisor(enc.z, model.supervisor.forward(enc.z));
  t.total = add(t.prior, t.supervisor);
  return t;
}

VaeGanTerms generator_loss(const VaeGanModel& model, const Var& x, const Var& eps) {
  const auto enc = model.encoder.forward(x, eps);
  VaeGanTerms t;
  t.prior = loss_prior(enc.mean, enc.log_variance);
  t.supervisor = loss_supervisor(enc.z, model.supervisor.forward(enc.z));
  t.fake = model.generator.forward(enc.z);
  t.reconstr = loss_reconstr(t.fake, x);
  t.adversarial = loss_adversarial(model.discriminator.forward(t.fake));
  t.total = add(add(t.prior, t.reconstr), add(t.adversarial, t.supervisor));
  return t;
}

DiscriminatorTerms discriminator_loss(const Discriminator& d, const Var& x, const Var& fake, const Var& noise) {
  DiscriminatorTerms t;
  t.real = bce(d.forward(x), 1.0);
  t.fake = bce(d.forward(detach(fake)), 0.0);
  t.noise = bce(d.forward(noise), 0.0);
  t.total = add(add(t.real, t.fake), t.noise);
  return t;
}

Var vanilla_generator_loss(const VanillaGanModel& model, const Var& noise, bool saturating, Var* fake_out) {
  const Var fake = model.generator.forward(noise);
  if (fake_out) *fake_out = fake;
  return loss_adversarial(model.discriminator.forward(fake), saturating);
}

Var vanilla_discriminator_loss(const VanillaGanModel& model, const Var& x, const Var& fake) {
  const Var real = bce(model.discriminator.forward(x), 1.0);
  const Var gen = bce(model.discriminator.forward(detach(fake)), 0.0);
  return scale(add(real, gen), 0.5);
}

}  // namespace synthgrid::deepgen
