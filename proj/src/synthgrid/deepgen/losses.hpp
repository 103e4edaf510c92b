#pragma once

#include "synthgrid/deepgen/models.hpp"

namespace synthgrid::deepgen {

// KL to N(0,1): 0.5 * sum_c (mu^2 + sigma^2 - 1 - ln sigma^2), averaged over batch and steps.
Var loss_prior(const Var& mean, const Var& log_variance);
// Mean squared error.
Var loss_reconstr(const Var& x_hat, const Var& x);
// MSE between the prediction made at step t and the latent at t + 1.
Var loss_supervisor(const Var& z, const Var& z_next);
// Non-saturating BCE(D(G(z)), 1); the saturating form is mean ln(1 - D(G(z))).
Var loss_adversarial(const Var& d_fake, bool saturating = false);

struct VaeGanTerms {
  Var prior, supervisor, reconstr, adversarial;
  Var total;
  Var fake;  // G(z), only set by generator_loss
};

// L_E = L_prior + L_supervisor.
VaeGanTerms encoder_loss(const VaeGanModel& model, const Var& x, const Var& eps);
// L_generator = L_prior + L_reconstr + L_dG + L_supervisor.
VaeGanTerms generator_loss(const VaeGanModel& model, const Var& x, const Var& eps);

struct DiscriminatorTerms {
  Var real, fake, noise;
  Var total;
};

// L_D = BCE(D(x),1) + BCE(D(fake),0) + BCE(D(noise),0). `fake` is detached
// here so no gradient reaches the generator.
DiscriminatorTerms discriminator_loss(const Discriminator& d, const Var& x, const Var& fake, const Var& noise);

struct GanTerms {
  Var generator;
  Var discriminator;
  Var fake;
};

// Generator: adversarial loss on D(G(noise)). Discriminator: BCE over the
// pooled real + fake batch (mean of the two halves).
Var vanilla_generator_loss(const VanillaGanModel& model, const Var& noise, bool saturating, Var* fake_out = nullptr);
Var vanilla_discriminator_loss(const VanillaGanModel& model, const Var& x, const Var& fake);

}  // namespace synthgrid::deepgen
