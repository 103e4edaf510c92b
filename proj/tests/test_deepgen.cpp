#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>

#include "support/fixtures.hpp"
#include "support/grad_check.hpp"
#include "synthgrid/common/error.hpp"
#include "synthgrid/deepgen/checkpoint.hpp"
#include "synthgrid/deepgen/losses.hpp"
#include "synthgrid/deepgen/train.hpp"

using namespace synthgrid;
using namespace synthgrid::deepgen;
using namespace oracles;

namespace {

DailyProfileSet normalized_fixture(std::size_t days, std::uint64_t seed) {
  return ingest::normalize(fixtures::sinusoid_days(days, seed));
}

TrainConfig small_config(const std::string& type, int epochs) {
  TrainConfig c;
  c.model_type = type;
  c.epochs = epochs;
  c.hidden_channels = 8;
  c.batch_size = 4;
  c.learning_rate = 1e-3;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("prior loss closed form") {
  CHECK(loss_prior(constant({1, 1, 1}, 0.0), constant({1, 1, 1}, 0.0))->scalar() == doctest::Approx(0.0));
  CHECK(loss_prior(constant({1, 1, 1}, 1.0), constant({1, 1, 1}, 0.0))->scalar() == doctest::Approx(0.5));
  // sigma = 1/e, so log-variance = -2
  const double v = loss_prior(constant({1, 1, 1}, 0.0), constant({1, 1, 1}, -2.0))->scalar();
  CHECK(v == doctest::Approx(0.5 * (std::exp(-2.0) + 1.0)).epsilon(1e-12));
  CHECK(v == doctest::Approx(0.5677).epsilon(1e-4));

  // oracle: per-element KL summed over channels, averaged over batch and steps
  const Shape s{3, 4, 2};
  const Var mu = random_const(s, 1), lv = random_const(s, 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    sum += 0.5 * (mu->value[i] * mu->value[i] + std::exp(lv->value[i]) - 1.0 - lv->value[i]);
  CHECK(loss_prior(mu, lv)->scalar() == doctest::Approx(sum / 12.0).epsilon(1e-12));
  CHECK(loss_prior(mu, lv)->scalar() >= 0.0);
}

TEST_CASE("reconstruction loss") {
  const Var x = random_const({2, 5, 1}, 3);
  CHECK(loss_reconstr(x, x)->scalar() == 0.0);
  CHECK(loss_reconstr(add_scalar(x, 1.0), x)->scalar() == doctest::Approx(1.0));
  CHECK(loss_reconstr(constant({1, 1, 1}, 0.0), constant({1, 1, 1}, 2.0))->scalar() == doctest::Approx(4.0));
  CHECK_THROWS_AS(loss_reconstr(x, random_const({2, 4, 1}, 4)), ContractError);
}

TEST_CASE("supervisor loss") {
  const Shape s{2, 6, 3};
  const Var z = random_const(s, 5);
  // prediction at t equals z at t+1 exactly
  std::vector<double> shifted(s.size(), 0.0);
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t t = 0; t + 1 < s.t; ++t)
      for (std::size_t c = 0; c < s.c; ++c)
        shifted[(b * s.t + t) * s.c + c] = z->value[(b * s.t + t + 1) * s.c + c];
  CHECK(loss_supervisor(z, constant(s, shifted))->scalar() == doctest::Approx(0.0));
  CHECK(loss_supervisor(constant(s, 0.0), constant(s, 1.0))->scalar() == doctest::Approx(1.0));

  const Var zh = random_const(s, 6);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t b = 0; b < s.b; ++b)
    for (std::size_t t = 1; t < s.t; ++t)
      for (std::size_t c = 0; c < s.c; ++c, ++n) {
        const double d = zh->value[(b * s.t + t - 1) * s.c + c] - z->value[(b * s.t + t) * s.c + c];
        sum += d * d;
      }
  CHECK(loss_supervisor(z, zh)->scalar() == doctest::Approx(sum / static_cast<double>(n)).epsilon(1e-12));
}

TEST_CASE("adversarial and discriminator losses") {
  CHECK(loss_adversarial(constant({4, 1, 1}, 1.0 - 1e-7))->scalar() == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(loss_adversarial(constant({4, 1, 1}, 0.5))->scalar() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(bce(constant({2, 1, 1}, 1e-7), 0.0)->scalar() == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_THROWS_AS(bce(constant({1, 1, 1}, 1.5), 1.0), ContractError);
  CHECK_THROWS_AS(bce(constant({1, 1, 1}, -0.1), 1.0), ContractError);

  // an all-zero discriminator outputs 0.5 everywhere
  auto model = VaeGanModel::create(toy_arch(), 3);
  NamedParams disc;
  model.discriminator.collect(disc);
  for (auto& [name, p] : disc) std::fill(p->value.begin(), p->value.end(), 0.0);
  const Var x = random_const({3, 6, 1}, 7, 0.0, 1.0);
  const auto d = discriminator_loss(model.discriminator, x, random_const({3, 6, 1}, 8), random_const({3, 6, 1}, 9));
  CHECK(d.total->scalar() == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(d.total->scalar() == doctest::Approx(2.079).epsilon(1e-3));

  auto gan = VanillaGanModel::create(toy_arch(), 3);
  NamedParams gdisc;
  gan.discriminator.collect(gdisc);
  for (auto& [name, p] : gdisc) std::fill(p->value.begin(), p->value.end(), 0.0);
  const Var noise = random_const({3, 6, 1}, 10);
  Var fake;
  CHECK(vanilla_generator_loss(gan, noise, false, &fake)->scalar() == doctest::Approx(std::log(2.0)));
  CHECK(vanilla_discriminator_loss(gan, x, fake)->scalar() == doctest::Approx(std::log(2.0)));
}

TEST_CASE("composite losses add their terms") {
  auto model = VaeGanModel::create(toy_arch(), 4);
  const Var x = random_const({2, 6, 1}, 11, 0.0, 1.0);
  const Var eps = random_const({2, 6, 1}, 12);
  const auto e = encoder_loss(model, x, eps);
  CHECK(e.total->scalar() == doctest::Approx(e.prior->scalar() + e.supervisor->scalar()).epsilon(1e-14));
  const auto g = generator_loss(model, x, eps);
  CHECK(g.total->scalar() == doctest::Approx(g.prior->scalar() + g.reconstr->scalar() + g.adversarial->scalar() +
                                             g.supervisor->scalar())
                                 .epsilon(1e-14));
  CHECK(add(constant({1, 1, 1}, 0.5), constant({1, 1, 1}, 0.25))->scalar() == 0.75);
}

TEST_CASE("toy network gradients match central differences") {
  auto model = VaeGanModel::create(toy_arch(), 21);
  const NamedParams all = model.named_parameters();
  CHECK(count_params(all) <= 50);
  NamedParams enc, sup, gen, disc;
  model.encoder.collect(enc);
  model.supervisor.collect(sup);
  model.generator.collect(gen);
  model.discriminator.collect(disc);

  const Var x = random_const({3, 6, 1}, 31, 0.0, 1.0);
  const Var eps = random_const({3, 6, 1}, 32);
  const Var noise = random_const({3, 6, 1}, 33);

  auto le = [&] { return encoder_loss(model, x, eps).total; };
  auto lg = [&] { return generator_loss(model, x, eps).total; };
  const Var fake = generator_loss(model, x, eps).fake;
  auto ld = [&] { return discriminator_loss(model.discriminator, x, fake, noise).total; };

  NamedParams es = enc;
  es.insert(es.end(), sup.begin(), sup.end());
  CHECK(max_gradient_error(le, es, all) < 1e-4);
  CHECK(max_gradient_error(lg, all, all) < 1e-4);
  CHECK(max_gradient_error(ld, disc, all) < 1e-4);

  // L_E touches only encoder and supervisor
  zero_grad(params_of(all));
  backward(le());
  for (const auto& [name, p] : gen)
    for (double g : p->grad) CHECK(g == 0.0);
  for (const auto& [name, p] : disc)
    for (double g : p->grad) CHECK(g == 0.0);

  // L_D never reaches the generator or encoder
  zero_grad(params_of(all));
  backward(discriminator_loss(model.discriminator, x, generator_loss(model, x, eps).fake, noise).total);
  for (const auto& [name, p] : gen)
    for (double g : p->grad) CHECK(g == 0.0);
  for (const auto& [name, p] : enc)
    for (double g : p->grad) CHECK(g == 0.0);
}

TEST_CASE("zero-weight encoder passes the noise through") {
  auto model = VaeGanModel::create(ArchConfig{}, 5);
  NamedParams enc;
  model.encoder.collect(enc);
  for (auto& [name, p] : enc) std::fill(p->value.begin(), p->value.end(), 0.0);
  const Shape xs{2, kStepsPerDay, 1};
  const Shape zs{2, kStepsPerDay, model.arch.latent_channels};
  const Var eps = random_const(zs, 41);
  const auto out = model.encoder.forward(random_const(xs, 40, 0.0, 1.0), eps);
  CHECK(out.z->shape == zs);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    CHECK(out.mean->value[i] == 0.0);
    CHECK(out.log_variance->value[i] == 0.0);
    CHECK(out.z->value[i] == eps->value[i]);
  }
}

TEST_CASE("encoder is causal with a 32-step receptive field") {
  auto model = VaeGanModel::create(ArchConfig{}, 6);
  REQUIRE(model.arch.receptive_field() == 32);
  const Shape xs{1, kStepsPerDay, 1};
  const Var x = random_const(xs, 50, 0.0, 1.0);
  const Var eps = constant({1, kStepsPerDay, model.arch.latent_channels}, 0.0);
  const auto base = model.encoder.forward(x, eps);
  const std::size_t L = model.arch.latent_channels;
  for (std::size_t probe : {0UL, 10UL, 40UL, 95UL}) {
    auto values = x->value;
    values[probe] += 0.5;
    const auto moved = model.encoder.forward(constant(xs, values), eps);
    for (std::size_t t = 0; t < kStepsPerDay; ++t) {
      double diff = 0.0;
      for (std::size_t c = 0; c < L; ++c)
        diff = std::max({diff, std::abs(moved.mean->value[t * L + c] - base.mean->value[t * L + c]),
                         std::abs(moved.log_variance->value[t * L + c] - base.log_variance->value[t * L + c])});
      if (t < probe || t > probe + 31)
        CHECK(diff == 0.0);
      else if (t == probe || t == probe + 31)
        CHECK(diff > 0.0);
    }
  }
}

TEST_CASE("encoder reports the layer that went non-finite") {
  auto model = VaeGanModel::create(ArchConfig{}, 7);
  model.encoder.stack[2].bias->value[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    model.encoder.forward(random_const({1, kStepsPerDay, 1}, 1, 0.0, 1.0),
                          constant({1, kStepsPerDay, model.arch.latent_channels}, 0.0));
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer 2") != std::string::npos);
  }
}

TEST_CASE("discriminator output stays inside (0,1)") {
  auto model = VaeGanModel::create(ArchConfig{}, 8);
  for (double spread : {1.0, 10.0, 1e3}) {
    const Var d = model.discriminator.forward(random_const({8, kStepsPerDay, 1}, 60, -spread, spread));
    for (double p : d->value) {
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }
}

TEST_CASE("vaegan one-epoch smoke and determinism") {
  const auto train = normalized_fixture(8, 1);
  const auto cfg = small_config("vaegan", 1);
  const auto a = train_vaegan(train, cfg);
  const auto b = train_vaegan(train, cfg);
  CHECK(a.meta.epochs_completed == 1);
  for (const auto& [name, curve] : a.meta.history) {
    CAPTURE(name);
    REQUIRE(curve.size() == 1);
    CHECK(std::isfinite(curve[0]));
    CHECK(b.meta.history.at(name) == curve);
  }
  const auto gen = generate_vaegan(a, 5, 3);
  CHECK(gen.days() == 5);
  CHECK(gen.values().size() == 5 * kStepsPerDay);
  for (double v : gen.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(gen.normalized());
  CHECK_THROWS_AS(generate_vaegan(a, 0, 3), ParameterError);
}

TEST_CASE("vanilla gan one-epoch smoke and determinism") {
  const auto train = normalized_fixture(8, 2);
  const auto cfg = small_config("gan", 1);
  const auto a = train_vanilla_gan(train, cfg);
  const auto b = train_vanilla_gan(train, cfg);
  REQUIRE(a.meta.history.at("L_G").size() == 1);
  CHECK(std::isfinite(a.meta.history.at("L_G")[0]));
  CHECK(std::isfinite(a.meta.history.at("L_D")[0]));
  CHECK(a.meta.history == b.meta.history);
  CHECK(generate_gan(a, 3, 1).values() == generate_gan(b, 3, 1).values());
}

TEST_CASE("training rejects bad input") {
  const auto raw = fixtures::sinusoid_days(8, 3);
  CHECK_THROWS_AS(train_vaegan(raw, small_config("vaegan", 1)), ContractError);
  auto cfg = small_config("vaegan", 1);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train_vaegan(ingest::normalize(raw), cfg), ParameterError);
  cfg = small_config("other", 1);
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("checkpoint round trip reproduces generation") {
  const auto dir = std::filesystem::temp_directory_path() / "synthgrid_test_ckpt";
  std::filesystem::remove_all(dir);
  const auto train = normalized_fixture(8, 4);
  const auto cfg = small_config("vaegan", 2);
  TrainOptions opts;
  opts.checkpoint_dir = dir;
  int calls = 0;
  opts.on_epoch = [&](int, const LossHistory&) { ++calls; };
  const auto model = train_vaegan(train, cfg, opts);
  CHECK(calls == 2);
  CHECK(std::filesystem::exists(dir / "weights.bin"));
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(checkpoint_model_type(dir) == "vaegan");
  const auto loaded = load_vaegan(dir);
  CHECK(loaded.meta.epochs_completed == 2);
  CHECK(loaded.meta.history == model.meta.history);
  CHECK(loaded.meta.normalization->max == doctest::Approx(model.meta.normalization->max));
  CHECK(generate_vaegan(loaded, 7, 99).values() == generate_vaegan(model, 7, 99).values());
  CHECK_THROWS_AS(load_vanilla_gan(dir), SchemaError);

  const auto gdir = dir / "gan";
  const auto gan = train_vanilla_gan(train, small_config("gan", 1));
  save_checkpoint(gan, small_config("gan", 1), gdir);
  CHECK(generate_gan(load_vanilla_gan(gdir), 4, 5).values() == generate_gan(gan, 4, 5).values());
  std::filesystem::remove_all(dir);
}

TEST_CASE("divergence aborts and keeps the last good checkpoint") {
  const auto dir = std::filesystem::temp_directory_path() / "synthgrid_test_diverge";
  std::filesystem::remove_all(dir);
  const auto train = normalized_fixture(8, 5);
  auto cfg = small_config("vaegan", 3);
  cfg.learning_rate = 1e200;
  TrainOptions opts;
  opts.checkpoint_dir = dir;
  CHECK_THROWS_AS(train_vaegan(train, cfg, opts), NumericError);
  REQUIRE(std::filesystem::exists(dir / "manifest.json"));
  const auto kept = load_vaegan(dir);
  for (const auto& [name, p] : kept.named_parameters())
    for (double v : p->value) CHECK(std::isfinite(v));
  std::filesystem::remove_all(dir);
}

TEST_CASE("train config json round trip") {
  TrainConfig c;
  c.model_type = "gan";
  c.latent_channels = 4;
  c.batch_size = 16;
  c.epochs = 7;
  c.learning_rate = 1e-3;
  c.seed = 42;
  const auto back = train_config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(to_json(back) == to_json(c));
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json{{"bogus", 1}}), SchemaError);
}
