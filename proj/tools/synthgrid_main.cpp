#include <CLI11.hpp>
#include <iostream>

#include "cli/commands.hpp"
#include "cli/handles.hpp"

int main(int argc, char** argv) {
  using synthgrid::cli::Invocation;
  CLI::App app{"synthgrid: synthetic household energy profiles and HEMS evaluation"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", sg_version());

  Invocation inv;
  std::string model, channel, train_source, real, synth;
  std::uint64_t seed = 0;
  int runs = 0;
  std::int64_t n_days = 0;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config, "run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "global seed, overrides the config");
    sub->add_flag("--force", inv.force, "overwrite existing outputs");
  };
  auto* ingest = app.add_subcommand("ingest", "clean, split and normalize the raw inputs");
  common(ingest);
  auto* fit = app.add_subcommand("fit", "train a generative model per channel");
  common(fit);
  fit->add_option("--model", model, "gmm, gan or vaegan");
  fit->add_option("--channel", channel, "load, pv or ev (default: all configured)");
  auto* generate = app.add_subcommand("generate", "sample synthetic days from a fitted model");
  common(generate);
  generate->add_option("--model", model, "gmm, gan or vaegan");
  generate->add_option("--channel", channel, "load, pv or ev (default: all configured)");
  generate->add_option("--n-days", n_days, "days to generate (default: size of the test split)");
  auto* evaluate = app.add_subcommand("evaluate", "distance report between real and synthetic data");
  common(evaluate);
  evaluate->add_option("--model", model, "restrict to one model");
  evaluate->add_option("--channel", channel, "restrict to one channel");
  evaluate->add_option("--real", real, "real day-matrix CSV (with --synth, prints the report)");
  evaluate->add_option("--synth", synth, "synthetic day-matrix CSV");
  auto* hems = app.add_subcommand("hems", "train the Q-learning HEMS and test it on real data");
  common(hems);
  hems->add_option("--runs", runs, "seeded runs to average (default 10)");
  hems->add_option("--train-source", train_source, "real, gmm, gan or vaegan");
  auto* report = app.add_subcommand("report", "summary table and plots for a run directory");
  common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : synthgrid::cli::kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  inv.command = sub->get_name();
  if (sub->count("--seed")) inv.seed = seed;
  if (sub->get_option_no_throw("--model") && sub->count("--model")) inv.model = model;
  if (sub->get_option_no_throw("--channel") && sub->count("--channel")) inv.channel = channel;
  if (sub->get_option_no_throw("--n-days") && sub->count("--n-days")) inv.n_days = n_days;
  if (sub->get_option_no_throw("--runs") && sub->count("--runs")) inv.runs = runs;
  if (sub->get_option_no_throw("--train-source") && sub->count("--train-source")) inv.train_source = train_source;
  if (sub->get_option_no_throw("--real") && sub->count("--real")) inv.real = real;
  if (sub->get_option_no_throw("--synth") && sub->count("--synth")) inv.synth = synth;
  return synthgrid::cli::run(inv, std::cout, std::cerr);
}
