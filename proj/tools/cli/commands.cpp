#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <vector>

#include "cli/handles.hpp"
#include "cli/provenance.hpp"
#include "cli/run_config.hpp"
#include "cli/svg.hpp"

namespace synthgrid::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::size_t kSlots = 96;

struct Context {
  RunConfig config;
  fs::path root;
  ordered_json config_json;
  CommandRecord record;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

fs::path sidecar(const fs::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

fs::path data_csv(const Context& c, const std::string& ch, const char* split) {
  return c.root / "data" / (ch + "_" + split + ".csv");
}
fs::path model_dir(const Context& c, const std::string& m, const std::string& ch) {
  return c.root / "models" / (m + "_" + ch);
}
fs::path synthetic_csv(const Context& c, const std::string& m, const std::string& ch) {
  return c.root / "synthetic" / (m + "_" + ch + ".csv");
}
fs::path report_json(const Context& c, const std::string& m, const std::string& ch) {
  return c.root / "reports" / (m + "_" + ch + ".json");
}

void require_input(const fs::path& p, const std::string& what) {
  std::error_code ec;
  if (!fs::exists(p, ec)) throw CliError(kExitUsage, "missing " + what + ": " + p.string());
}

void refuse_clobber(const std::vector<fs::path>& targets, bool force) {
  if (force) return;
  std::error_code ec;
  for (const auto& t : targets)
    if (fs::exists(t, ec)) throw CliError(kExitClobber, "refusing to overwrite " + t.string() + " (pass --force)");
}

void clear_targets(const std::vector<fs::path>& targets) {
  for (const auto& t : targets) fs::remove_all(t);
}

void write_text(Context& c, const fs::path& p, const std::string& text) {
  write_text_atomically(p, text);
  c.record.artifacts.push_back(p);
}

ProfileSet load_set(const fs::path& p, const std::string& channel, const std::string& what) {
  require_input(p, what);
  sg_profile_set* raw = nullptr;
  check(sg_profile_set_load(p.string().c_str(), -1, &raw), "reading " + p.string());
  ProfileSet set(raw);
  if (static_cast<int>(sg_profile_set_channel(set.get())) != channel_code(channel))
    throw CliError(kExitUsage, p.string() + " is not a " + channel + " profile set");
  return set;
}

void save_set(Context& c, const sg_profile_set* set, const fs::path& p) {
  fs::create_directories(p.parent_path());
  check(sg_profile_set_save(set, p.string().c_str()), "writing " + p.string());
  c.record.artifacts.push_back(p);
  c.record.artifacts.push_back(sidecar(p));
}

std::vector<double> values_of(const sg_profile_set* set) {
  std::vector<double> v(sg_profile_set_days(set) * kSlots);
  check(sg_profile_set_values(set, v.data(), v.size()), "reading profile values");
  return v;
}

ProfileSet normalized_train(const Context& c, const std::string& ch) {
  const auto raw = load_set(data_csv(c, ch, "train"), ch, ch + " train file");
  sg_profile_set* out = nullptr;
  check(sg_normalize_with(raw.get(), raw.get(), &out), "normalizing " + ch + " train split");
  return ProfileSet(out);
}

std::vector<std::string> selected_channels(const Context& c, const Invocation& inv) {
  if (!inv.channel) return c.config.channels;
  channel_code(*inv.channel);
  return {*inv.channel};
}

std::string selected_model(const Invocation& inv, bool required) {
  if (!inv.model) {
    if (required) throw CliError(kExitUsage, "--model is required (gmm, gan or vaegan)");
    return {};
  }
  if (std::find(kModelNames.begin(), kModelNames.end(), *inv.model) == kModelNames.end())
    throw CliError(kExitUsage, "unknown model '" + *inv.model + "' (expected gmm, gan or vaegan)");
  return *inv.model;
}

// ---- ingest ----

void cmd_ingest(Context& c, const Invocation& inv) {
  std::vector<fs::path> targets;
  for (const auto& ch : c.config.channels)
    for (const char* split : {"train", "test"}) {
      targets.push_back(data_csv(c, ch, split));
      targets.push_back(sidecar(data_csv(c, ch, split)));
    }
  refuse_clobber(targets, inv.force);

  struct Split {
    ProfileSet train, test;
  };
  std::map<std::string, Split> splits;
  for (const auto& ch : c.config.channels) {
    const auto& src = c.config.source(ch);
    sg_profile_set* raw = nullptr;
    std::size_t days_seen = 0;
    if (src.format == "sessions")
      check(sg_ingest_ev_sessions(src.path.string().c_str(), src.level_kw, &raw, &days_seen),
            "ingesting " + src.path.string());
    else
      check(sg_ingest_power_csv(src.path.string().c_str(), static_cast<sg_channel>(channel_code(ch)),
                                src.timestamp_column.c_str(), src.power_column.c_str(), &raw, &days_seen),
            "ingesting " + src.path.string());
    ProfileSet clean(raw);
    sg_profile_set *train = nullptr, *test = nullptr;
    check(sg_split_train_test(clean.get(), c.config.split_ratio, &train, &test), "splitting " + ch);
    ProfileSet train_raw(train), test_raw(test);
    sg_profile_set* norm = nullptr;
    check(sg_normalize(train_raw.get(), &norm), "normalizing " + ch);
    ProfileSet train_norm(norm);
    sg_profile_set *train_out = nullptr, *test_out = nullptr;
    check(sg_profile_set_copy(train_raw.get(), train_norm.get(), &train_out), "recording " + ch + " statistics");
    ProfileSet keep_train(train_out);
    check(sg_profile_set_copy(test_raw.get(), train_norm.get(), &test_out), "recording " + ch + " statistics");
    splits[ch] = Split{std::move(keep_train), ProfileSet(test_out)};
    c.record.arguments["days_seen_" + ch] = days_seen;
    c.record.arguments["days_kept_" + ch] = sg_profile_set_days(clean.get());
  }
  clear_targets(targets);
  for (const auto& ch : c.config.channels) {
    save_set(c, splits[ch].train.get(), data_csv(c, ch, "train"));
    save_set(c, splits[ch].test.get(), data_csv(c, ch, "test"));
  }
}

// ---- fit ----

std::string gmm_curve_csv(const json& info) {
  std::ostringstream os;
  os << "iteration,log_likelihood\n";
  const auto& trace = info.at("log_likelihood_trace");
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << fmt(trace[i].get<double>()) << '\n';
  return os.str();
}

std::string deep_curve_csv(const json& info) {
  const auto& hist = info.at("loss_history");
  std::vector<std::string> names;
  std::size_t epochs = 0;
  for (const auto& [k, v] : hist.items()) {
    names.push_back(k);
    epochs = std::max(epochs, v.size());
  }
  std::ostringstream os;
  os << "epoch";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (std::size_t e = 0; e < epochs; ++e) {
    os << e + 1;
    for (const auto& n : names) {
      os << ',';
      if (e < hist[n].size()) os << fmt(hist[n][e].get<double>());
    }
    os << '\n';
  }
  return os.str();
}

void cmd_fit(Context& c, const Invocation& inv) {
  const auto model = selected_model(inv, true);
  const auto channels = selected_channels(c, inv);
  std::vector<fs::path> targets;
  for (const auto& ch : channels) {
    require_input(data_csv(c, ch, "train"), ch + " train file");
    targets.push_back(model_dir(c, model, ch));
  }
  refuse_clobber(targets, inv.force);
  const auto cfg = c.config.model_config(model).dump();
  c.record.arguments["model"] = model;
  clear_targets(targets);
  for (const auto& ch : channels) {
    const auto train = normalized_train(c, ch);
    const fs::path dir = model_dir(c, model, ch);
    fs::create_directories(dir);
    if (model == "gmm") {
      sg_gmm* raw = nullptr;
      check(sg_gmm_fit(train.get(), cfg.c_str(), &raw), "fitting gmm on " + ch);
      Gmm g(raw);
      check(sg_gmm_save(g.get(), (dir / "model.json").string().c_str()), "saving gmm");
      c.record.artifacts.push_back(dir / "model.json");
      char* info = nullptr;
      check(sg_gmm_info_json(g.get(), &info), "gmm info");
      const auto j = json::parse(take_string(info));
      write_text(c, dir / "loss_curve.csv", gmm_curve_csv(j));
      for (const auto& w : j.at("warnings")) std::fprintf(stderr, "warning (%s): %s\n", ch.c_str(), w.get<std::string>().c_str());
    } else {
      sg_deep_model* raw = nullptr;
      check(sg_deep_train(train.get(), cfg.c_str(), dir.string().c_str(), &raw), "training " + model + " on " + ch);
      DeepModel m(raw);
      c.record.artifacts.push_back(dir / "manifest.json");
      c.record.artifacts.push_back(dir / "weights.bin");
      char* info = nullptr;
      check(sg_deep_info_json(m.get(), &info), "model info");
      write_text(c, dir / "loss_curve.csv", deep_curve_csv(json::parse(take_string(info))));
    }
  }
}

// ---- generate ----

void cmd_generate(Context& c, const Invocation& inv) {
  const auto model = selected_model(inv, true);
  const auto channels = selected_channels(c, inv);
  if (inv.n_days && *inv.n_days <= 0) throw CliError(kExitUsage, "--n-days must be positive");
  std::vector<fs::path> targets;
  for (const auto& ch : channels) {
    require_input(model_dir(c, model, ch), model + " model for " + ch);
    targets.push_back(synthetic_csv(c, model, ch));
    targets.push_back(sidecar(synthetic_csv(c, model, ch)));
  }
  refuse_clobber(targets, inv.force);
  c.record.arguments["model"] = model;
  std::map<std::string, ProfileSet> outputs;
  for (const auto& ch : channels) {
    std::int64_t n = 0;
    if (inv.n_days)
      n = *inv.n_days;
    else if (c.config.generate_days)
      n = *c.config.generate_days;
    else
      n = static_cast<std::int64_t>(
          sg_profile_set_days(load_set(data_csv(c, ch, "test"), ch, ch + " test file").get()));
    const std::uint64_t seed = derive_seed(c.config.seed, SeedOrdinal::kGenerate) +
                               1000u * static_cast<std::uint64_t>(channel_code(ch));
    sg_profile_set* sample = nullptr;
    const fs::path dir = model_dir(c, model, ch);
    if (model == "gmm") {
      sg_gmm* raw = nullptr;
      check(sg_gmm_load((dir / "model.json").string().c_str(), &raw), "loading gmm");
      Gmm g(raw);
      check(sg_gmm_sample(g.get(), n, seed, &sample), "sampling gmm");
    } else {
      sg_deep_model* raw = nullptr;
      check(sg_deep_load(dir.string().c_str(), &raw), "loading " + model);
      DeepModel m(raw);
      check(sg_deep_generate(m.get(), n, seed, &sample), "generating from " + model);
    }
    ProfileSet normalized(sample);
    if (static_cast<int>(sg_profile_set_channel(normalized.get())) != channel_code(ch))
      throw CliError(kExitUsage, "model in " + dir.string() + " was not trained on " + ch);
    sg_profile_set* watts = nullptr;
    check(sg_denormalize(normalized.get(), &watts), "denormalizing samples");
    outputs[ch] = ProfileSet(watts);
    c.record.arguments["n_days_" + ch] = n;
    c.record.arguments["seed_" + ch] = seed;
  }
  clear_targets(targets);
  for (const auto& ch : channels) save_set(c, outputs[ch].get(), synthetic_csv(c, model, ch));
}

// ---- evaluate ----

std::string evaluate_pair(const Context& c, const sg_profile_set* real, const sg_profile_set* synth,
                          const std::string& model) {
  ordered_json opts = c.config.evaluate;
  opts["model_name"] = model;
  char* report = nullptr;
  check(sg_evaluate(real, synth, opts.dump().c_str(), &report), "evaluating " + model);
  return json::parse(take_string(report)).dump(2) + "\n";
}

void cmd_evaluate(Context& c, const Invocation& inv, std::ostream& out) {
  if (inv.real || inv.synth) {
    if (!inv.real || !inv.synth) throw CliError(kExitUsage, "--real and --synth must be given together");
    require_input(*inv.real, "real profile file");
    require_input(*inv.synth, "synthetic profile file");
    sg_profile_set *r = nullptr, *s = nullptr;
    check(sg_profile_set_load(inv.real->string().c_str(), -1, &r), "reading " + inv.real->string(), kExitUsage);
    ProfileSet real(r);
    check(sg_profile_set_load(inv.synth->string().c_str(), -1, &s), "reading " + inv.synth->string(), kExitUsage);
    ProfileSet synth(s);
    out << evaluate_pair(c, real.get(), synth.get(), inv.model ? *inv.model : inv.synth->stem().string());
    return;
  }
  const auto channels = selected_channels(c, inv);
  std::vector<std::string> models;
  if (inv.model)
    models.push_back(selected_model(inv, true));
  else
    for (const auto& m : kModelNames)
      for (const auto& ch : channels)
        if (fs::exists(synthetic_csv(c, m, ch)) && std::find(models.begin(), models.end(), m) == models.end())
          models.push_back(m);
  if (models.empty()) throw CliError(kExitUsage, "no synthetic data under " + (c.root / "synthetic").string());

  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<fs::path> targets;
  for (const auto& m : models)
    for (const auto& ch : channels) {
      if (!inv.model && !fs::exists(synthetic_csv(c, m, ch))) continue;
      require_input(data_csv(c, ch, "test"), ch + " test file");
      require_input(synthetic_csv(c, m, ch), m + " synthetic " + ch + " file");
      pairs.emplace_back(m, ch);
      targets.push_back(report_json(c, m, ch));
    }
  refuse_clobber(targets, inv.force);
  std::vector<std::string> texts;
  for (const auto& [m, ch] : pairs) {
    const auto real = load_set(data_csv(c, ch, "test"), ch, ch + " test file");
    const auto synth = load_set(synthetic_csv(c, m, ch), ch, m + " synthetic " + ch + " file");
    texts.push_back(evaluate_pair(c, real.get(), synth.get(), m));
  }
  clear_targets(targets);
  for (std::size_t i = 0; i < pairs.size(); ++i) write_text(c, targets[i], texts[i]);
}

// ---- hems ----

void cmd_hems(Context& c, const Invocation& inv) {
  const std::string source = inv.train_source ? *inv.train_source : c.config.hems.train_source;
  if (source != "real" && std::find(kModelNames.begin(), kModelNames.end(), source) == kModelNames.end())
    throw CliError(kExitUsage, "unknown train source '" + source + "' (expected real, gmm, gan or vaegan)");
  const int runs = inv.runs ? *inv.runs : c.config.hems.runs;
  if (runs < 1) throw CliError(kExitUsage, "--runs must be at least 1");

  std::map<std::string, ProfileSet> train, test;
  for (const auto& ch : kChannelNames) {
    const fs::path tp = source == "real" ? data_csv(c, ch, "train") : synthetic_csv(c, source, ch);
    train[ch] = load_set(tp, ch, source + " " + ch + " training file");
    test[ch] = load_set(data_csv(c, ch, "test"), ch, ch + " test file");
  }
  std::string prices;
  {
    char* p = nullptr;
    check(sg_price_schedule_json(c.config.hems.prices ? c.config.hems.prices->string().c_str() : nullptr, &p),
          "reading price schedule", kExitUsage);
    prices = take_string(p);
  }
  const fs::path dir = c.root / "hems" / source;
  refuse_clobber({dir}, inv.force);

  const auto env = c.config.hems_env().dump();
  std::vector<json> results;
  std::vector<std::uint64_t> seeds;
  HemsResult first;
  for (int r = 0; r < runs; ++r) {
    const std::uint64_t seed = derive_seed(c.config.seed, SeedOrdinal::kHems) + static_cast<std::uint64_t>(r);
    sg_hems_result* raw = nullptr;
    check(sg_hems_run(train["load"].get(), train["pv"].get(), train["ev"].get(), test["load"].get(),
                      test["pv"].get(), test["ev"].get(), env.c_str(), prices.c_str(), seed, &raw),
          "HEMS run " + std::to_string(r));
    HemsResult res(raw);
    char* text = nullptr;
    check(sg_hems_result_json(res.get(), &text), "HEMS result");
    results.push_back(json::parse(take_string(text)));
    seeds.push_back(seed);
    if (r == 0) first = std::move(res);
  }

  const std::size_t episodes = results[0].at("episode_rewards").size();
  const std::size_t days = results[0].at("daily_profit").size();
  const auto& optimal_daily = results[0].at("optimal_daily_profit");
  std::ostringstream ep, daily;
  ep << "episode";
  daily << "day";
  for (int r = 0; r < runs; ++r) {
    ep << ",run_" << r;
    daily << ",run_" << r;
  }
  ep << ",mean\n";
  daily << ",mean,optimal\n";
  for (std::size_t e = 0; e < episodes; ++e) {
    ep << e + 1;
    double sum = 0;
    for (const auto& res : results) {
      const double v = res["episode_rewards"][e].get<double>();
      sum += v;
      ep << ',' << fmt(v);
    }
    ep << ',' << fmt(sum / runs) << '\n';
  }
  std::vector<double> daily_mean(days, 0.0);
  for (std::size_t d = 0; d < days; ++d) {
    daily << d;
    for (const auto& res : results) {
      const double v = res["daily_profit"][d].get<double>();
      daily_mean[d] += v / runs;
      daily << ',' << fmt(v);
    }
    daily << ',' << fmt(daily_mean[d]) << ',' << fmt(optimal_daily[d].get<double>()) << '\n';
  }
  std::vector<double> totals;
  double mean_total = 0;
  for (const auto& res : results) {
    totals.push_back(res["total_profit"].get<double>());
    mean_total += totals.back() / runs;
  }
  const double optimal_total = results[0]["optimal_total_profit"].get<double>();
  ordered_json profit{{"train_source", source},
                      {"runs", runs},
                      {"seeds", seeds},
                      {"total_profit_per_run", totals},
                      {"total_profit_mean", mean_total},
                      {"optimal_total_profit", optimal_total},
                      {"daily_profit_mean", daily_mean},
                      {"optimal_daily_profit", optimal_daily}};

  clear_targets({dir});
  fs::create_directories(dir);
  write_text(c, dir / "episodes.csv", ep.str());
  write_text(c, dir / "daily_profit.csv", daily.str());
  write_text(c, dir / "profit.json", profit.dump(2) + "\n");
  check(sg_hems_save_qtable(first.get(), (dir / "qtable.bin").string().c_str(), (dir / "qtable.json").string().c_str()),
        "saving Q-table");
  c.record.artifacts.push_back(dir / "qtable.bin");
  c.record.artifacts.push_back(dir / "qtable.json");
  c.record.arguments["train_source"] = source;
  c.record.arguments["runs"] = runs;
}

// ---- report ----

std::vector<double> histogram(const std::vector<double>& v, double lo, double hi, int bins) {
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  if (v.empty() || !(hi > lo)) return h;
  for (double x : v) {
    auto b = static_cast<long>(std::floor((x - lo) / (hi - lo) * bins));
    b = std::clamp(b, 0L, static_cast<long>(bins) - 1);
    h[static_cast<std::size_t>(b)] += 1.0;
  }
  for (double& x : h) x /= static_cast<double>(v.size());
  return h;
}

std::vector<double> mean_profile(const std::vector<double>& v) {
  std::vector<double> m(kSlots, 0.0);
  const std::size_t days = v.size() / kSlots;
  if (days == 0) return m;
  for (std::size_t d = 0; d < days; ++d)
    for (std::size_t t = 0; t < kSlots; ++t) m[t] += v[d * kSlots + t] / static_cast<double>(days);
  return m;
}

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw CliError(kExitRuntime, p.string() + ": " + e.what());
  }
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<fs::path> hems_profit_files(const fs::path& root) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(root / "hems", ec)) return out;
  for (const auto& e : fs::directory_iterator(root / "hems"))
    if (e.is_directory() && fs::exists(e.path() / "profit.json")) out.push_back(e.path() / "profit.json");
  std::sort(out.begin(), out.end());
  return out;
}

void cmd_report(Context& c, const Invocation& inv) {
  std::error_code ec;
  if (!fs::is_directory(c.root, ec)) throw CliError(kExitUsage, "run directory not found: " + c.root.string());
  const auto report_files = sorted_files(c.root / "reports", ".json");
  const auto profit_files = hems_profit_files(c.root);
  if (report_files.empty() && profit_files.empty())
    throw CliError(kExitUsage, "nothing to report in " + c.root.string() + " (no reports/ or hems/ results)");
  const fs::path dir = c.root / "report";
  refuse_clobber({dir}, inv.force);

  json reports = json::array();
  for (const auto& f : report_files) reports.push_back(read_json_file(f));
  std::string summary;
  if (!reports.empty()) {
    char* csv = nullptr;
    check(sg_summary_table(reports.dump().c_str(), &csv), "building summary table");
    summary = take_string(csv);
  }

  std::ostringstream hems_csv;
  hems_csv << "train_source,runs,total_profit_mean,optimal_total_profit,gap_percent\n";
  std::vector<Series> learning;
  for (const auto& f : profit_files) {
    const auto p = read_json_file(f);
    const double mean = p.at("total_profit_mean").get<double>();
    const double opt = p.at("optimal_total_profit").get<double>();
    const double gap = opt != 0.0 ? 100.0 * (opt - mean) / std::abs(opt) : 0.0;
    const auto src = p.at("train_source").get<std::string>();
    hems_csv << src << ',' << p.at("runs").get<int>() << ',' << fmt(mean) << ',' << fmt(opt) << ',' << fmt(gap)
             << '\n';
    std::ifstream ep(f.parent_path() / "episodes.csv");
    std::string line;
    std::getline(ep, line);
    Series s{src, {}, {}};
    while (std::getline(ep, line)) {
      const auto first = line.find(','), last = line.rfind(',');
      if (first == std::string::npos) continue;
      s.x.push_back(std::atof(line.substr(0, first).c_str()));
      s.y.push_back(std::atof(line.substr(last + 1).c_str()));
    }
    learning.push_back(std::move(s));
  }

  struct Plot {
    std::string name, svg;
  };
  std::vector<Plot> plots;
  std::map<std::string, std::vector<json>> by_channel;
  for (const auto& r : reports) by_channel[r.at("channel").get<std::string>()].push_back(r);
  for (const auto& [ch, rs] : by_channel) {
    if (!fs::exists(data_csv(c, ch, "test"))) continue;
    const auto real = values_of(load_set(data_csv(c, ch, "test"), ch, ch + " test file").get());
    const double lo = rs[0].at("range")[0].get<double>(), hi = rs[0].at("range")[1].get<double>();
    const int bins = rs[0].at("bins").get<int>();
    std::vector<double> centers(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) centers[static_cast<std::size_t>(b)] = lo + (hi - lo) * (b + 0.5) / bins;
    std::vector<double> slots(kSlots);
    for (std::size_t t = 0; t < kSlots; ++t) slots[t] = static_cast<double>(t) / 4.0;
    std::vector<Series> pdf{{"real", centers, histogram(real, lo, hi, bins)}};
    std::vector<Series> prof{{"real", slots, mean_profile(real)}};
    for (const auto& r : rs) {
      const auto m = r.at("model").get<std::string>();
      if (!fs::exists(synthetic_csv(c, m, ch))) continue;
      const auto synth = values_of(load_set(synthetic_csv(c, m, ch), ch, m + " synthetic file").get());
      pdf.push_back({m, centers, histogram(synth, lo, hi, bins)});
      prof.push_back({m, slots, mean_profile(synth)});
    }
    plots.push_back({"pdf_" + ch + ".svg", line_chart_svg(ch + " value distribution", "power [W]", "probability", pdf)});
    plots.push_back({"profile_" + ch + ".svg", line_chart_svg(ch + " mean daily profile", "hour", "power [W]", prof)});
  }
  if (!learning.empty())
    plots.push_back({"hems_learning.svg", line_chart_svg("HEMS training reward", "episode", "mean reward", learning)});

  clear_targets({dir});
  if (!summary.empty()) write_text(c, dir / "summary.csv", summary);
  if (!profit_files.empty()) write_text(c, dir / "hems_profit.csv", hems_csv.str());
  for (const auto& p : plots) write_text_atomically(dir / p.name, p.svg);
}

}  // namespace

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    Context c;
    c.config = load_run_config(inv.config);
    if (inv.seed) c.config.seed = *inv.seed;
    validate(c.config);
    if (const char* env = std::getenv("SYNTHGRID_OUT"); env && *env) c.config.output_dir = fs::absolute(env);
    c.root = c.config.output_dir;
    c.config_json = to_json(c.config);
    c.record.command = inv.command;
    c.record.started_at = utc_timestamp();
    if (inv.channel) c.record.arguments["channel"] = *inv.channel;
    c.record.arguments["force"] = inv.force;

    if (inv.command == "ingest")
      cmd_ingest(c, inv);
    else if (inv.command == "fit")
      cmd_fit(c, inv);
    else if (inv.command == "generate")
      cmd_generate(c, inv);
    else if (inv.command == "evaluate")
      cmd_evaluate(c, inv, out);
    else if (inv.command == "hems")
      cmd_hems(c, inv);
    else if (inv.command == "report")
      cmd_report(c, inv);
    else
      throw CliError(kExitUsage, "unknown command '" + inv.command + "'");

    if (!c.record.artifacts.empty()) record_command(c.root, c.config_json, c.record);
    return kExitOk;
  } catch (const CliError& e) {
    err << "synthgrid " << inv.command << ": " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "synthgrid " << inv.command << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace synthgrid::cli
