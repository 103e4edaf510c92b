#include "synthgrid/synthgrid.h"

#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <memory>
#include <new>
#include <string>
#include <variant>

#include "synthgrid/common/error.hpp"
#include "synthgrid/deepgen/checkpoint.hpp"
#include "synthgrid/deepgen/train.hpp"
#include "synthgrid/gmm/gmm.hpp"
#include "synthgrid/hems/hems.hpp"
#include "synthgrid/ingest/ingest.hpp"
#include "synthgrid/ingest/profile_io.hpp"
#include "synthgrid/metrics/metrics.hpp"

using namespace synthgrid;
using nlohmann::json;
using nlohmann::ordered_json;

struct sg_profile_set {
  DailyProfileSet set;
};

struct sg_gmm {
  gmm::GmmModel model;
};

struct sg_deep_model {
  std::variant<deepgen::VaeGanModel, deepgen::VanillaGanModel> model;
  deepgen::TrainConfig config;
};

struct sg_hems_result {
  hems::QTable q;
  std::vector<double> episode_rewards;
  std::vector<double> daily_profit;
  std::vector<double> optimal_profit;
};

namespace {

thread_local std::string g_last_error;

sg_status fail(sg_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
sg_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SG_OK;
  } catch (const Error& e) {
    return fail(static_cast<sg_status>(static_cast<int>(e.code())), e.what());
  } catch (const json::exception& e) {
    return fail(SG_ERR_SCHEMA, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SG_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw ParameterError(std::string(what) + " is NULL");
}

json parse_json(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string(what) + ": " + e.what());
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Channel to_channel(int c) {
  if (c < 0 || c > 2) throw ParameterError("unknown channel code " + std::to_string(c));
  return static_cast<Channel>(c);
}

sg_profile_set* wrap(DailyProfileSet s) { return new sg_profile_set{std::move(s)}; }

hems::PriceSchedule prices_from_json(const json& j) {
  hems::PriceSchedule p;
  const auto& slots = j.at("slots");
  if (!slots.is_array() || slots.size() != kStepsPerDay)
    throw SchemaError("price schedule needs exactly 96 slots");
  for (std::size_t i = 0; i < kStepsPerDay; ++i) {
    p.buy[i] = slots[i].at("buy").get<double>();
    p.sell[i] = slots[i].at("sell").get<double>();
  }
  p.validate();
  return p;
}

ordered_json prices_to_json(const hems::PriceSchedule& p) {
  ordered_json slots = ordered_json::array();
  for (std::size_t i = 0; i < kStepsPerDay; ++i) slots.push_back({{"buy", p.buy[i]}, {"sell", p.sell[i]}});
  return {{"slots", slots}};
}

}  // namespace

extern "C" {

const char* sg_last_error(void) { return g_last_error.c_str(); }
const char* sg_version(void) { return "0.1.0"; }
void sg_string_free(char* s) { std::free(s); }

sg_status sg_profile_set_create(sg_channel channel, const double* values, size_t n_days, sg_profile_set** out) {
  return guarded([&] {
    require(out, "out");
    if (n_days > 0) require(values, "values");
    std::vector<double> v(values, values + n_days * kStepsPerDay);
    *out = wrap(DailyProfileSet(to_channel(channel), std::move(v)));
  });
}

sg_status sg_profile_set_load(const char* csv_path, int channel, sg_profile_set** out) {
  return guarded([&] {
    require(csv_path, "csv_path");
    require(out, "out");
    std::optional<Channel> ch;
    if (channel >= 0) ch = to_channel(channel);
    *out = wrap(ingest::load_profile_set(csv_path, ch));
  });
}

sg_status sg_profile_set_save(const sg_profile_set* set, const char* csv_path) {
  return guarded([&] {
    require(set, "set");
    require(csv_path, "csv_path");
    ingest::save_profile_set(set->set, csv_path);
  });
}

size_t sg_profile_set_days(const sg_profile_set* set) { return set ? set->set.days() : 0; }
sg_channel sg_profile_set_channel(const sg_profile_set* set) {
  return set ? static_cast<sg_channel>(static_cast<int>(set->set.channel())) : SG_CHANNEL_LOAD;
}
int sg_profile_set_is_normalized(const sg_profile_set* set) { return set && set->set.normalized() ? 1 : 0; }

sg_status sg_profile_set_values(const sg_profile_set* set, double* out, size_t capacity) {
  return guarded([&] {
    require(set, "set");
    const auto& v = set->set.values();
    if (capacity < v.size()) throw ParameterError("buffer holds " + std::to_string(capacity) + " values, need " +
                                                  std::to_string(v.size()));
    if (!v.empty()) require(out, "out");
    std::copy(v.begin(), v.end(), out);
  });
}

sg_status sg_profile_set_copy(const sg_profile_set* set, const sg_profile_set* record_from, sg_profile_set** out) {
  return guarded([&] {
    require(set, "set");
    require(out, "out");
    DailyProfileSet copy = set->set;
    if (record_from) copy.set_normalization(record_from->set.normalization(), copy.normalized());
    *out = wrap(std::move(copy));
  });
}

void sg_profile_set_free(sg_profile_set* set) { delete set; }

sg_status sg_ingest_power_csv(const char* path, sg_channel channel, const char* timestamp_column,
                              const char* power_column, sg_profile_set** out, size_t* days_seen) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    ingest::PowerColumns cols;
    if (timestamp_column) cols.timestamp = timestamp_column;
    if (power_column) cols.power = power_column;
    const auto raw = ingest::load_power_csv(path, to_channel(channel), cols);
    ingest::CleanStats stats;
    auto set = ingest::clean_full_days(ingest::resample_mean(raw), &stats);
    if (days_seen) *days_seen = stats.days_seen;
    *out = wrap(std::move(set));
  });
}

sg_status sg_ingest_ev_sessions(const char* path, double level_kw, sg_profile_set** out, size_t* days_seen) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const auto sessions = ingest::load_ev_sessions_csv(path);
    ingest::CleanStats stats;
    auto set = ingest::clean_full_days(ingest::ev_sessions_to_load(sessions, level_kw), &stats);
    if (days_seen) *days_seen = stats.days_seen;
    *out = wrap(std::move(set));
  });
}

sg_status sg_split_train_test(const sg_profile_set* set, double ratio, sg_profile_set** train, sg_profile_set** test) {
  return guarded([&] {
    require(set, "set");
    require(train, "train");
    require(test, "test");
    auto [a, b] = ingest::split_train_test(set->set, ratio);
    auto ta = std::unique_ptr<sg_profile_set>(wrap(std::move(a)));
    *test = wrap(std::move(b));
    *train = ta.release();
  });
}

sg_status sg_normalize(const sg_profile_set* set, sg_profile_set** out) {
  return guarded([&] {
    require(set, "set");
    require(out, "out");
    *out = wrap(ingest::normalize(set->set));
  });
}

sg_status sg_normalize_with(const sg_profile_set* set, const sg_profile_set* reference, sg_profile_set** out) {
  return guarded([&] {
    require(set, "set");
    require(reference, "reference");
    require(out, "out");
    if (!reference->set.normalization()) throw ContractError("reference set carries no normalization record");
    *out = wrap(ingest::normalize_with(set->set, *reference->set.normalization()));
  });
}

sg_status sg_denormalize(const sg_profile_set* set, sg_profile_set** out) {
  return guarded([&] {
    require(set, "set");
    require(out, "out");
    *out = wrap(ingest::denormalize(set->set));
  });
}

sg_status sg_config_validate(const char* kind, const char* json_text) {
  return guarded([&] {
    require(kind, "kind");
    const json j = parse_json(json_text, kind);
    const std::string k = kind;
    if (k == "gmm")
      gmm::gmm_config_from_json(j);
    else if (k == "deep")
      deepgen::train_config_from_json(j);
    else if (k == "evaluate")
      metrics::evaluation_config_from_json(j);
    else if (k == "hems")
      hems::hems_config_from_json(j);
    else
      throw ParameterError("unknown config kind '" + k + "'");
  });
}

sg_status sg_gmm_fit(const sg_profile_set* train, const char* config_json, sg_gmm** out) {
  return guarded([&] {
    require(train, "train");
    require(out, "out");
    const auto cfg = gmm::gmm_config_from_json(parse_json(config_json, "gmm config"));
    *out = new sg_gmm{gmm::fit_gmm(train->set, cfg)};
  });
}

sg_status sg_gmm_save(const sg_gmm* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    gmm::save_gmm(model->model, path);
  });
}

sg_status sg_gmm_load(const char* path, sg_gmm** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sg_gmm{gmm::load_gmm(path)};
  });
}

sg_status sg_gmm_sample(const sg_gmm* model, int64_t n_days, uint64_t seed, sg_profile_set** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = wrap(gmm::sample_gmm(model->model, n_days, seed));
  });
}

sg_status sg_gmm_info_json(const sg_gmm* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    ordered_json j{{"components", model->model.components()},
                   {"log_likelihood_trace", model->model.log_likelihood_trace},
                   {"warnings", model->model.warnings}};
    *out = dup_string(j.dump());
  });
}

void sg_gmm_free(sg_gmm* model) { delete model; }

sg_status sg_deep_train(const sg_profile_set* train, const char* config_json, const char* checkpoint_dir,
                        sg_deep_model** out) {
  return guarded([&] {
    require(train, "train");
    require(out, "out");
    const auto cfg = deepgen::train_config_from_json(parse_json(config_json, "deep config"));
    deepgen::TrainOptions opts;
    if (checkpoint_dir) opts.checkpoint_dir = checkpoint_dir;
    if (cfg.model_type == "vaegan")
      *out = new sg_deep_model{deepgen::train_vaegan(train->set, cfg, opts), cfg};
    else
      *out = new sg_deep_model{deepgen::train_vanilla_gan(train->set, cfg, opts), cfg};
  });
}

sg_status sg_deep_load(const char* checkpoint_dir, sg_deep_model** out) {
  return guarded([&] {
    require(checkpoint_dir, "checkpoint_dir");
    require(out, "out");
    const auto type = deepgen::checkpoint_model_type(checkpoint_dir);
    const auto cfg = deepgen::checkpoint_config(checkpoint_dir);
    if (type == "vaegan")
      *out = new sg_deep_model{deepgen::load_vaegan(checkpoint_dir), cfg};
    else if (type == "gan")
      *out = new sg_deep_model{deepgen::load_vanilla_gan(checkpoint_dir), cfg};
    else
      throw SchemaError("unknown model_type '" + type + "'");
  });
}

sg_status sg_deep_save(const sg_deep_model* model, const char* checkpoint_dir) {
  return guarded([&] {
    require(model, "model");
    require(checkpoint_dir, "checkpoint_dir");
    std::visit([&](const auto& m) { deepgen::save_checkpoint(m, model->config, checkpoint_dir); }, model->model);
  });
}

sg_status sg_deep_generate(const sg_deep_model* model, int64_t n_days, uint64_t seed, sg_profile_set** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    if (const auto* v = std::get_if<deepgen::VaeGanModel>(&model->model))
      *out = wrap(deepgen::generate_vaegan(*v, n_days, seed));
    else
      *out = wrap(deepgen::generate_gan(std::get<deepgen::VanillaGanModel>(model->model), n_days, seed));
  });
}

sg_status sg_deep_info_json(const sg_deep_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto& meta = std::visit([](const auto& m) -> const deepgen::ModelMeta& { return m.meta; }, model->model);
    ordered_json hist = ordered_json::object();
    for (const auto& [name, curve] : meta.history) hist[name] = curve;
    ordered_json j{{"model_type", model->config.model_type},
                   {"epochs_completed", meta.epochs_completed},
                   {"loss_history", hist}};
    *out = dup_string(j.dump());
  });
}

void sg_deep_free(sg_deep_model* model) { delete model; }

sg_status sg_evaluate(const sg_profile_set* real, const sg_profile_set* synth, const char* options_json,
                      char** report_json) {
  return guarded([&] {
    require(real, "real");
    require(synth, "synth");
    require(report_json, "report_json");
    const auto cfg = metrics::evaluation_config_from_json(parse_json(options_json, "evaluate config"));
    *report_json = dup_string(metrics::to_json(metrics::evaluate_generator(real->set, synth->set, cfg)).dump());
  });
}

sg_status sg_summary_table(const char* reports_json, char** csv) {
  return guarded([&] {
    require(reports_json, "reports_json");
    require(csv, "csv");
    const json arr = parse_json(reports_json, "reports");
    if (!arr.is_array()) throw SchemaError("reports must be a JSON array");
    std::vector<metrics::DistanceReport> reports;
    for (const auto& r : arr) reports.push_back(metrics::report_from_json(r));
    *csv = dup_string(metrics::summary_table_csv(reports));
  });
}

sg_status sg_price_schedule_json(const char* path, char** out) {
  return guarded([&] {
    require(out, "out");
    const auto p = path ? hems::load_price_schedule(path) : hems::PriceSchedule::two_tier();
    *out = dup_string(prices_to_json(p).dump());
  });
}

sg_status sg_hems_run(const sg_profile_set* train_load, const sg_profile_set* train_pv, const sg_profile_set* train_ev,
                      const sg_profile_set* test_load, const sg_profile_set* test_pv, const sg_profile_set* test_ev,
                      const char* config_json, const char* prices_json, uint64_t seed, sg_hems_result** out) {
  return guarded([&] {
    for (const auto* p : {train_load, train_pv, train_ev, test_load, test_pv, test_ev}) require(p, "profile set");
    require(out, "out");
    const auto cfg = hems::hems_config_from_json(parse_json(config_json, "hems config"));
    const auto prices =
        prices_json ? prices_from_json(parse_json(prices_json, "price schedule")) : hems::PriceSchedule::two_tier();
    const auto train = hems::make_scenario(train_load->set, train_pv->set, train_ev->set);
    const auto test = hems::make_scenario(test_load->set, test_pv->set, test_ev->set);
    auto result = hems::train_offline(train, prices, cfg, seed);
    auto run = std::make_unique<sg_hems_result>();
    for (const auto& log : hems::test_online(result.q, test, prices, cfg)) run->daily_profit.push_back(log.profit);
    for (const auto& day : test) run->optimal_profit.push_back(hems::optimal_day_profit(day, prices, cfg));
    run->q = std::move(result.q);
    run->episode_rewards = std::move(result.episode_rewards);
    *out = run.release();
  });
}

sg_status sg_hems_result_json(const sg_hems_result* run, char** out) {
  return guarded([&] {
    require(run, "run");
    require(out, "out");
    double total = 0.0, optimal = 0.0;
    for (double v : run->daily_profit) total += v;
    for (double v : run->optimal_profit) optimal += v;
    ordered_json j{{"episode_rewards", run->episode_rewards},
                   {"daily_profit", run->daily_profit},
                   {"total_profit", total},
                   {"optimal_daily_profit", run->optimal_profit},
                   {"optimal_total_profit", optimal}};
    *out = dup_string(j.dump());
  });
}

sg_status sg_hems_save_qtable(const sg_hems_result* run, const char* bin_path, const char* json_path) {
  return guarded([&] {
    require(run, "run");
    require(bin_path, "bin_path");
    require(json_path, "json_path");
    hems::save_qtable(run->q, bin_path, json_path);
  });
}

void sg_hems_result_free(sg_hems_result* run) { delete run; }

}  // extern "C"
