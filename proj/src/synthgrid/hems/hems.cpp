#include "synthgrid/hems/hems.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "synthgrid/common/error.hpp"
#include "synthgrid/common/json_fields.hpp"
#include "synthgrid/ingest/ingest.hpp"

namespace synthgrid::hems {
namespace {

constexpr double kSocTolerance = 1e-9;

std::size_t power_bin(double v, double lo, double hi, int bins) {
  if (!(hi > lo) || bins <= 1) return 0;
  const double f = (v - lo) / (hi - lo) * bins;
  if (f <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(f), static_cast<std::size_t>(bins - 1));
}

}  // namespace

PriceSchedule PriceSchedule::two_tier() {
  PriceSchedule p;
  for (std::size_t t = 0; t < kStepsPerDay; ++t) {
    const bool peak = t >= 7 * 4 && t < 22 * 4;
    p.buy[t] = peak ? 0.20 : 0.10;
    p.sell[t] = peak ? 0.10 : 0.05;
  }
  return p;
}

void PriceSchedule::validate() const {
  for (std::size_t t = 0; t < kStepsPerDay; ++t) {
    if (!(sell[t] > 0.0) || !(buy[t] > 0.0))
      throw ParameterError("prices must be positive (slot " + std::to_string(t) + ")");
    if (sell[t] > buy[t]) throw ParameterError("sell price exceeds buy price in slot " + std::to_string(t));
  }
}

PriceSchedule load_price_schedule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  PriceSchedule p;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto& slots = j.at("slots");
    if (!slots.is_array() || slots.size() != kStepsPerDay)
      throw SchemaError(path.string() + ": expected 96 price slots");
    for (std::size_t t = 0; t < kStepsPerDay; ++t) {
      p.buy[t] = slots[t].at("buy").get<double>();
      p.sell[t] = slots[t].at("sell").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  p.validate();
  return p;
}

void save_price_schedule(const PriceSchedule& prices, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  auto slots = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < kStepsPerDay; ++t) slots.push_back({{"buy", prices.buy[t]}, {"sell", prices.sell[t]}});
  j["slots"] = slots;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void HemsConfig::validate() const {
  if (!(charge_power_kw > 0.0)) throw ParameterError("charge_power_kw must be positive");
  if (!(capacity_kwh > 0.0)) throw ParameterError("capacity_kwh must be positive");
  if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 1.0))
    throw ParameterError("SOC bounds must satisfy 0 <= soc_min < soc_max <= 1");
  if (!(soc_initial >= soc_min && soc_initial <= soc_max)) throw ParameterError("soc_initial must lie within [soc_min, soc_max]");
  if (!(step_hours > 0.0)) throw ParameterError("step_hours must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0, 1]");
  if (!(gamma_d >= 0.0 && gamma_d < 1.0)) throw ParameterError("gamma_d must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ParameterError("epsilon must lie in [0, 1]");
  if (!(epsilon_final >= 0.0 && epsilon_final <= 1.0)) throw ParameterError("epsilon_final must lie in [0, 1]");
  if (episodes <= 0) throw ParameterError("episodes must be positive");
  if (soc_bins <= 0 || pv_bins <= 0 || load_bins <= 0 || time_bins <= 0)
    throw ParameterError("bin counts must be positive");
  if (time_bins > static_cast<int>(kStepsPerDay)) throw ParameterError("time_bins must not exceed 96");
}

#define SG_HEMS_FIELDS(X)                                                                             \
  X(charge_power_kw) X(capacity_kwh) X(soc_min) X(soc_max) X(soc_initial) X(step_hours) X(alpha) X(gamma_d) \
  X(epsilon) X(epsilon_decay) X(epsilon_final) X(episodes) X(soc_bins) X(pv_bins) X(load_bins) X(time_bins)

HemsConfig hems_config_from_json(const nlohmann::json& j) {
  HemsConfig c;
  JsonFields f(j, "hems config");
#define X(name) f.read(#name, c.name);
  SG_HEMS_FIELDS(X)
#undef X
  f.finish();
  c.validate();
  return c;
}

nlohmann::ordered_json to_json(const HemsConfig& c) {
  nlohmann::ordered_json j;
#define X(name) j[#name] = c.name;
  SG_HEMS_FIELDS(X)
#undef X
  return j;
}

bool feasible(double soc, Action action, const HemsConfig& config) {
  switch (action) {
    case Action::kCharge:
      return soc + config.soc_step() <= config.soc_max + kSocTolerance;
    case Action::kDischarge:
      return soc - config.soc_step() >= config.soc_min - kSocTolerance;
    case Action::kIdle:
      return true;
  }
  return false;
}

StepResult step(const HemsState& state, Action action, const PriceSchedule& prices, const HemsConfig& config) {
  const Action applied = feasible(state.soc, action, config) ? action : Action::kIdle;
  const double q = static_cast<double>(static_cast<int>(applied));
  const double p_ess = config.charge_power_kw * q;
  const double p_total = p_ess + state.pv_kw - state.load_kw - state.ev_kw;
  const bool selling = p_total > 0.0;
  const std::size_t slot = state.slot % kStepsPerDay;
  const double price = selling ? prices.sell[slot] : prices.buy[slot];
  const double reward = p_total * config.step_hours * price;

  StepResult r;
  r.next = state;
  if (applied != Action::kIdle)
    r.next.soc = std::clamp(state.soc - p_ess * config.step_hours / config.capacity_kwh, config.soc_min,
                            config.soc_max);
  r.next.slot = state.slot + 1;
  r.reward = reward;
  r.log = StepLog{state.slot, state.soc, state.pv_kw, state.load_kw, state.ev_kw, action, applied,
                  p_ess,      p_total,   selling,     price,         reward};
  return r;
}

std::vector<DayProfile> make_scenario(const DailyProfileSet& load, const DailyProfileSet& pv,
                                      const DailyProfileSet& ev) {
  if (load.empty() || pv.empty() || ev.empty()) throw ParameterError("scenario needs non-empty load, pv and ev sets");
  const auto raw = [](const DailyProfileSet& s) { return s.normalized() ? ingest::denormalize(s) : s; };
  const DailyProfileSet l = raw(load), p = raw(pv), e = raw(ev);
  const std::size_t n = std::max({l.days(), p.days(), e.days()});
  std::vector<DayProfile> days(n);
  for (std::size_t d = 0; d < n; ++d) {
    const auto lr = l.row(d % l.days());
    const auto pr = p.row(d % p.days());
    const auto er = e.row(d % e.days());
    for (std::size_t t = 0; t < kStepsPerDay; ++t) {
      days[d].load_kw[t] = std::max(lr[t], 0.0) / 1000.0;
      days[d].pv_kw[t] = std::max(pr[t], 0.0) / 1000.0;
      days[d].ev_kw[t] = std::max(er[t], 0.0) / 1000.0;
    }
  }
  return days;
}

StateBins::StateBins(const HemsConfig& config, double pv_lo_, double pv_hi_, double load_lo_, double load_hi_)
    : soc_bins(config.soc_bins),
      pv_bins(config.pv_bins),
      load_bins(config.load_bins),
      time_bins(config.time_bins),
      soc_lo(config.soc_min),
      soc_hi(config.soc_max),
      pv_lo(pv_lo_),
      pv_hi(pv_hi_),
      load_lo(load_lo_),
      load_hi(load_hi_) {}

StateBins StateBins::from_scenario(const HemsConfig& config, std::span<const DayProfile> days) {
  if (days.empty()) throw ParameterError("empty scenario");
  double pv_lo = std::numeric_limits<double>::infinity(), pv_hi = -pv_lo;
  double ld_lo = pv_lo, ld_hi = -pv_lo;
  for (const auto& d : days)
    for (std::size_t t = 0; t < kStepsPerDay; ++t) {
      pv_lo = std::min(pv_lo, d.pv_kw[t]);
      pv_hi = std::max(pv_hi, d.pv_kw[t]);
      const double total = d.load_kw[t] + d.ev_kw[t];
      ld_lo = std::min(ld_lo, total);
      ld_hi = std::max(ld_hi, total);
    }
  return StateBins(config, pv_lo, pv_hi, ld_lo, ld_hi);
}

StateBins::Tuple StateBins::bins_of(const HemsState& s) const {
  Tuple t;
  t.soc = power_bin(s.soc, soc_lo, soc_hi, soc_bins);
  t.pv = power_bin(s.pv_kw, pv_lo, pv_hi, pv_bins);
  t.load = power_bin(s.total_load_kw(), load_lo, load_hi, load_bins);
  t.time = (s.slot % kStepsPerDay) * static_cast<std::size_t>(time_bins) / kStepsPerDay;
  return t;
}

std::size_t StateBins::compose(const Tuple& t) const {
  return ((t.soc * static_cast<std::size_t>(pv_bins) + t.pv) * static_cast<std::size_t>(load_bins) + t.load) *
             static_cast<std::size_t>(time_bins) +
         t.time;
}

StateBins::Tuple StateBins::decompose(std::size_t index) const {
  Tuple t;
  t.time = index % static_cast<std::size_t>(time_bins);
  index /= static_cast<std::size_t>(time_bins);
  t.load = index % static_cast<std::size_t>(load_bins);
  index /= static_cast<std::size_t>(load_bins);
  t.pv = index % static_cast<std::size_t>(pv_bins);
  t.soc = index / static_cast<std::size_t>(pv_bins);
  return t;
}

std::size_t StateBins::index(const HemsState& s) const { return compose(bins_of(s)); }

std::size_t StateBins::state_count() const {
  return static_cast<std::size_t>(soc_bins) * static_cast<std::size_t>(pv_bins) *
         static_cast<std::size_t>(load_bins) * static_cast<std::size_t>(time_bins);
}

double QTable::max_value(std::size_t index) const {
  const double* row = q_.data() + index * kActions.size();
  return std::max({row[0], row[1], row[2]});
}

Action QTable::argmax(std::size_t index) const {
  const double* row = q_.data() + index * kActions.size();
  std::size_t best = 0;
  for (std::size_t a = 1; a < kActions.size(); ++a)
    if (row[a] > row[best]) best = a;
  return kActions[best];
}

void q_update(QTable& q, std::size_t index, Action action, double reward, std::optional<std::size_t> next,
              const HemsConfig& config) {
  const double future = next ? q.max_value(*next) : 0.0;
  double& cell = q.at(index, action);
  cell += config.alpha * (reward + config.gamma_d * future - cell);
}

Action select_action(const QTable& q, std::size_t index, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, 2);
    return kActions[static_cast<std::size_t>(pick(rng))];
  }
  return q.argmax(index);
}

namespace {

HemsState state_at(const DayProfile& day, std::size_t t, double soc) {
  return HemsState{soc, day.pv_kw[t], day.load_kw[t], day.ev_kw[t], t};
}

}  // namespace

TrainResult train_offline(std::span<const DayProfile> synthetic, const PriceSchedule& prices,
                          const HemsConfig& config, std::uint64_t seed) {
  if (synthetic.empty()) throw ParameterError("offline training needs at least one synthetic day");
  config.validate();
  prices.validate();
  TrainResult out{QTable(StateBins::from_scenario(config, synthetic)), {}};
  out.episode_rewards.reserve(static_cast<std::size_t>(config.episodes));
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_day(0, synthetic.size() - 1);
  const auto& bins = out.q.bins();

  for (int ep = 0; ep < config.episodes; ++ep) {
    double eps = config.epsilon;
    if (config.epsilon_decay && config.episodes > 1)
      eps = config.epsilon + (config.epsilon_final - config.epsilon) * ep / (config.episodes - 1);
    const DayProfile& day = synthetic[pick_day(rng)];
    HemsState s = state_at(day, 0, config.soc_initial);
    std::size_t idx = bins.index(s);
    double total = 0.0;
    for (std::size_t t = 0; t < kStepsPerDay; ++t) {
      const Action a = select_action(out.q, idx, eps, rng);
      const auto r = step(s, a, prices, config);
      total += r.reward;
      std::optional<std::size_t> next;
      if (t + 1 < kStepsPerDay) {
        s = state_at(day, t + 1, r.next.soc);
        next = bins.index(s);
      }
      q_update(out.q, idx, a, r.reward, next, config);
      if (next) idx = *next;
    }
    out.episode_rewards.push_back(total);
  }
  return out;
}

namespace {

template <typename Policy>
EpisodeLog run_day(const DayProfile& day, const PriceSchedule& prices, const HemsConfig& config, Policy&& policy) {
  EpisodeLog log;
  log.steps.reserve(kStepsPerDay);
  double soc = config.soc_initial;
  for (std::size_t t = 0; t < kStepsPerDay; ++t) {
    const HemsState s = state_at(day, t, soc);
    const auto r = step(s, policy(s), prices, config);
    log.steps.push_back(r.log);
    log.profit += r.reward;
    soc = r.next.soc;
  }
  return log;
}

}  // namespace

EpisodeLog run_greedy_day(const QTable& q, const DayProfile& day, const PriceSchedule& prices,
                          const HemsConfig& config) {
  return run_day(day, prices, config, [&](const HemsState& s) { return q.argmax(q.bins().index(s)); });
}

EpisodeLog run_random_day(const DayProfile& day, const PriceSchedule& prices, const HemsConfig& config, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, 2);
  return run_day(day, prices, config, [&](const HemsState&) { return kActions[static_cast<std::size_t>(pick(rng))]; });
}

std::vector<EpisodeLog> test_online(const QTable& q, std::span<const DayProfile> real, const PriceSchedule& prices,
                                    const HemsConfig& config) {
  if (real.empty()) throw ParameterError("online test needs at least one real day");
  config.validate();
  std::vector<EpisodeLog> logs;
  logs.reserve(real.size());
  for (const auto& day : real) logs.push_back(run_greedy_day(q, day, prices, config));
  return logs;
}

double optimal_day_profit(const DayProfile& day, const PriceSchedule& prices, const HemsConfig& config,
                          std::size_t horizon) {
  config.validate();
  if (horizon > kStepsPerDay) throw ParameterError("horizon exceeds one day");
  const double delta = config.soc_step();
  const auto below = static_cast<int>(std::floor((config.soc_initial - config.soc_min) / delta + kSocTolerance));
  const auto above = static_cast<int>(std::floor((config.soc_max - config.soc_initial) / delta + kSocTolerance));
  const auto levels = static_cast<std::size_t>(below + above + 1);
  const auto soc_of = [&](std::size_t k) {
    return config.soc_initial + (static_cast<double>(k) - static_cast<double>(below)) * delta;
  };

  std::vector<double> value(levels, 0.0), next(levels, 0.0);
  for (std::size_t t = horizon; t-- > 0;) {
    for (std::size_t k = 0; k < levels; ++k) {
      double best = -std::numeric_limits<double>::infinity();
      for (Action a : kActions) {
        const auto r = step(state_at(day, t, soc_of(k)), a, prices, config);
        const int shift = -static_cast<int>(r.log.applied);
        best = std::max(best, r.reward + value[static_cast<std::size_t>(static_cast<int>(k) + shift)]);
      }
      next[k] = best;
    }
    std::swap(value, next);
  }
  return value[static_cast<std::size_t>(below)];
}

void save_qtable(const QTable& q, const std::filesystem::path& bin_path, const std::filesystem::path& json_path) {
  {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + bin_path.string());
    for (double v : q.values()) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
    if (!out) throw IoError("write failed for " + bin_path.string());
  }
  const auto& b = q.bins();
  nlohmann::ordered_json j;
  j["format"] = "float32-le";
  j["layout"] = "[state][action]";
  j["actions"] = {-1, 0, 1};
  j["states"] = q.states();
  j["index_order"] = {"soc", "pv", "load", "time"};
  j["bins"] = {{"soc", b.soc_bins}, {"pv", b.pv_bins}, {"load", b.load_bins}, {"time", b.time_bins}};
  j["ranges"] = {{"soc", {b.soc_lo, b.soc_hi}}, {"pv_kw", {b.pv_lo, b.pv_hi}}, {"load_kw", {b.load_lo, b.load_hi}}};
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw IoError("cannot write " + json_path.string());
  js << j.dump(2) << '\n';
}

QTable load_qtable(const std::filesystem::path& bin_path, const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw IoError("cannot open " + json_path.string());
  StateBins b;
  try {
    const auto j = nlohmann::json::parse(js);
    b.soc_bins = j.at("bins").at("soc").get<int>();
    b.pv_bins = j.at("bins").at("pv").get<int>();
    b.load_bins = j.at("bins").at("load").get<int>();
    b.time_bins = j.at("bins").at("time").get<int>();
    b.soc_lo = j.at("ranges").at("soc").at(0).get<double>();
    b.soc_hi = j.at("ranges").at("soc").at(1).get<double>();
    b.pv_lo = j.at("ranges").at("pv_kw").at(0).get<double>();
    b.pv_hi = j.at("ranges").at("pv_kw").at(1).get<double>();
    b.load_lo = j.at("ranges").at("load_kw").at(0).get<double>();
    b.load_hi = j.at("ranges").at("load_kw").at(1).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(json_path.string() + ": " + e.what());
  }
  QTable q(b);
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + bin_path.string());
  for (double& v : q.values()) {
    std::uint32_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof(bits))) throw SchemaError(bin_path.string() + ": truncated");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    v = static_cast<double>(std::bit_cast<float>(bits));
  }
  return q;
}

}  // namespace synthgrid::hems
