#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <vector>

#include "synthgrid/common/rng.hpp"
#include "synthgrid/ingest/types.hpp"

namespace synthgrid::hems {

// Per-slot tariffs in currency per kWh.
struct PriceSchedule {
  std::array<double, kStepsPerDay> buy{};
  std::array<double, kStepsPerDay> sell{};

  // Peak 07:00-22:00 buys at 0.20 and sells at 0.10; off-peak 0.10 / 0.05.
  static PriceSchedule two_tier();
  // Throws ParameterError unless 0 < sell <= buy in every slot.
  void validate() const;
};

PriceSchedule load_price_schedule(const std::filesystem::path& path);
void save_price_schedule(const PriceSchedule& prices, const std::filesystem::path& path);

struct HemsConfig {
  double charge_power_kw = 4.0;
  double capacity_kwh = 16.0;
  double soc_min = 0.1;
  double soc_max = 0.9;
  double soc_initial = 0.5;
  double step_hours = kStepHours;

  double alpha = 0.8;
  double gamma_d = 0.7;
  double epsilon = 0.05;
  // Linear decay from `epsilon` to `epsilon_final` across the episodes.
  bool epsilon_decay = false;
  double epsilon_final = 0.0;
  int episodes = 5000;

  int soc_bins = 10;
  int pv_bins = 8;
  int load_bins = 8;
  int time_bins = 24;

  void validate() const;
  // SOC change caused by one charging or discharging step.
  double soc_step() const { return charge_power_kw * step_hours / capacity_kwh; }
};

// Keys match the field names; unknown keys raise SchemaError. The result is
// validated.
HemsConfig hems_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const HemsConfig& c);

enum class Action : int { kCharge = -1, kIdle = 0, kDischarge = 1 };
inline constexpr std::array<Action, 3> kActions = {Action::kCharge, Action::kIdle, Action::kDischarge};
inline std::size_t action_slot(Action a) { return static_cast<std::size_t>(static_cast<int>(a) + 1); }

struct HemsState {
  double soc = 0.5;
  double pv_kw = 0.0;
  double load_kw = 0.0;  // household load without the EV
  double ev_kw = 0.0;
  std::size_t slot = 0;

  double total_load_kw() const { return load_kw + ev_kw; }
};

struct StepLog {
  std::size_t slot = 0;
  double soc = 0.0;
  double pv_kw = 0.0;
  double load_kw = 0.0;
  double ev_kw = 0.0;
  Action requested = Action::kIdle;
  Action applied = Action::kIdle;
  double p_ess_kw = 0.0;
  double p_total_kw = 0.0;
  bool selling = false;  // indicator 1{P_total > 0}
  double price = 0.0;
  double reward = 0.0;
};

struct StepResult {
  HemsState next;
  double reward = 0.0;
  StepLog log;
};

// Charging past soc_max or discharging past soc_min is coerced to idle.
bool feasible(double soc, Action action, const HemsConfig& config);
StepResult step(const HemsState& state, Action action, const PriceSchedule& prices, const HemsConfig& config);

// One day of exogenous inputs in kW.
struct DayProfile {
  std::array<double, kStepsPerDay> pv_kw{};
  std::array<double, kStepsPerDay> load_kw{};
  std::array<double, kStepsPerDay> ev_kw{};
};

// Days built from the three channel sets (watts, or normalized with a
// record); shorter sets are cycled up to the longest.
std::vector<DayProfile> make_scenario(const DailyProfileSet& load, const DailyProfileSet& pv,
                                      const DailyProfileSet& ev);

class StateBins {
 public:
  StateBins() = default;
  StateBins(const HemsConfig& config, double pv_lo, double pv_hi, double load_lo, double load_hi);
  // Power ranges taken from the scenario (total load includes the EV).
  static StateBins from_scenario(const HemsConfig& config, std::span<const DayProfile> days);

  std::size_t index(const HemsState& s) const;
  std::size_t state_count() const;

  struct Tuple {
    std::size_t soc, pv, load, time;
  };
  Tuple bins_of(const HemsState& s) const;
  std::size_t compose(const Tuple& t) const;
  Tuple decompose(std::size_t index) const;

  int soc_bins = 10, pv_bins = 8, load_bins = 8, time_bins = 24;
  double soc_lo = 0.0, soc_hi = 1.0, pv_lo = 0.0, pv_hi = 0.0, load_lo = 0.0, load_hi = 0.0;
};

class QTable {
 public:
  QTable() = default;
  explicit QTable(StateBins bins) : bins_(bins), q_(bins.state_count() * kActions.size(), 0.0) {}

  const StateBins& bins() const { return bins_; }
  std::size_t states() const { return bins_.state_count(); }
  double& at(std::size_t index, Action a) { return q_[index * kActions.size() + action_slot(a)]; }
  double at(std::size_t index, Action a) const { return q_[index * kActions.size() + action_slot(a)]; }
  double max_value(std::size_t index) const;
  // Ties resolve to the lowest action value.
  Action argmax(std::size_t index) const;
  const std::vector<double>& values() const { return q_; }
  std::vector<double>& values() { return q_; }

 private:
  StateBins bins_;
  std::vector<double> q_;
};

// Q <- Q + alpha (r + gamma_d max_a Q(next, a) - Q); `next` empty at the horizon.
void q_update(QTable& q, std::size_t index, Action action, double reward, std::optional<std::size_t> next,
              const HemsConfig& config);

Action select_action(const QTable& q, std::size_t index, double epsilon, Rng& rng);

struct TrainResult {
  QTable q;
  std::vector<double> episode_rewards;
};

TrainResult train_offline(std::span<const DayProfile> synthetic, const PriceSchedule& prices,
                          const HemsConfig& config, std::uint64_t seed);

struct EpisodeLog {
  std::vector<StepLog> steps;
  double profit = 0.0;
};

// One greedy day starting from soc_initial.
EpisodeLog run_greedy_day(const QTable& q, const DayProfile& day, const PriceSchedule& prices,
                          const HemsConfig& config);
EpisodeLog run_random_day(const DayProfile& day, const PriceSchedule& prices, const HemsConfig& config, Rng& rng);

// Greedy execution over every real day; no Q updates.
std::vector<EpisodeLog> test_online(const QTable& q, std::span<const DayProfile> real, const PriceSchedule& prices,
                                    const HemsConfig& config);

// Exact optimum of the undiscounted profit over the first `horizon` slots of
// one day, by backward induction over the reachable SOC lattice.
double optimal_day_profit(const DayProfile& day, const PriceSchedule& prices, const HemsConfig& config,
                          std::size_t horizon = kStepsPerDay);

// float32 little-endian dump of Q in [state][action] order plus JSON metadata.
void save_qtable(const QTable& q, const std::filesystem::path& bin_path, const std::filesystem::path& json_path);
QTable load_qtable(const std::filesystem::path& bin_path, const std::filesystem::path& json_path);

}  // namespace synthgrid::hems
