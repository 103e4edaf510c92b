#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synthgrid/ingest/timeutil.hpp"

namespace synthgrid {

enum class Channel { kLoad, kPv, kEv };

std::string_view to_string(Channel c);
// Throws ParameterError for anything other than load, pv, ev.
Channel parse_channel(std::string_view name);

inline constexpr std::size_t kStepsPerDay = 96;
inline constexpr std::int64_t kStepSeconds = 900;
inline constexpr double kStepHours = 0.25;

namespace ingest {

// Samples of one channel, timestamps strictly increasing.
struct RawSeries {
  Channel channel = Channel::kLoad;
  std::vector<UnixSeconds> timestamps;
  std::vector<double> values;  // watts

  std::size_t size() const { return timestamps.size(); }
};

struct EvSession {
  std::string user_id;
  UnixSeconds plug_in = 0;
  UnixSeconds plug_out = 0;
  double energy_kwh = 0.0;
};

}  // namespace ingest

struct NormalizationRecord {
  double min = 0.0;
  double max = 1.0;
};

// n_days x 96 matrix stored row-major.
class DailyProfileSet {
 public:
  DailyProfileSet() = default;
  DailyProfileSet(Channel channel, std::vector<double> values, std::vector<std::int64_t> days = {});

  Channel channel() const { return channel_; }
  std::size_t days() const { return values_.size() / kStepsPerDay; }
  bool empty() const { return values_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * kStepsPerDay, kStepsPerDay};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * kStepsPerDay, kStepsPerDay}; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Day numbers (days since epoch); empty for synthetic sets.
  const std::vector<std::int64_t>& day_numbers() const { return days_; }

  bool normalized() const { return normalized_; }
  const std::optional<NormalizationRecord>& normalization() const { return record_; }
  void set_normalization(std::optional<NormalizationRecord> rec, bool normalized) {
    record_ = rec;
    normalized_ = normalized;
  }

  DailyProfileSet subset(std::size_t first, std::size_t count) const;

 private:
  Channel channel_ = Channel::kLoad;
  std::vector<double> values_;
  std::vector<std::int64_t> days_;
  std::optional<NormalizationRecord> record_;
  bool normalized_ = false;
};

}  // namespace synthgrid
