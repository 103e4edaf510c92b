#include "synthgrid/ingest/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

#include "synthgrid/common/error.hpp"
#include "synthgrid/ingest/csv.hpp"

namespace synthgrid::ingest {
namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::unordered_map<std::string, std::size_t> header_index(const std::vector<std::string>& header) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx.emplace(header[i], i);
  return idx;
}

std::size_t require_column(const std::unordered_map<std::string, std::size_t>& idx,
                           const std::string& name) {
  auto it = idx.find(name);
  if (it == idx.end()) throw SchemaError("missing column '" + name + "'");
  return it->second;
}

bool blank(const std::string& line) { return trim(line).empty(); }

}  // namespace

RawSeries parse_power_csv(std::istream& in, Channel channel, const PowerColumns& columns) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!blank(line)) break;
  }
  if (blank(line)) throw SchemaError("empty CSV: no header row");
  const auto header = split_csv_line(line);
  const auto idx = header_index(header);
  const std::size_t ts_col = require_column(idx, columns.timestamp);
  const std::size_t p_col = require_column(idx, columns.power);
  const std::size_t need = std::max(ts_col, p_col) + 1;

  std::vector<std::pair<UnixSeconds, double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < need) throw RowError(lineno, "expected at least " + std::to_string(need) + " fields");
    UnixSeconds ts = 0;
    try {
      ts = parse_iso8601(fields[ts_col]);
    } catch (const ParameterError& e) {
      throw RowError(lineno, e.what());
    }
    double v = 0.0;
    if (!parse_double(fields[p_col], v) || !std::isfinite(v))
      throw RowError(lineno, "unparsable power value '" + fields[p_col] + "'");
    if (v < 0.0) throw RowError(lineno, "negative power value");
    rows.emplace_back(ts, v);
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  RawSeries out;
  out.channel = channel;
  out.timestamps.reserve(rows.size());
  out.values.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first == rows[i - 1].first)
      throw SchemaError("duplicate timestamp " + format_iso8601(rows[i].first));
    out.timestamps.push_back(rows[i].first);
    out.values.push_back(rows[i].second);
  }
  return out;
}

RawSeries load_power_csv(const std::filesystem::path& path, Channel channel,
                         const PowerColumns& columns) {
  auto in = open_or_throw(path);
  return parse_power_csv(in, channel, columns);
}

std::vector<EvSession> parse_ev_sessions_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!blank(line)) break;
  }
  if (blank(line)) throw SchemaError("empty CSV: no header row");
  const auto idx = header_index(split_csv_line(line));
  const std::size_t c_user = require_column(idx, "user_id");
  const std::size_t c_in = require_column(idx, "plug_in");
  const std::size_t c_out = require_column(idx, "plug_out");
  const std::size_t c_e = require_column(idx, "energy_kwh");
  const std::size_t need = std::max({c_user, c_in, c_out, c_e}) + 1;

  std::vector<EvSession> sessions;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto f = split_csv_line(line);
    if (f.size() < need) throw RowError(lineno, "expected at least " + std::to_string(need) + " fields");
    EvSession s;
    s.user_id = f[c_user];
    try {
      s.plug_in = parse_iso8601(f[c_in]);
      s.plug_out = parse_iso8601(f[c_out]);
    } catch (const ParameterError& e) {
      throw RowError(lineno, e.what());
    }
    if (!parse_double(f[c_e], s.energy_kwh) || !std::isfinite(s.energy_kwh))
      throw RowError(lineno, "unparsable energy_kwh '" + f[c_e] + "'");
    if (s.energy_kwh < 0.0) throw RowError(lineno, "negative energy_kwh");
    if (s.plug_out <= s.plug_in) throw RowError(lineno, "plug_out must be after plug_in");
    sessions.push_back(std::move(s));
  }
  return sessions;
}

std::vector<EvSession> load_ev_sessions_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_ev_sessions_csv(in);
}

RawSeries resample_mean(const RawSeries& series, std::int64_t step_seconds) {
  if (step_seconds <= 0 || kSecondsPerDay % step_seconds != 0)
    throw ParameterError("resample step must divide one day");
  if (series.size() >= 2) {
    std::int64_t min_gap = series.timestamps[1] - series.timestamps[0];
    for (std::size_t i = 2; i < series.size(); ++i)
      min_gap = std::min(min_gap, series.timestamps[i] - series.timestamps[i - 1]);
    if (min_gap > step_seconds)
      throw ParameterError("source resolution is coarser than the target step");
  }

  RawSeries out;
  out.channel = series.channel;
  std::size_t i = 0;
  while (i < series.size()) {
    const std::int64_t t = series.timestamps[i];
    const std::int64_t window = t >= 0 ? t / step_seconds : -((-t + step_seconds - 1) / step_seconds);
    const UnixSeconds start = window * step_seconds;
    double sum = 0.0;
    std::size_t count = 0;
    while (i < series.size() && series.timestamps[i] < start + step_seconds) {
      sum += series.values[i];
      ++count;
      ++i;
    }
    out.timestamps.push_back(start);
    out.values.push_back(sum / static_cast<double>(count));
  }
  return out;
}

DailyProfileSet clean_full_days(const RawSeries& series, CleanStats* stats) {
  std::map<std::int64_t, std::vector<std::pair<std::size_t, double>>> by_day;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const UnixSeconds t = series.timestamps[i];
    if (t % kStepSeconds != 0) throw ContractError("series is not on the 15-minute grid");
    const std::int64_t day = day_of(t);
    const auto slot = static_cast<std::size_t>((t - day * kSecondsPerDay) / kStepSeconds);
    by_day[day].emplace_back(slot, series.values[i]);
  }

  std::vector<double> values;
  std::vector<std::int64_t> days;
  for (const auto& [day, samples] : by_day) {
    if (samples.size() != kStepsPerDay) continue;
    std::vector<double> row(kStepsPerDay, 0.0);
    for (const auto& [slot, v] : samples) row[slot] = v;
    values.insert(values.end(), row.begin(), row.end());
    days.push_back(day);
  }
  if (stats) {
    stats->days_seen = by_day.size();
    stats->days_kept = days.size();
  }
  if (days.empty()) throw EmptySetError("no complete 24-hour days in series");
  return DailyProfileSet(series.channel, std::move(values), std::move(days));
}

RawSeries ev_sessions_to_load(std::span<const EvSession> sessions, double level_power_kw) {
  if (level_power_kw != 3.6 && level_power_kw != 7.2)
    throw ParameterError("charging level must be 3.6 or 7.2 kW");
  if (sessions.empty()) throw EmptySetError("no charging sessions");

  std::int64_t first_day = day_of(sessions.front().plug_in);
  std::int64_t last_day = day_of(sessions.front().plug_out);
  for (const auto& s : sessions) {
    if (s.plug_out <= s.plug_in) throw ValidationError("session of '" + s.user_id + "': plug_out <= plug_in");
    if (s.energy_kwh < 0.0) throw ValidationError("session of '" + s.user_id + "': negative energy");
    const double deliverable = level_power_kw * static_cast<double>(s.plug_out - s.plug_in) / 3600.0;
    if (s.energy_kwh > deliverable * (1.0 + 1e-9))
      throw ValidationError("session of '" + s.user_id + "' at " + format_iso8601(s.plug_in) +
                            " charges more than the station can deliver");
    first_day = std::min(first_day, day_of(s.plug_in));
    // A plug-out exactly at midnight does not touch the following day.
    last_day = std::max(last_day, day_of(s.plug_out - 1));
  }

  const UnixSeconds origin = first_day * kSecondsPerDay;
  const auto windows = static_cast<std::size_t>((last_day - first_day + 1) * kSecondsPerDay / kStepSeconds);
  std::vector<double> watts(windows, 0.0);
  const double window_kwh = level_power_kw * kStepHours;
  for (const auto& s : sessions) {
    auto w = static_cast<std::size_t>((s.plug_in - origin) / kStepSeconds);
    double remaining = s.energy_kwh;
    while (remaining > 1e-12 && w < windows) {
      const double kwh = std::min(remaining, window_kwh);
      watts[w] += kwh / kStepHours * 1000.0;
      remaining -= kwh;
      ++w;
    }
  }

  RawSeries out;
  out.channel = Channel::kEv;
  out.timestamps.resize(windows);
  for (std::size_t i = 0; i < windows; ++i)
    out.timestamps[i] = origin + static_cast<std::int64_t>(i) * kStepSeconds;
  out.values = std::move(watts);
  return out;
}

std::pair<DailyProfileSet, DailyProfileSet> split_train_test(const DailyProfileSet& set, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ParameterError("split ratio must lie in (0, 1)");
  const std::size_t n = set.days();
  if (n < 2) throw ParameterError("need at least 2 days to split");
  auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  return {set.subset(0, n_train), set.subset(n_train, n - n_train)};
}

DailyProfileSet normalize(const DailyProfileSet& set) {
  if (set.empty()) throw EmptySetError("cannot normalize an empty set");
  const auto [lo, hi] = std::minmax_element(set.values().begin(), set.values().end());
  return normalize_with(set, NormalizationRecord{*lo, *hi});
}

DailyProfileSet normalize_with(const DailyProfileSet& set, const NormalizationRecord& record) {
  if (set.normalized()) throw ContractError("set is already normalized");
  if (!(record.min < record.max))
    throw DegenerateChannelError("channel " + std::string(to_string(set.channel())) +
                                 " is constant (min == max); cannot normalize");
  DailyProfileSet out = set;
  const double span = record.max - record.min;
  for (double& v : out.values()) v = (v - record.min) / span;
  out.set_normalization(record, true);
  return out;
}

DailyProfileSet denormalize(const DailyProfileSet& set) {
  if (!set.normalized() || !set.normalization())
    throw ContractError("set carries no normalization record");
  const auto rec = *set.normalization();
  DailyProfileSet out = set;
  const double span = rec.max - rec.min;
  for (double& v : out.values()) v = v * span + rec.min;
  out.set_normalization(rec, false);
  return out;
}

}  // namespace synthgrid::ingest
