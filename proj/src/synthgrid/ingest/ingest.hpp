#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "synthgrid/ingest/types.hpp"

namespace synthgrid::ingest {

// Maps CSV header names onto the two roles the loader needs.
struct PowerColumns {
  std::string timestamp = "timestamp";
  std::string power = "power_w";
};

// Rows may arrive in any order; the result is sorted ascending. Duplicate
// timestamps raise SchemaError, a bad row raises RowError with its line.
RawSeries load_power_csv(const std::filesystem::path& path, Channel channel,
                         const PowerColumns& columns = {});
RawSeries parse_power_csv(std::istream& in, Channel channel, const PowerColumns& columns = {});

// Columns user_id,plug_in,plug_out,energy_kwh (any order, extras ignored).
std::vector<EvSession> load_ev_sessions_csv(const std::filesystem::path& path);
std::vector<EvSession> parse_ev_sessions_csv(std::istream& in);

// Arithmetic mean per window, windows aligned to UTC midnight. Windows that
// receive no samples are absent from the output.
RawSeries resample_mean(const RawSeries& series, std::int64_t step_seconds = kStepSeconds);

struct CleanStats {
  std::size_t days_seen = 0;
  std::size_t days_kept = 0;
};

// Keeps days with all 96 quarter-hour windows present. Throws EmptySetError
// when nothing survives.
DailyProfileSet clean_full_days(const RawSeries& series, CleanStats* stats = nullptr);

// Constant-power charging from the window containing plug-in until the
// session energy is delivered; sessions superpose. Output covers whole days
// from the first plug-in day through the last plug-out day on the 15-min grid.
RawSeries ev_sessions_to_load(std::span<const EvSession> sessions, double level_power_kw);

// Chronological: earliest floor(ratio * n) days train, the rest test.
std::pair<DailyProfileSet, DailyProfileSet> split_train_test(const DailyProfileSet& set,
                                                             double ratio = 0.8);

// Min-max scaling with statistics taken from `set` itself.
DailyProfileSet normalize(const DailyProfileSet& set);
// Min-max scaling with externally supplied (train) statistics.
DailyProfileSet normalize_with(const DailyProfileSet& set, const NormalizationRecord& record);
DailyProfileSet denormalize(const DailyProfileSet& set);

}  // namespace synthgrid::ingest
