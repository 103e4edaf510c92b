#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace synthgrid::ingest {

// Seconds since 1970-01-01T00:00:00Z.
using UnixSeconds = std::int64_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;

// Accepts `YYYY-MM-DD[T| ]HH:MM[:SS[.frac]][Z|+HH:MM|-HH:MM]` and a bare
// `YYYY-MM-DD`. Timestamps without an offset are taken as UTC.
// Throws ParameterError on malformed input.
UnixSeconds parse_iso8601(std::string_view text);

std::string format_iso8601(UnixSeconds t);
std::string format_date(std::int64_t day_number);
std::int64_t parse_date(std::string_view text);

// Floor division onto the day grid (days since epoch).
inline std::int64_t day_of(UnixSeconds t) {
  return t >= 0 ? t / kSecondsPerDay : -((-t + kSecondsPerDay - 1) / kSecondsPerDay);
}

}  // namespace synthgrid::ingest
