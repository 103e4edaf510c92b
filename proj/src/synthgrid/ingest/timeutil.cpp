#include "synthgrid/ingest/timeutil.hpp"

#include <chrono>
#include <cstdio>

#include "synthgrid/common/error.hpp"

namespace synthgrid::ingest {
namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  void skip() { ++pos_; }

  int digits(std::size_t n) {
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (done() || s_[pos_] < '0' || s_[pos_] > '9') fail();
      v = v * 10 + (s_[pos_++] - '0');
    }
    return v;
  }

  void expect(char c) {
    if (peek() != c) fail();
    ++pos_;
  }

  [[noreturn]] void fail() const {
    throw ParameterError("malformed ISO-8601 timestamp '" + std::string(s_) + "'");
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::int64_t days_from_civil(int y, int m, int d) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParameterError("invalid calendar date");
  return sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

UnixSeconds parse_iso8601(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r'))
    text.remove_suffix(1);
  Cursor c(text);
  const int y = c.digits(4);
  c.expect('-');
  const int mo = c.digits(2);
  c.expect('-');
  const int d = c.digits(2);
  std::int64_t days = 0;
  try {
    days = days_from_civil(y, mo, d);
  } catch (const ParameterError&) {
    c.fail();
  }
  if (c.done()) return days * kSecondsPerDay;

  if (c.peek() != 'T' && c.peek() != ' ') c.fail();
  c.skip();
  const int hh = c.digits(2);
  c.expect(':');
  const int mm = c.digits(2);
  int ss = 0;
  if (c.peek() == ':') {
    c.skip();
    ss = c.digits(2);
    if (c.peek() == '.') {
      c.skip();
      // Fractional seconds are truncated.
      while (c.peek() >= '0' && c.peek() <= '9') c.skip();
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) c.fail();
  std::int64_t offset = 0;
  if (c.peek() == 'Z') {
    c.skip();
  } else if (c.peek() == '+' || c.peek() == '-') {
    const int sign = c.peek() == '+' ? 1 : -1;
    c.skip();
    const int oh = c.digits(2);
    if (c.peek() == ':') c.skip();
    const int om = c.digits(2);
    offset = sign * (oh * 3600 + om * 60);
  }
  if (!c.done()) c.fail();
  return days * kSecondsPerDay + hh * 3600 + mm * 60 + ss - offset;
}

std::string format_date(std::int64_t day_number) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day_number}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::int64_t parse_date(std::string_view text) { return day_of(parse_iso8601(text)); }

std::string format_iso8601(UnixSeconds t) {
  const std::int64_t day = day_of(t);
  const std::int64_t sec = t - day * kSecondsPerDay;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%sT%02d:%02d:%02dZ", format_date(day).c_str(),
                static_cast<int>(sec / 3600), static_cast<int>(sec / 60 % 60),
                static_cast<int>(sec % 60));
  return buf;
}

}  // namespace synthgrid::ingest
