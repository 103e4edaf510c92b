#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "support/fixtures.hpp"
#include "synthgrid/common/error.hpp"
#include "synthgrid/ingest/ingest.hpp"
#include "synthgrid/ingest/profile_io.hpp"
#include "synthgrid/ingest/timeutil.hpp"

using namespace synthgrid;
using namespace synthgrid::ingest;

namespace {

RawSeries parse(const std::string& text, Channel ch = Channel::kLoad) {
  std::istringstream in(text);
  return parse_power_csv(in, ch);
}

// `days` consecutive days of 5-minute samples starting 2024-01-01; days in
// `holes` lose one quarter-hour of samples.
RawSeries five_minute_days(int days, const std::vector<int>& holes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2000.0);
  RawSeries s;
  const UnixSeconds start = parse_iso8601("2024-01-01T00:00:00Z");
  for (int d = 0; d < days; ++d) {
    const bool hole = std::find(holes.begin(), holes.end(), d) != holes.end();
    for (int k = 0; k < 288; ++k) {
      if (hole && k / 3 == 40) continue;
      s.timestamps.push_back(start + d * kSecondsPerDay + k * 300);
      s.values.push_back(u(rng));
    }
  }
  return s;
}

EvSession session(const std::string& user, const std::string& in, const std::string& out, double kwh) {
  return EvSession{user, parse_iso8601(in), parse_iso8601(out), kwh};
}

}  // namespace

TEST_CASE("iso timestamps") {
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_iso8601("1970-01-02 00:15") == 86400 + 900);
  CHECK(parse_iso8601("2024-03-01T01:00:00+01:00") == parse_iso8601("2024-03-01T00:00:00Z"));
  CHECK(format_iso8601(parse_iso8601("2023-07-04T12:34:56Z")) == "2023-07-04T12:34:56Z");
  CHECK(format_date(parse_date("2020-02-29")) == "2020-02-29");
  CHECK(day_of(-1) == -1);
  CHECK_THROWS(parse_iso8601("yesterday"));
}

TEST_CASE("power csv parsing") {
  const auto two = parse("timestamp,power_w\n2024-01-01T00:00:00Z,100\n2024-01-01T00:05:00Z,200\n");
  CHECK(two.size() == 2);
  CHECK(two.values[1] == 200.0);

  CHECK_THROWS_AS(parse("timestamp,power_w\n2024-01-01T00:00:00Z,1\n2024-01-01T00:00:00Z,2\n"), SchemaError);
  CHECK_THROWS_AS(parse("timestamp,watts\n2024-01-01T00:00:00Z,1\n"), SchemaError);
  try {
    parse("timestamp,power_w\n2024-01-01T00:00:00Z,1\n2024-01-01T00:05:00Z,abc\n");
    FAIL("expected RowError");
  } catch (const RowError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse("timestamp,power_w\n2024-01-01T00:00:00Z,-5\n"), RowError);
  CHECK_THROWS_AS(parse("timestamp,power_w\n2024-01-01T00:00:00Z,nan\n"), RowError);

  // extra columns ignored, any column order
  const auto extra = parse("site,power_w,timestamp\nA,5,2024-01-01T00:00:00Z\n");
  CHECK(extra.values == std::vector<double>{5.0});
}

TEST_CASE("out-of-order rows come back sorted") {
  const std::vector<std::string> stamps = {"2024-01-01T00:20:00Z", "2024-01-01T00:00:00Z", "2024-01-01T00:10:00Z",
                                           "2024-01-01T00:05:00Z", "2024-01-01T00:15:00Z"};
  std::string csv = "timestamp,power_w\n";
  for (std::size_t i = 0; i < stamps.size(); ++i) csv += stamps[i] + "," + std::to_string(i * 10) + "\n";
  const auto s = parse(csv);

  std::vector<std::pair<UnixSeconds, double>> oracle;
  for (std::size_t i = 0; i < stamps.size(); ++i) oracle.emplace_back(parse_iso8601(stamps[i]), i * 10.0);
  std::sort(oracle.begin(), oracle.end());
  REQUIRE(s.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    CHECK(s.timestamps[i] == oracle[i].first);
    CHECK(s.values[i] == oracle[i].second);
  }
}

TEST_CASE("load_power_csv reads files") {
  const auto path = std::filesystem::temp_directory_path() / "synthgrid_ingest_power.csv";
  {
    std::ofstream(path) << "timestamp,power_w\n2024-01-01T00:00:00Z,1.5\n";
  }
  CHECK(load_power_csv(path, Channel::kPv).values == std::vector<double>{1.5});
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_power_csv(path, Channel::kPv), IoError);
}

TEST_CASE("resample to quarter hours") {
  RawSeries s;
  const UnixSeconds t0 = parse_iso8601("2024-01-01T00:00:00Z");
  for (int k = 0; k < 3; ++k) {
    s.timestamps.push_back(t0 + k * 300);
    s.values.push_back(600.0);
  }
  for (int k = 0; k < 3; ++k) {
    s.timestamps.push_back(t0 + 900 + k * 300);
    s.values.push_back(300.0 * (k + 1));
  }
  // skip the third window entirely
  s.timestamps.push_back(t0 + 2700);
  s.values.push_back(50.0);
  const auto r = resample_mean(s);
  REQUIRE(r.size() == 3);
  CHECK(r.timestamps[0] == t0);
  CHECK(r.values[0] == doctest::Approx(600.0));
  CHECK(r.values[1] == doctest::Approx(600.0));
  CHECK(r.timestamps[2] == t0 + 2700);  // [00:30, 00:45) is missing

  // windows align to midnight even when samples do not
  RawSeries off;
  off.timestamps = {t0 + 420, t0 + 720, t0 + 1020};
  off.values = {1.0, 3.0, 10.0};
  const auto ro = resample_mean(off);
  REQUIRE(ro.size() == 2);
  CHECK(ro.timestamps[0] == t0);
  CHECK(ro.values[0] == doctest::Approx(2.0));
  CHECK(ro.timestamps[1] == t0 + 900);

  RawSeries coarse;
  coarse.timestamps = {t0, t0 + 3600};
  coarse.values = {1.0, 1.0};
  CHECK_THROWS_AS(resample_mean(coarse), ParameterError);
}

TEST_CASE("resampling conserves daily energy") {
  const auto s = five_minute_days(3, {}, 9);
  const auto r = resample_mean(s);
  REQUIRE(r.size() == 3 * kStepsPerDay);
  double src = 0.0, out = 0.0;
  for (double v : s.values) src += v * 300.0;
  for (double v : r.values) out += v * 900.0;
  CHECK(std::abs(src - out) <= 1e-6 * src);
}

TEST_CASE("only complete days survive cleaning") {
  CleanStats stats;
  auto set = clean_full_days(resample_mean(five_minute_days(3, {2}, 1)), &stats);
  CHECK(set.days() == 2);
  CHECK(stats.days_seen == 3);
  CHECK(stats.days_kept == 2);

  CHECK(clean_full_days(resample_mean(five_minute_days(4, {}, 2))).days() == 4);

  const std::vector<int> corrupted = {1, 4, 8};
  set = clean_full_days(resample_mean(five_minute_days(10, corrupted, 3)));
  CHECK(set.days() == 10 - corrupted.size());
  const auto first = parse_iso8601("2024-01-01T00:00:00Z") / kSecondsPerDay;
  for (auto d : set.day_numbers())
    CHECK(std::find(corrupted.begin(), corrupted.end(), static_cast<int>(d - first)) == corrupted.end());

  CHECK_THROWS_AS(clean_full_days(resample_mean(five_minute_days(1, {0}, 4))), EmptySetError);
}

TEST_CASE("ev sessions become a charging load") {
  const std::vector<EvSession> one = {session("a", "2024-01-01T00:00:00Z", "2024-01-01T06:00:00Z", 1.8)};
  const auto load = ev_sessions_to_load(one, 3.6);
  REQUIRE(load.size() == kStepsPerDay);
  CHECK(load.values[0] == doctest::Approx(3600.0));
  CHECK(load.values[1] == doctest::Approx(3600.0));
  for (std::size_t i = 2; i < load.size(); ++i) CHECK(load.values[i] == 0.0);

  const std::vector<EvSession> zero = {session("a", "2024-01-01T03:00:00Z", "2024-01-01T05:00:00Z", 0.0)};
  for (double v : ev_sessions_to_load(zero, 7.2).values) CHECK(v == 0.0);

  const std::vector<EvSession> two = {session("a", "2024-01-01T10:00:00Z", "2024-01-01T12:00:00Z", 3.6),
                                      session("b", "2024-01-01T10:30:00Z", "2024-01-01T13:00:00Z", 3.6)};
  const auto both = ev_sessions_to_load(two, 3.6);
  // a charges 10:00-11:00, b 10:30-11:30
  for (std::size_t w = 0; w < kStepsPerDay; ++w) {
    const double expect = (w >= 40 && w < 44 ? 3600.0 : 0.0) + (w >= 42 && w < 46 ? 3600.0 : 0.0);
    CHECK(both.values[w] == doctest::Approx(expect));
  }
  CHECK(both.values[42] == doctest::Approx(7200.0));

  const std::vector<EvSession> too_much = {session("a", "2024-01-01T00:00:00Z", "2024-01-01T01:00:00Z", 5.0)};
  CHECK_THROWS_AS(ev_sessions_to_load(too_much, 3.6), ValidationError);
  CHECK_THROWS_AS(ev_sessions_to_load(one, 5.0), ParameterError);
}

TEST_CASE("ev energy is conserved within one grid step") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> start_min(0, 60 * 40);
  std::uniform_real_distribution<double> hours(0.5, 10.0), frac(0.0, 1.0);
  for (double level : {3.6, 7.2}) {
    for (int trial = 0; trial < 50; ++trial) {
      const UnixSeconds in = parse_iso8601("2024-01-01T00:00:00Z") + start_min(rng) * 60;
      const double h = hours(rng);
      const EvSession s{"u", in, in + static_cast<UnixSeconds>(h * 3600.0), frac(rng) * level * h};
      const std::vector<EvSession> v = {s};
      const auto load = ev_sessions_to_load(v, level);
      double kwh = 0.0;
      for (double w : load.values) kwh += w / 1000.0 * 0.25;
      CHECK(std::abs(kwh - s.energy_kwh) <= level * 0.25 + 1e-9);
    }
  }
}

TEST_CASE("chronological split") {
  auto set = [](std::size_t n) {
    std::vector<std::int64_t> days(n);
    std::iota(days.begin(), days.end(), 100);
    return DailyProfileSet(Channel::kLoad, std::vector<double>(n * kStepsPerDay, 1.0), days);
  };
  auto [a, b] = split_train_test(set(10), 0.8);
  CHECK(a.days() == 8);
  CHECK(b.days() == 2);
  auto [c, d] = split_train_test(set(594), 0.8);
  CHECK(c.days() == 475);
  CHECK(d.days() == 119);
  auto [e, f] = split_train_test(set(2), 0.8);
  CHECK(e.days() == 1);
  CHECK(f.days() == 1);

  // partition: every day in exactly one half, train strictly before test
  std::vector<std::int64_t> all = c.day_numbers();
  all.insert(all.end(), d.day_numbers().begin(), d.day_numbers().end());
  CHECK(all == set(594).day_numbers());
  CHECK(c.day_numbers().back() < d.day_numbers().front());

  CHECK_THROWS_AS(split_train_test(set(10), 0.0), ParameterError);
  CHECK_THROWS_AS(split_train_test(set(10), 1.0), ParameterError);
  CHECK_THROWS_AS(split_train_test(set(1), 0.5), ParameterError);
}

TEST_CASE("min-max normalization") {
  std::vector<double> v(2 * kStepsPerDay, 500.0);
  v[0] = 0.0;
  v[1] = 1000.0;
  v[2] = 250.0;
  const DailyProfileSet raw(Channel::kLoad, v);
  const auto n = normalize(raw);
  CHECK(n.normalized());
  CHECK(n.values()[0] == 0.0);
  CHECK(n.values()[1] == 1.0);
  CHECK(n.values()[2] == doctest::Approx(0.25));
  CHECK(n.normalization()->min == 0.0);
  CHECK(n.normalization()->max == 1000.0);

  const DailyProfileSet flat(Channel::kPv, std::vector<double>(kStepsPerDay, 3.0));
  CHECK_THROWS_AS(normalize(flat), DegenerateChannelError);
  CHECK_THROWS_AS(denormalize(raw), ContractError);

  // test data scaled with train statistics may leave [0, 1]
  const auto t = normalize_with(DailyProfileSet(Channel::kLoad, std::vector<double>(kStepsPerDay, 2000.0)),
                                *n.normalization());
  CHECK(t.values()[0] == doctest::Approx(2.0));
}

TEST_CASE("normalize round trip") {
  const auto raw = fixtures::sinusoid_days(20, 5);
  const auto back = denormalize(normalize(raw));
  for (std::size_t i = 0; i < raw.values().size(); ++i)
    CHECK(std::abs(back.values()[i] - raw.values()[i]) <= 1e-9 * std::max(1.0, std::abs(raw.values()[i])));
  CHECK(back.day_numbers() == raw.day_numbers());
}

TEST_CASE("profile set files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "synthgrid_ingest_io";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto set = normalize(fixtures::sinusoid_days(4, 6));
  save_profile_set(set, dir / "pv_train.csv");
  CHECK(std::filesystem::exists(dir / "pv_train.json"));
  const auto back = load_profile_set(dir / "pv_train.csv");
  CHECK(back.channel() == Channel::kPv);
  CHECK(back.values() == set.values());
  CHECK(back.day_numbers() == set.day_numbers());
  CHECK(back.normalized());
  CHECK(back.normalization()->max == set.normalization()->max);

  std::filesystem::remove(dir / "pv_train.json");
  CHECK_THROWS(load_profile_set(dir / "pv_train.csv"));
  CHECK(load_profile_set(dir / "pv_train.csv", Channel::kLoad).days() == 4);
  std::filesystem::remove_all(dir);
}
