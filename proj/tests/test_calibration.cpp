#include <random>

#include "doctest.h"
#include "saac/calibration.hpp"
#include "saac/error.hpp"

using namespace saac;
using namespace saac::calibration;

namespace {

WeekOsfSample sample(const std::string& county, int month, std::int64_t u, double e, int year = 2022) {
  return {county, YearMonth{year, month}, u, e};
}

}  // namespace

TEST_CASE("county-month ratio of totals") {
  const std::vector<WeekOsfSample> one{sample("A", 3, 5, 2)};
  CHECK(aggregate_county_month(one)->k == 2.5);
  const std::vector<WeekOsfSample> two{sample("A", 3, 100, 40), sample("A", 3, 80, 40)};
  CHECK(aggregate_county_month(two)->k == 2.25);
  const std::vector<WeekOsfSample> same(3, sample("A", 3, 27, 10));
  const auto k = aggregate_county_month(same);
  CHECK(k->k == doctest::Approx(2.7));
  CHECK(k->provenance == Provenance::Direct);
  CHECK_FALSE(aggregate_county_month({}));
  const std::vector<WeekOsfSample> mixed{sample("A", 3, 5, 2), sample("B", 3, 5, 2)};
  CHECK_THROWS_AS(aggregate_county_month(mixed), Error);
}

TEST_CASE("splitting a sample keeps the aggregate") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<WeekOsfSample> s;
    for (int i = 0; i < 5; ++i) s.push_back(sample("A", 4, 10 + static_cast<std::int64_t>(rng() % 200), 5.0 + rng() % 50));
    const double k = aggregate_county_month(s)->k;
    auto split = s;
    const auto last = split.back();
    split.pop_back();
    split.push_back({last.county, last.month, last.weekly_distinct_devices / 2, last.typical_hourly_count / 4});
    split.push_back({last.county, last.month, last.weekly_distinct_devices - last.weekly_distinct_devices / 2,
                     last.typical_hourly_count * 3 / 4});
    CHECK(aggregate_county_month(split)->k == doctest::Approx(k).epsilon(1e-9));
  }
}

TEST_CASE("temporal completion from February, May and September") {
  const auto out = temporal_complete({{{2022, 2}, 2.0}, {{2022, 5}, 3.0}, {{2022, 9}, 5.0}});
  CHECK(out.at({2022, 1}) == OsfEntry{2.0, Provenance::TemporalCompletion});
  CHECK(out.at({2022, 6}) == OsfEntry{3.0, Provenance::TemporalCompletion});
  CHECK(out.at({2022, 8}) == OsfEntry{5.0, Provenance::TemporalCompletion});
  CHECK(out.at({2022, 7}).k == (3.0 + 5.0) / 2.0);
  CHECK(out.at({2022, 7}).provenance == Provenance::TemporalCompletion);
  CHECK(out.at({2022, 2}).provenance == Provenance::Direct);
  CHECK(out.size() == 7);
}

TEST_CASE("temporal completion never overwrites and never chains") {
  std::map<YearMonth, double> full;
  for (int m = 1; m <= 12; ++m) full[{2022, m}] = m;
  const auto same = temporal_complete(full);
  CHECK(same.size() == 12);
  for (const auto& [m, e] : same) {
    CHECK(e.provenance == Provenance::Direct);
    CHECK(e.k == full.at(m));
  }
  const auto may_only = temporal_complete({{{2022, 5}, 3.0}});
  CHECK(may_only.size() == 2);
  CHECK(may_only.at({2022, 6}).k == 3.0);
  CHECK_FALSE(may_only.count({2022, 7}));
  CHECK_FALSE(may_only.count({2022, 8}));
  CHECK_FALSE(may_only.count({2022, 1}));
  const auto two_years = temporal_complete({{{2022, 2}, 2.0}, {{2023, 9}, 4.0}});
  CHECK(two_years.at({2022, 1}).k == 2.0);
  CHECK(two_years.at({2023, 8}).k == 4.0);
  CHECK_FALSE(two_years.count({2023, 1}));
}

TEST_CASE("state fallback fills missing county-months from state totals") {
  const StateOf states{{"A", "S"}, {"B", "S"}};
  const std::vector<WeekOsfSample> s{sample("A", 3, 100, 40), sample("A", 4, 90, 30), sample("B", 4, 200, 80)};
  const std::set<YearMonth> months{{2022, 3}, {2022, 4}};
  const auto table = build_osf_table(s, states, months);
  CHECK(table.at("B", {2022, 3}).k == 2.5);  // state March: 100 / 40
  CHECK(table.at("B", {2022, 3}).provenance == Provenance::StateFallback);
  CHECK(table.at("A", {2022, 4}).k == 3.0);
  CHECK(table.at("A", {2022, 4}).provenance == Provenance::Direct);
  CHECK(table.at("B", {2022, 4}).k == 2.5);
  CHECK(table.size() == 4);
}

TEST_CASE("state totals use raw samples across counties") {
  const StateOf states{{"A", "S"}, {"B", "S"}, {"C", "S"}};
  const std::vector<WeekOsfSample> s{sample("A", 3, 200, 100), sample("B", 3, 100, 20)};
  const auto t = build_osf_table(s, states, {{2022, 3}});
  CHECK(t.at("C", {2022, 3}).k == 2.5);  // 300 / 120, not the mean of 2 and 5
}

TEST_CASE("single-county state and unchanged tables") {
  const StateOf states{{"A", "S"}};
  const std::vector<WeekOsfSample> s{sample("A", 5, 30, 10), sample("A", 9, 50, 10)};
  const auto t = build_osf_table(s, states, {{2022, 5}, {2022, 7}, {2022, 9}});
  CHECK(t.at("A", {2022, 7}).k == 4.0);
  CHECK(t.at("A", {2022, 7}).provenance == Provenance::TemporalCompletion);
  const auto again = state_fallback(t, s, states, {{2022, 5}, {2022, 7}, {2022, 9}});
  CHECK(again.rows().size() == t.rows().size());
}

TEST_CASE("no cross-state borrowing") {
  const StateOf states{{"A", "S1"}, {"B", "S2"}};
  const std::vector<WeekOsfSample> s{sample("A", 3, 100, 40)};
  try {
    build_osf_table(s, states, {{2022, 3}});
    FAIL("expected Unresolved");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unresolved);
    CHECK(std::string(e.what()).find("B@2022-03") != std::string::npos);
  }
}

TEST_CASE("table guards") {
  OsfTable t;
  CHECK_THROWS_AS(t.set("A", {2022, 1}, {0.0, Provenance::Direct}), Error);
  CHECK_THROWS_AS(t.at("A", {2022, 1}), Error);
  CHECK(parse_provenance("state_fallback") == Provenance::StateFallback);
  CHECK_FALSE(parse_provenance("guess"));
}

TEST_CASE("only accepted weeks become samples") {
  anchors::AnchorWeekSummary a, r;
  a.accepted = true;
  a.county = "A";
  a.month = {2022, 3};
  a.weekly_distinct_devices = 10;
  a.typical_hourly_count = 4;
  r = a;
  r.accepted = false;
  const std::vector<anchors::AnchorWeekSummary> all{a, r};
  const auto s = samples_from(all);
  REQUIRE(s.size() == 1);
  CHECK(s[0].week_osf() == 2.5);
}
