#include <random>

#include "doctest.h"
#include "saac/error.hpp"
#include "saac/inbound.hpp"

using namespace saac;
using namespace saac::inbound;

TEST_CASE("expansion factor is residents per tracked device") {
  CHECK(*expansion_factor(1000, 50) == 20.0);
  CHECK(*expansion_factor(0, 10) == 0.0);
  CHECK_FALSE(expansion_factor(1500, 0));
  const std::vector<double> n{1000, 1500}, d{50, 0};
  const auto f = expansion_factors(n, d);
  CHECK(*f[0] == 20.0);
  CHECK_FALSE(f[1]);
}

TEST_CASE("destination expansion is a renormalised device-share mean") {
  const std::vector<std::optional<double>> factors{20.0, 10.0, 20.0, std::nullopt};
  SUBCASE("single origin") {
    const std::vector<OriginCount> o{{0, 7}};
    CHECK(destination_expansion(o, factors).value == 20.0);
  }
  SUBCASE("weighted mean") {
    const std::vector<OriginCount> o{{1, 60}, {2, 40}};
    CHECK(destination_expansion(o, factors).value == doctest::Approx(14.0).epsilon(1e-15));
  }
  SUBCASE("excluded origins drop out of the mix") {
    const std::vector<OriginCount> o{{1, 60}, {2, 40}, {3, 500}};
    const auto e = destination_expansion(o, factors);
    CHECK(e.value == doctest::Approx(14.0).epsilon(1e-15));
    CHECK(e.excluded_origins == 1);
    CHECK(e.included_origins == 2);
  }
  SUBCASE("all excluded") {
    const std::vector<OriginCount> o{{3, 5}};
    const auto e = destination_expansion(o, factors);
    CHECK(e.value == 0.0);
    CHECK(e.included_origins == 0);
  }
}

TEST_CASE("expansion stays within the origin range") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(1.0, 40.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<std::optional<double>> f(n);
    std::vector<OriginCount> o;
    double lo = 1e9, hi = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      f[j] = u(rng);
      o.push_back({static_cast<CbgIndex>(j), static_cast<double>(1 + rng() % 50)});
      lo = std::min(lo, *f[j]);
      hi = std::max(hi, *f[j]);
    }
    const double p = destination_expansion(o, f).value;
    CHECK(p >= lo - 1e-12);
    CHECK(p <= hi + 1e-12);
    std::vector<std::optional<double>> flat(n, 6.5);
    CHECK(destination_expansion(o, flat).value == doctest::Approx(6.5).epsilon(1e-14));
  }
}

TEST_CASE("inbound surface is k * e * P") {
  const std::vector<double> e{0, 10, 3};
  const auto s = inbound_surface(e, 2.5, 14.0);
  CHECK(s.inbound[0] == 0.0);
  CHECK(s.inbound[1] == 350.0);
  CHECK(s.u_hat[1] == 25.0);
  const auto zero = inbound_surface(std::vector<double>(24, 0.0), 2.5, 14.0);
  for (double v : zero.inbound) CHECK(v == 0.0);
  const auto twice = inbound_surface(e, 5.0, 14.0);
  for (std::size_t t = 0; t < e.size(); ++t) {
    CHECK(twice.inbound[t] == 2.0 * s.inbound[t]);
    if (s.u_hat[t] > 0) CHECK(s.inbound[t] / s.u_hat[t] == doctest::Approx(14.0));
  }
}

TEST_CASE("flag names round trip") {
  for (unsigned f = 0; f < 64; ++f) CHECK(parse_flag_names(flag_names(f)) == f);
  CHECK_FALSE(parse_flag_names("nonsense"));
}

TEST_CASE("estimate_month covers every CBG") {
  Geography geo;
  geo.add("A", "C1", "S");
  geo.add("B", "C1", "S");
  geo.add("C", "C2", "S");
  const std::vector<double> residents{1000, 600, 0};
  const YearMonth m{2022, 2};
  const auto hours = static_cast<std::size_t>(m.hours());

  MonthData data;
  data.month = m;
  data.tracked_devices = {50, 0, 0};
  NeighborhoodMonth dest;
  dest.cbg = 1;
  dest.month = m;
  dest.hourly_stops.assign(hours, 0.0);
  dest.hourly_stops[12] = 10;
  dest.origin_devices = {{0, 30}, {1, 10}};
  data.destinations.push_back(dest);

  calibration::OsfTable osf;
  osf.set("C1", m, {2.5, calibration::Provenance::Direct});
  osf.set("C2", m, {3.0, calibration::Provenance::StateFallback});

  const auto out = estimate_month(geo, residents, data, osf);
  REQUIRE(out.by_cbg.size() == 3);
  const auto& b = out.by_cbg[1];
  CHECK(b.expansion == 20.0);
  CHECK(b.inbound[12] == 10 * 2.5 * 20.0);
  CHECK(b.excluded_origins == 1);
  CHECK((b.flags & kExcludedOrigins) != 0);
  CHECK((out.by_cbg[0].flags & kInboundMissing) != 0);
  CHECK(out.by_cbg[0].inbound.size() == hours);
  CHECK((out.by_cbg[2].flags & kOsfFallback) != 0);

  auto bad = data;
  bad.destinations[0].hourly_stops.pop_back();
  CHECK_THROWS_AS(estimate_month(geo, residents, bad, osf), Error);
  calibration::OsfTable partial;
  partial.set("C1", m, {2.5, calibration::Provenance::Direct});
  CHECK_THROWS_AS(estimate_month(geo, residents, data, partial), Error);
}

TEST_CASE("threads do not change inbound") {
  Geography geo;
  std::vector<double> residents;
  const YearMonth m{2022, 4};
  MonthData data;
  data.month = m;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 40; ++i) {
    geo.add("c" + std::to_string(i), "K", "S");
    residents.push_back(500 + rng() % 1000);
    data.tracked_devices.push_back(static_cast<double>(rng() % 100));
  }
  for (CbgIndex c = 0; c < 40; c += 2) {
    NeighborhoodMonth d;
    d.cbg = c;
    d.month = m;
    for (int t = 0; t < m.hours(); ++t) d.hourly_stops.push_back(static_cast<double>(rng() % 20));
    for (CbgIndex j = 0; j < 40; j += 3) d.origin_devices.push_back({j, static_cast<double>(rng() % 9)});
    data.destinations.push_back(d);
  }
  calibration::OsfTable osf;
  osf.set("K", m, {2.2, calibration::Provenance::Direct});
  const auto one = estimate_month(geo, residents, data, osf, 1);
  const auto four = estimate_month(geo, residents, data, osf, 4);
  for (std::size_t c = 0; c < 40; ++c) {
    CHECK(one.by_cbg[c].inbound == four.by_cbg[c].inbound);
    CHECK(one.by_cbg[c].flags == four.by_cbg[c].flags);
  }
}
