#include "saac/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "saac/error.hpp"

namespace saac::synth {

namespace {

enum Purpose : std::uint64_t { kWorld = 1, kSchedule = 2, kObserve = 3 };

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent sub-stream of the master seed.
std::mt19937_64 stream(std::uint64_t seed, Purpose purpose, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ (purpose << 56)) ^ index));
}

double uniform01(std::mt19937_64& rng) { return std::generate_canonical<double, 64>(rng); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::string fmt(const char* pattern, std::size_t a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

constexpr int kErrandEarliest = 9;
constexpr int kErrandLatest = 18;
constexpr int kErrandMaxHours = 3;
constexpr double kLocalErrandShare = 0.8;

}  // namespace

void WorldConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::Config, "invalid world config: " + what);
  };
  check(n_cbgs >= 1, "n_cbgs must be positive");
  check(cbgs_per_county >= 1 && counties_per_state >= 1, "geography grouping sizes must be positive");
  check(residents_min >= 1 && residents_min <= residents_max, "residents range");
  check(penetration_min > 0.0 && penetration_min <= penetration_max && penetration_max <= 1.0,
        "penetration range must lie in (0, 1]");
  check(observation_rate > 0.0 && observation_rate <= 1.0, "observation_rate must lie in (0, 1]");
  check(school_size_min >= 0 && school_size_min <= school_size_max, "school size range");
  check(school_start_hour >= 0 && school_start_hour < school_end_hour && school_end_hour <= 24, "school hours");
  check(commuter_fraction >= 0.0 && commuter_fraction <= 1.0, "commuter_fraction must lie in [0, 1]");
  check(commute_jitter_hours >= 0 && commute_start_hour - commute_jitter_hours >= 0 &&
            commute_end_hour + commute_jitter_hours <= 24 &&
            commute_start_hour + commute_jitter_hours < commute_end_hour - commute_jitter_hours,
        "commute hours and jitter");
  check(local_job_share >= 0.0 && local_job_share <= 1.0, "local_job_share must lie in [0, 1]");
  check(job_center_fraction >= 0.0 && job_center_fraction <= 1.0 && job_center_weight > 0.0, "job centers");
  check(errand_rate >= 0.0 && errand_rate <= 1.0, "errand_rate must lie in [0, 1]");
  check(gathering_rate >= 0.0 && gathering_rate <= 1.0, "gathering_rate must lie in [0, 1]");
  check(months >= 1 && weeks >= 0, "months must be positive and weeks non-negative");
}

std::vector<YearMonth> SimulationSpan::full_months() const {
  std::vector<YearMonth> out;
  const Date end = start + std::chrono::days(days());
  for (YearMonth m = YearMonth::of(start);; m = m.next()) {
    const Date first = m.first_day();
    if (first >= end) break;
    if (first >= start && first + std::chrono::days(m.days()) <= end) out.push_back(m);
  }
  return out;
}

SimulationSpan span_of(const WorldConfig& config) {
  SimulationSpan span;
  span.start = monday_on_or_before(config.start_month.first_day());
  if (config.weeks > 0) {
    span.weeks = config.weeks;
    return span;
  }
  YearMonth last = config.start_month;
  for (int i = 1; i < config.months; ++i) last = last.next();
  const Date end = last.first_day() + std::chrono::days(last.days());
  span.weeks = static_cast<int>(((end - span.start).count() + 6) / 7);
  return span;
}

World generate_world(const WorldConfig& config) {
  config.validate();
  World w;
  w.config = config;
  w.span = span_of(config);
  auto rng = stream(config.seed, kWorld, 0);

  const std::size_t n = config.n_cbgs;
  const std::size_t n_counties = (n + config.cbgs_per_county - 1) / config.cbgs_per_county;
  std::vector<std::vector<CbgIndex>> county_cbgs(n_counties);
  std::vector<double> job_weight(n);
  w.residents.resize(n);
  w.penetration.resize(n);
  w.first_person.assign(n + 1, 0);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t county = c / config.cbgs_per_county;
    const std::size_t state = county / config.counties_per_state;
    const std::string state_id = fmt("%02zu", state + 1);
    const std::string county_id = state_id + fmt("%03zu", county % config.counties_per_state + 1);
    w.geo.add(county_id + fmt("%07zu", c % config.cbgs_per_county + 1), county_id, state_id);
    county_cbgs[county].push_back(static_cast<CbgIndex>(c));

    w.residents[c] = uniform_int(rng, config.residents_min, config.residents_max);
    w.penetration[c] = std::uniform_real_distribution<double>(config.penetration_min, config.penetration_max)(rng);
    if (config.penetration_min == config.penetration_max) w.penetration[c] = config.penetration_min;
    job_weight[c] = uniform01(rng) < config.job_center_fraction ? config.job_center_weight : 1.0;
    w.first_person[c + 1] = w.first_person[c] + static_cast<std::uint32_t>(w.residents[c]);
  }
  w.people.resize(w.first_person[n]);
  for (std::size_t c = 0; c < n; ++c)
    for (auto p = w.first_person[c]; p < w.first_person[c + 1]; ++p) w.people[p].home = static_cast<CbgIndex>(c);

  auto county_pool = [&](std::size_t county) {
    std::vector<std::uint32_t> pool;
    for (CbgIndex c : county_cbgs[county])
      for (auto p = w.first_person[c]; p < w.first_person[c + 1]; ++p) pool.push_back(p);
    return pool;
  };
  auto sample = [&](std::vector<std::uint32_t>& pool, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(pool.size() - i - 1)));
      std::swap(pool[i], pool[j]);
    }
    return std::vector<std::uint32_t>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  };

  for (std::size_t s = 0; s < config.n_schools; ++s) {
    const std::size_t county = s % n_counties;
    School school;
    school.poi_id = fmt("hs-%05zu", s + 1);
    school.cbg = county_cbgs[county][static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(county_cbgs[county].size()) - 1))];
    school.enrolled = uniform_int(rng, config.school_size_min, config.school_size_max);
    auto pool = county_pool(county);
    std::erase_if(pool, [&](std::uint32_t p) { return w.people[p].role == Role::Student; });
    if (pool.size() < static_cast<std::size_t>(school.enrolled))
      fail(ErrorKind::Config, "school " + school.poi_id + " enrolls " + std::to_string(school.enrolled) +
                                  " but only " + std::to_string(pool.size()) + " residents are available");
    for (auto p : sample(pool, static_cast<std::size_t>(school.enrolled))) {
      w.people[p].role = Role::Student;
      w.people[p].school = static_cast<std::int32_t>(s);
      w.people[p].job = school.cbg;
    }
    w.schools.push_back(std::move(school));
  }

  std::discrete_distribution<std::size_t> any_job(job_weight.begin(), job_weight.end());
  std::vector<std::discrete_distribution<std::size_t>> local_job;
  for (const auto& cbgs : county_cbgs) {
    std::vector<double> weights;
    for (CbgIndex c : cbgs) weights.push_back(job_weight[c]);
    local_job.emplace_back(weights.begin(), weights.end());
  }
  for (auto& person : w.people) {
    if (person.role == Role::Student) continue;
    if (uniform01(rng) >= config.commuter_fraction) continue;
    const auto& local = county_cbgs[person.home / config.cbgs_per_county];
    const bool use_local = local.size() > 1 && uniform01(rng) < config.local_job_share;
    if (!use_local && n < 2) continue;
    auto& pick = use_local ? local_job[person.home / config.cbgs_per_county] : any_job;
    CbgIndex job = person.home;
    while (job == person.home) job = use_local ? local[pick(rng)] : static_cast<CbgIndex>(pick(rng));
    person.role = Role::Commuter;
    person.job = job;
  }

  for (std::size_t s = 0; s < w.schools.size(); ++s) {
    const std::size_t county = s % n_counties;
    for (int week = 0; week < w.span.weeks; ++week) {
      if (uniform01(rng) >= config.gathering_rate) continue;
      Gathering g;
      g.school = static_cast<std::int32_t>(s);
      if (uniform01(rng) < 0.5) {
        g.day = 7 * week + uniform_int(rng, 0, 4);
        g.start_hour = 18;
        g.end_hour = 21;
      } else {
        g.day = 7 * week + 5;
        g.start_hour = 10;
        g.end_hour = 14;
      }
      auto pool = county_pool(county);
      const int enrolled = w.schools[s].enrolled;
      const int size = uniform_int(rng, enrolled / 10, std::max(enrolled / 10, 3 * enrolled / 10));
      g.attendees = sample(pool, std::min<std::size_t>(pool.size(), static_cast<std::size_t>(size)));
      std::sort(g.attendees.begin(), g.attendees.end());
      w.gatherings.push_back(std::move(g));
    }
  }
  return w;
}

void World::for_each_person(CbgIndex c, const std::function<void(std::uint32_t, std::span<const Trip>)>& fn) const {
  auto rng = stream(config.seed, kSchedule, c);
  const std::size_t n = geo.size();
  const std::size_t county = c / config.cbgs_per_county;
  const CbgIndex county_first = static_cast<CbgIndex>(county * config.cbgs_per_county);
  const CbgIndex county_last = static_cast<CbgIndex>(std::min(n, (county + 1) * config.cbgs_per_county) - 1);

  // (person, gathering) pairs for this CBG's residents.
  std::vector<std::pair<std::uint32_t, std::size_t>> attending;
  for (std::size_t g = 0; g < gatherings.size(); ++g)
    for (auto p : gatherings[g].attendees)
      if (p >= first_person[c] && p < first_person[c + 1]) attending.emplace_back(p, g);
  std::sort(attending.begin(), attending.end());

  std::vector<Trip> trips;
  auto next = attending.begin();
  const int jitter = config.commute_jitter_hours;
  for (auto p = first_person[c]; p < first_person[c + 1]; ++p) {
    const Person& person = people[p];
    trips.clear();
    for (int day = 0; day < span.days(); ++day) {
      const int base = 24 * day;
      const Gathering* gathering = nullptr;
      for (auto it = next; it != attending.end() && it->first == p; ++it)
        if (gatherings[it->second].day == day) gathering = &gatherings[it->second];

      const double errand_draw = uniform01(rng);
      if (day % 7 < 5 && person.role == Role::Student) {
        trips.push_back({person.job, base + config.school_start_hour, base + config.school_end_hour, person.school});
      } else if (day % 7 < 5 && person.role == Role::Commuter) {
        const int a = jitter ? uniform_int(rng, -jitter, jitter) : 0;
        const int b = jitter ? uniform_int(rng, -jitter, jitter) : 0;
        trips.push_back({person.job, base + config.commute_start_hour + a, base + config.commute_end_hour + b, -1});
      } else if (!gathering && errand_draw < config.errand_rate && n > 1) {
        const int start = uniform_int(rng, kErrandEarliest, kErrandLatest);
        const int hours = uniform_int(rng, 1, kErrandMaxHours);
        const bool local = county_last > county_first && uniform01(rng) < kLocalErrandShare;
        CbgIndex dest = person.home;
        while (dest == person.home)
          dest = local ? static_cast<CbgIndex>(uniform_int(rng, static_cast<int>(county_first), static_cast<int>(county_last)))
                       : static_cast<CbgIndex>(uniform_int(rng, 0, static_cast<int>(n) - 1));
        trips.push_back({dest, base + start, base + std::min(24, start + hours), -1});
      }
      if (gathering)
        trips.push_back({schools[static_cast<std::size_t>(gathering->school)].cbg, base + gathering->start_hour,
                         base + gathering->end_hour, gathering->school});
    }
    while (next != attending.end() && next->first == p) ++next;
    fn(p, trips);
  }
}

GroundTruth ground_truth(const World& w) {
  const std::size_t n = w.geo.size();
  const auto hours = static_cast<std::size_t>(w.span.hours());
  const std::size_t stride = hours + 1;
  std::vector<std::int32_t> present_diff(n * stride, 0), away_diff(n * stride, 0);

  for (std::size_t c = 0; c < n; ++c) {
    w.for_each_person(static_cast<CbgIndex>(c), [&](std::uint32_t p, std::span<const Trip> trips) {
      const CbgIndex home = w.people[p].home;
      for (const auto& t : trips) {
        if (t.dest == home) continue;
        const auto s = static_cast<std::size_t>(t.start_hour), e = static_cast<std::size_t>(t.end_hour);
        ++present_diff[t.dest * stride + s];
        --present_diff[t.dest * stride + e];
        --present_diff[home * stride + s];
        ++present_diff[home * stride + e];
        ++away_diff[home * stride + s];
        --away_diff[home * stride + e];
      }
    });
  }

  GroundTruth truth;
  for (double r : w.residents) truth.total_residents += r;
  for (YearMonth m : w.span.full_months()) {
    MonthTruth mt;
    mt.month = m;
    const auto offset = static_cast<std::size_t>(24 * (m.first_day() - w.span.start).count());
    const auto tau = static_cast<std::size_t>(m.hours());
    mt.present.assign(n, std::vector<double>(tau));
    mt.departures.assign(n, std::vector<double>(tau));
    for (std::size_t c = 0; c < n; ++c) {
      std::int64_t present = 0, away = 0;
      for (std::size_t h = 0; h < offset + tau; ++h) {
        present += present_diff[c * stride + h];
        away += away_diff[c * stride + h];
        if (h >= offset) {
          mt.present[c][h - offset] = w.residents[c] + static_cast<double>(present);
          mt.departures[c][h - offset] = static_cast<double>(away);
        }
      }
    }
    truth.months.push_back(std::move(mt));
  }

  for (std::size_t s = 0; s < w.schools.size(); ++s) {
    for (int week = 0; week < w.span.weeks; ++week) {
      truth.attendance.push_back(
          {w.schools[s].poi_id, w.span.start + std::chrono::days(7 * week), w.schools[s].enrolled});
    }
  }
  return truth;
}

Dataset observe(const World& w) {
  const std::size_t n = w.geo.size();
  const auto hours = static_cast<std::size_t>(w.span.hours());
  const auto months = w.span.full_months();
  const auto weeks = static_cast<std::size_t>(w.span.weeks);
  const double rho = w.config.observation_rate;

  std::vector<int> month_of_hour(hours, -1);
  std::vector<std::size_t> month_offset;
  for (std::size_t m = 0; m < months.size(); ++m) {
    month_offset.push_back(static_cast<std::size_t>(24 * (months[m].first_day() - w.span.start).count()));
    for (std::size_t h = 0; h < static_cast<std::size_t>(months[m].hours()); ++h)
      month_of_hour[month_offset[m] + h] = static_cast<int>(m);
  }

  std::vector<std::vector<std::int32_t>> stops(months.size());
  for (std::size_t m = 0; m < months.size(); ++m) stops[m].assign(n * static_cast<std::size_t>(months[m].hours()), 0);
  std::vector<std::vector<std::uint64_t>> origin_keys(months.size());
  std::vector<std::int32_t> visits(w.schools.size() * weeks * 168, 0);
  std::vector<std::int64_t> devices(w.schools.size() * weeks, 0);
  std::vector<double> panel(n, 0.0);

  std::vector<std::pair<int, CbgIndex>> seen_dest;
  std::vector<std::pair<std::int32_t, std::size_t>> seen_poi;
  for (std::size_t c = 0; c < n; ++c) {
    auto rng = stream(w.config.seed, kObserve, c);
    w.for_each_person(static_cast<CbgIndex>(c), [&](std::uint32_t p, std::span<const Trip> trips) {
      if (uniform01(rng) >= w.penetration[c]) return;
      panel[c] += 1.0;
      const CbgIndex home = w.people[p].home;
      seen_dest.clear();
      seen_poi.clear();
      for (const auto& t : trips) {
        for (int h = t.start_hour; h < t.end_hour; ++h) {
          if (rho < 1.0 && uniform01(rng) >= rho) continue;
          const auto hh = static_cast<std::size_t>(h);
          if (t.dest != home && month_of_hour[hh] >= 0) {
            const auto m = static_cast<std::size_t>(month_of_hour[hh]);
            ++stops[m][t.dest * static_cast<std::size_t>(months[m].hours()) + hh - month_offset[m]];
            seen_dest.emplace_back(month_of_hour[hh], t.dest);
          }
          if (t.poi >= 0) {
            ++visits[(static_cast<std::size_t>(t.poi) * weeks + hh / 168) * 168 + hh % 168];
            seen_poi.emplace_back(t.poi, hh / 168);
          }
        }
      }
      std::sort(seen_dest.begin(), seen_dest.end());
      seen_dest.erase(std::unique(seen_dest.begin(), seen_dest.end()), seen_dest.end());
      for (const auto& [m, dest] : seen_dest)
        origin_keys[static_cast<std::size_t>(m)].push_back((static_cast<std::uint64_t>(dest) << 32) | home);
      std::sort(seen_poi.begin(), seen_poi.end());
      seen_poi.erase(std::unique(seen_poi.begin(), seen_poi.end()), seen_poi.end());
      for (const auto& [poi, week] : seen_poi) ++devices[static_cast<std::size_t>(poi) * weeks + week];
    });
  }

  Dataset d;
  d.geo = w.geo;
  d.residents = w.residents;
  for (std::size_t s = 0; s < w.schools.size(); ++s) {
    for (std::size_t week = 0; week < weeks; ++week) {
      anchors::SchoolWeekRecord r;
      r.poi_id = w.schools[s].poi_id;
      r.county = w.geo.county(w.schools[s].cbg);
      r.week_start = w.span.start + std::chrono::days(7 * static_cast<int>(week));
      const auto* first = visits.data() + (s * weeks + week) * 168;
      r.hourly_visits = HourlySeries({r.week_start, 0}, std::vector<double>(first, first + 168));
      r.weekly_distinct_devices = devices[s * weeks + week];
      d.school_weeks.push_back(std::move(r));
    }
  }

  for (std::size_t m = 0; m < months.size(); ++m) {
    MonthData md;
    md.month = months[m];
    md.tracked_devices = panel;
    const auto tau = static_cast<std::size_t>(months[m].hours());
    auto& keys = origin_keys[m];
    std::sort(keys.begin(), keys.end());
    auto key = keys.begin();
    for (std::size_t c = 0; c < n; ++c) {
      NeighborhoodMonth nm;
      nm.cbg = static_cast<CbgIndex>(c);
      nm.month = months[m];
      const auto* first = stops[m].data() + c * tau;
      nm.hourly_stops.assign(first, first + tau);
      for (; key != keys.end() && (*key >> 32) == c;) {
        const auto origin = static_cast<CbgIndex>(*key & 0xFFFFFFFFu);
        double count = 0.0;
        for (; key != keys.end() && *key == ((static_cast<std::uint64_t>(c) << 32) | origin); ++key) count += 1.0;
        nm.origin_devices.push_back({origin, count});
      }
      const bool any_stop = std::any_of(nm.hourly_stops.begin(), nm.hourly_stops.end(), [](double v) { return v > 0; });
      if (any_stop || !nm.origin_devices.empty()) md.destinations.push_back(std::move(nm));
    }
    d.months.push_back(std::move(md));
  }
  return d;
}

}  // namespace saac::synth
