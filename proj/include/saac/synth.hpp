#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "saac/calendar.hpp"
#include "saac/dataset.hpp"

namespace saac::synth {

/// Knobs of the synthetic world. Hours are half-open [start, end) local hours.
struct WorldConfig {
  std::size_t n_cbgs = 50;
  std::size_t cbgs_per_county = 10;
  std::size_t counties_per_state = 5;
  int residents_min = 800;
  int residents_max = 2500;
  double penetration_min = 0.05;
  double penetration_max = 0.15;
  double observation_rate = 0.4;  // P(present device emits an event in an hour)

  std::size_t n_schools = 5;  // placed round-robin over counties
  int school_size_min = 1500;
  int school_size_max = 3000;
  int school_start_hour = 7;
  int school_end_hour = 17;

  double commuter_fraction = 0.35;  // share of non-students with a job trip
  int commute_start_hour = 8;
  int commute_end_hour = 17;
  int commute_jitter_hours = 1;      // start and end each shift by U{-j..j}
  double local_job_share = 0.7;      // jobs inside the home county
  double job_center_fraction = 0.2;  // CBGs drawing extra jobs
  double job_center_weight = 10.0;

  double errand_rate = 0.1;  // P(short trip) per person-day without work/school
  double gathering_rate = 0.0;  // P(non-school-hour gathering) per school-week

  YearMonth start_month{2022, 4};
  int months = 1;
  int weeks = 0;  // > 0 overrides the span derived from `months`
  std::uint64_t seed = 42;

  void validate() const;
};

/// First simulated day (a Monday) and the number of whole weeks simulated.
struct SimulationSpan {
  Date start{};
  int weeks = 0;

  int days() const { return 7 * weeks; }
  int hours() const { return 168 * weeks; }
  /// Calendar months lying entirely inside the span.
  std::vector<YearMonth> full_months() const;
};

SimulationSpan span_of(const WorldConfig& config);

enum class Role : std::uint8_t { Other, Commuter, Student };

struct Person {
  CbgIndex home = 0;
  CbgIndex job = 0;
  std::int32_t school = -1;
  Role role = Role::Other;
};

struct School {
  std::string poi_id;
  CbgIndex cbg = 0;
  std::int32_t enrolled = 0;
};

struct Gathering {
  std::int32_t school = 0;
  int day = 0;  // offset from the span start
  int start_hour = 0;
  int end_hour = 0;
  std::vector<std::uint32_t> attendees;  // person indices
};

/// A trip away from home within one day. `poi` >= 0 when the destination is a
/// school POI.
struct Trip {
  CbgIndex dest = 0;
  int start_hour = 0;  // absolute hour from the span start
  int end_hour = 0;    // exclusive
  std::int32_t poi = -1;
};

/// Residents, roles, schools and gatherings; daily trips are regenerated on
/// demand from per-CBG streams so they never need to be stored.
struct World {
  WorldConfig config;
  SimulationSpan span;
  Geography geo;
  std::vector<double> residents;
  std::vector<double> penetration;
  std::vector<std::uint32_t> first_person;  // persons of CBG c: [first_person[c], first_person[c+1])
  std::vector<Person> people;
  std::vector<School> schools;
  std::vector<Gathering> gatherings;

  /// Calls fn(person_index, trips) for every resident of CBG `c`, in order,
  /// with all of that person's trips over the span sorted by start hour. The
  /// trips depend only on the seed and `c`.
  void for_each_person(CbgIndex c, const std::function<void(std::uint32_t, std::span<const Trip>)>& fn) const;
};

struct MonthTruth {
  YearMonth month;
  std::vector<std::vector<double>> present;     // per CBG, 24 * days
  std::vector<std::vector<double>> departures;  // residents away, per CBG
};

struct SchoolWeekTruth {
  std::string poi_id;
  Date week_start{};
  std::int32_t attendees = 0;
};

struct GroundTruth {
  std::vector<MonthTruth> months;
  std::vector<SchoolWeekTruth> attendance;
  double total_residents = 0.0;
};

/// Residents, roles and schedules plus the true presence surface.
World generate_world(const WorldConfig& config);
GroundTruth ground_truth(const World& world);

/// Panel draws and hourly Bernoulli event emission over the world's trips.
Dataset observe(const World& world);

}  // namespace saac::synth
