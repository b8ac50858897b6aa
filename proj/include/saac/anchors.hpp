#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saac/calendar.hpp"
#include "saac/signal.hpp"

namespace saac::anchors {

inline constexpr int kHoursPerWeek = 168;

/// Screening thresholds for anchor weeks. These defaults are the published
/// values and the single place they are defined; stage logic reads them from
/// here or from a configuration override.
struct AnchorParams {
  int savgol_window = 13;
  int savgol_order = 3;
  signal::PeakCriteria peaks{.min_height = 15.0, .min_prominence = 8.0, .min_distance = 12, .min_width = 3.0};

  // Half-open hour-of-day windows [start, end).
  int school_hour_start = 7;
  int school_hour_end = 17;
  int after_school_start = 17;
  int after_school_end = 22;
  int weekend_day_start = 7;
  int weekend_day_end = 17;

  double baseline_fraction = 0.5;
  std::size_t min_baseline_peaks = 3;

  double gathering_median_multiple = 2.0;
  double after_school_min_hourly = 10.0;  // flag needs max hourly >= this
  double weekend_min_hourly = 20.0;       // flag needs max hourly > this

  int typical_hour = 11;
  double typical_percentile = 80.0;

  int min_school_days = 4;
  double max_gathering_ratio = 0.2;
  double max_osf = 7.0;
};

struct SchoolWeekRecord {
  std::string poi_id;
  std::string county;
  Date week_start{};  // Monday
  HourlySeries hourly_visits;  // 168 values from week_start 00:00
  std::int64_t weekly_distinct_devices = 0;
};

/// Checks the 168-hour / Monday alignment invariants.
void validate(const SchoolWeekRecord& record);

struct SchoolDayLabel {
  Date date{};
  bool is_school_day = false;
  double peak_height = 0.0;
  Semester semester = Semester::Spring;
};

enum class GatheringKind { AfterSchool, WeekendDaytime };
const char* to_string(GatheringKind kind) noexcept;

struct GatheringEvent {
  Date date{};
  GatheringKind kind = GatheringKind::AfterSchool;
  double total_events = 0.0;
  int peak_hour = 0;
  double peak_events = 0.0;
};

struct SemesterBaselines {
  std::optional<double> spring;
  std::optional<double> fall;

  /// Baseline used to judge `date`. Falls back to the other semester when the
  /// date's own semester has none.
  double for_date(Date date) const;
};

/// Median after-school and weekend-daytime totals per half-year.
struct GatheringMedians {
  double after_school_spring = 0.0;
  double after_school_fall = 0.0;
  double weekend_spring = 0.0;
  double weekend_fall = 0.0;

  double after_school(Semester s) const { return s == Semester::Spring ? after_school_spring : after_school_fall; }
  double weekend(Semester s) const { return s == Semester::Spring ? weekend_spring : weekend_fall; }
};

enum class Rejection {
  TooFewSchoolDays,
  GatheringPeaksExceedTypical,
  GatheringRatioExceeded,
  OsfCapExceeded,
  ZeroTypicalCount,
  NoBaseline,
};
const char* to_string(Rejection r) noexcept;

struct AnchorWeekSummary {
  std::string poi_id;
  std::string county;
  Date week_start{};
  YearMonth month;
  int n_school_days = 0;
  double school_hour_events = 0.0;
  double gathering_events = 0.0;
  double typical_hourly_count = 0.0;
  std::int64_t weekly_distinct_devices = 0;
  bool accepted = false;
  std::vector<Rejection> rejection_reasons;
};

/// Highest smoothed daytime peak per weekday date of the record. Dates without
/// a daytime peak are absent.
std::map<Date, double> daytime_peak_heights(const SchoolWeekRecord& record, const AnchorParams& params);

/// Medians of weekday daytime peak heights inside the spring (Feb-May) and fall
/// (Sep-Nov) windows. A semester needs `min_baseline_peaks` observations.
/// Throws ErrorKind::NoBaseline when neither semester qualifies.
SemesterBaselines semester_baselines(const std::map<Date, double>& daily_peaks, const AnchorParams& params);

/// One label per day of the record's week, from precomputed daytime peaks.
std::vector<SchoolDayLabel> identify_school_days(const SchoolWeekRecord& record,
                                                 const std::map<Date, double>& daily_peaks,
                                                 const SemesterBaselines& baselines,
                                                 const AnchorParams& params);

/// Same, smoothing and peak-finding the record first.
std::vector<SchoolDayLabel> identify_school_days(const SchoolWeekRecord& record, const SemesterBaselines& baselines,
                                                 const AnchorParams& params);

/// Semester medians of after-school totals on school days and of weekend
/// daytime totals, across every week supplied for one school.
GatheringMedians gathering_medians(const std::vector<SchoolWeekRecord>& records,
                                   const std::vector<std::vector<SchoolDayLabel>>& labels,
                                   const AnchorParams& params);

std::vector<GatheringEvent> detect_gatherings(const SchoolWeekRecord& record,
                                              const std::vector<SchoolDayLabel>& labels,
                                              const GatheringMedians& medians,
                                              const AnchorParams& params);

AnchorWeekSummary summarize_week(const SchoolWeekRecord& record,
                                 const std::vector<SchoolDayLabel>& labels,
                                 const std::vector<GatheringEvent>& gatherings,
                                 const AnchorParams& params);

/// Runs the whole screening for one school's weeks (any order). A school
/// without baselines gets every week rejected with NoBaseline.
std::vector<AnchorWeekSummary> screen_school(std::vector<SchoolWeekRecord> records,
                                             const AnchorParams& params);

}  // namespace saac::anchors
