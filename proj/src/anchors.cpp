#include "saac/anchors.hpp"

#include <algorithm>
#include <array>

#include "saac/error.hpp"

namespace saac::anchors {

namespace {

Date day_date(const SchoolWeekRecord& r, int day) { return r.week_start + std::chrono::days(day); }

double hourly(const SchoolWeekRecord& r, int day, int hour) {
  return r.hourly_visits[static_cast<std::size_t>(day * 24 + hour)];
}

struct WindowStats {
  double total = 0.0;
  double max = 0.0;
  int argmax = 0;
};

WindowStats window_stats(const SchoolWeekRecord& r, int day, int start, int end) {
  WindowStats s;
  s.argmax = start;
  for (int h = start; h < end; ++h) {
    const double v = hourly(r, day, h);
    s.total += v;
    if (v > s.max) {
      s.max = v;
      s.argmax = h;
    }
  }
  return s;
}

double median_or_zero(const std::vector<double>& values) {
  return values.empty() ? 0.0 : signal::median(values);
}

}  // namespace

const char* to_string(GatheringKind kind) noexcept {
  return kind == GatheringKind::AfterSchool ? "after_school" : "weekend_daytime";
}

const char* to_string(Rejection r) noexcept {
  switch (r) {
    case Rejection::TooFewSchoolDays: return "TOO_FEW_SCHOOL_DAYS";
    case Rejection::GatheringPeaksExceedTypical: return "GATHERING_PEAKS_EXCEED_TYPICAL";
    case Rejection::GatheringRatioExceeded: return "GATHERING_RATIO_EXCEEDED";
    case Rejection::OsfCapExceeded: return "OSF_CAP_EXCEEDED";
    case Rejection::ZeroTypicalCount: return "ZERO_TYPICAL_COUNT";
    case Rejection::NoBaseline: return "NO_BASELINE";
  }
  return "UNKNOWN";
}

void validate(const SchoolWeekRecord& record) {
  require(record.hourly_visits.size() == kHoursPerWeek,
          "school week " + record.poi_id + " must have 168 hourly values");
  require(record.hourly_visits.start() == LocalHour{record.week_start, 0},
          "school week " + record.poi_id + " must start at week_start 00:00");
  require(weekday_index(record.week_start) == 0,
          "school week " + record.poi_id + " does not start on a Monday");
  require(record.weekly_distinct_devices >= 0, "weekly distinct devices must be non-negative");
}

double SemesterBaselines::for_date(Date date) const {
  const auto& own = semester_of(date) == Semester::Spring ? spring : fall;
  const auto& other = semester_of(date) == Semester::Spring ? fall : spring;
  if (own) return *own;
  if (other) return *other;
  fail(ErrorKind::NoBaseline, "no semester baseline available");
}

std::map<Date, double> daytime_peak_heights(const SchoolWeekRecord& record, const AnchorParams& params) {
  const auto smoothed = signal::savgol_smooth(record.hourly_visits.values(), params.savgol_window,
                                              params.savgol_order);
  std::map<Date, double> heights;
  for (const auto& peak : signal::find_peaks(smoothed, params.peaks)) {
    const int day = static_cast<int>(peak.index / 24);
    const int hour = static_cast<int>(peak.index % 24);
    if (day >= 5 || hour < params.school_hour_start || hour >= params.school_hour_end) continue;
    auto [it, inserted] = heights.emplace(day_date(record, day), peak.height);
    if (!inserted) it->second = std::max(it->second, peak.height);
  }
  return heights;
}

SemesterBaselines semester_baselines(const std::map<Date, double>& daily_peaks, const AnchorParams& params) {
  std::vector<double> spring, fall;
  for (const auto& [date, height] : daily_peaks) {
    if (is_weekend(date)) continue;
    if (in_spring_window(date)) spring.push_back(height);
    if (in_fall_window(date)) fall.push_back(height);
  }
  SemesterBaselines out;
  if (spring.size() >= params.min_baseline_peaks) out.spring = signal::median(spring);
  if (fall.size() >= params.min_baseline_peaks) out.fall = signal::median(fall);
  if (!out.spring && !out.fall)
    fail(ErrorKind::NoBaseline, "no semester has " + std::to_string(params.min_baseline_peaks) +
                                    " weekday daytime peaks");
  return out;
}

std::vector<SchoolDayLabel> identify_school_days(const SchoolWeekRecord& record,
                                                 const std::map<Date, double>& daily_peaks,
                                                 const SemesterBaselines& baselines,
                                                 const AnchorParams& params) {
  std::vector<SchoolDayLabel> labels;
  labels.reserve(7);
  for (int day = 0; day < 7; ++day) {
    SchoolDayLabel label;
    label.date = day_date(record, day);
    label.semester = semester_of(label.date);
    if (day < 5) {
      if (auto it = daily_peaks.find(label.date); it != daily_peaks.end()) {
        label.peak_height = it->second;
        label.is_school_day = it->second > params.baseline_fraction * baselines.for_date(label.date);
      }
    }
    labels.push_back(label);
  }
  return labels;
}

std::vector<SchoolDayLabel> identify_school_days(const SchoolWeekRecord& record, const SemesterBaselines& baselines,
                                                 const AnchorParams& params) {
  return identify_school_days(record, daytime_peak_heights(record, params), baselines, params);
}

GatheringMedians gathering_medians(const std::vector<SchoolWeekRecord>& records,
                                   const std::vector<std::vector<SchoolDayLabel>>& labels,
                                   const AnchorParams& params) {
  require(records.size() == labels.size(), "one label set per record is required");
  std::array<std::vector<double>, 2> after, weekend;
  for (std::size_t w = 0; w < records.size(); ++w) {
    const auto& r = records[w];
    for (int day = 0; day < 7; ++day) {
      const auto s = static_cast<std::size_t>(semester_of(day_date(r, day)));
      if (day < 5) {
        if (labels[w][static_cast<std::size_t>(day)].is_school_day)
          after[s].push_back(window_stats(r, day, params.after_school_start, params.after_school_end).total);
      } else {
        weekend[s].push_back(window_stats(r, day, params.weekend_day_start, params.weekend_day_end).total);
      }
    }
  }
  GatheringMedians m;
  m.after_school_spring = median_or_zero(after[0]);
  m.after_school_fall = median_or_zero(after[1]);
  m.weekend_spring = median_or_zero(weekend[0]);
  m.weekend_fall = median_or_zero(weekend[1]);
  return m;
}

std::vector<GatheringEvent> detect_gatherings(const SchoolWeekRecord& record,
                                              const std::vector<SchoolDayLabel>& labels,
                                              const GatheringMedians& medians,
                                              const AnchorParams& params) {
  require(labels.size() == 7, "detect_gatherings needs seven day labels");
  std::vector<GatheringEvent> events;
  for (int day = 0; day < 7; ++day) {
    const Date date = day_date(record, day);
    const Semester sem = semester_of(date);
    if (day < 5) {
      if (!labels[static_cast<std::size_t>(day)].is_school_day) continue;
      const auto s = window_stats(record, day, params.after_school_start, params.after_school_end);
      if (s.total > params.gathering_median_multiple * medians.after_school(sem) &&
          s.max >= params.after_school_min_hourly)
        events.push_back({date, GatheringKind::AfterSchool, s.total, s.argmax, s.max});
    } else {
      const auto s = window_stats(record, day, params.weekend_day_start, params.weekend_day_end);
      if (s.total > params.gathering_median_multiple * medians.weekend(sem) &&
          s.max > params.weekend_min_hourly)
        events.push_back({date, GatheringKind::WeekendDaytime, s.total, s.argmax, s.max});
    }
  }
  return events;
}

AnchorWeekSummary summarize_week(const SchoolWeekRecord& record,
                                 const std::vector<SchoolDayLabel>& labels,
                                 const std::vector<GatheringEvent>& gatherings,
                                 const AnchorParams& params) {
  require(labels.size() == 7, "summarize_week needs seven day labels");
  AnchorWeekSummary s;
  s.poi_id = record.poi_id;
  s.county = record.county;
  s.week_start = record.week_start;
  s.month = YearMonth::of(record.week_start);
  s.weekly_distinct_devices = record.weekly_distinct_devices;

  std::vector<double> typical_hour_counts;
  for (int day = 0; day < 7; ++day) {
    if (day < 5) {
      typical_hour_counts.push_back(hourly(record, day, params.typical_hour));
      s.gathering_events += window_stats(record, day, params.after_school_start, params.after_school_end).total;
      if (labels[static_cast<std::size_t>(day)].is_school_day) {
        ++s.n_school_days;
        s.school_hour_events += window_stats(record, day, params.school_hour_start, params.school_hour_end).total;
      }
    } else {
      s.gathering_events += window_stats(record, day, params.weekend_day_start, params.weekend_day_end).total;
    }
  }
  s.typical_hourly_count = signal::percentile(typical_hour_counts, params.typical_percentile);

  std::vector<double> peaks;
  for (const auto& g : gatherings) peaks.push_back(g.peak_events);
  std::sort(peaks.begin(), peaks.end(), std::greater<>());
  double two_largest = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(2, peaks.size()); ++i) two_largest += peaks[i];

  auto& why = s.rejection_reasons;
  if (s.n_school_days < params.min_school_days) why.push_back(Rejection::TooFewSchoolDays);
  if (two_largest > s.typical_hourly_count) why.push_back(Rejection::GatheringPeaksExceedTypical);
  if (s.gathering_events > params.max_gathering_ratio * s.school_hour_events)
    why.push_back(Rejection::GatheringRatioExceeded);
  if (s.typical_hourly_count <= 0.0) {
    why.push_back(Rejection::ZeroTypicalCount);
  } else if (static_cast<double>(s.weekly_distinct_devices) > params.max_osf * s.typical_hourly_count) {
    why.push_back(Rejection::OsfCapExceeded);
  }
  s.accepted = why.empty();
  return s;
}

std::vector<AnchorWeekSummary> screen_school(std::vector<SchoolWeekRecord> records,
                                             const AnchorParams& params) {
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.week_start < b.week_start; });
  for (const auto& r : records) validate(r);

  std::vector<std::map<Date, double>> weekly_peaks;
  std::map<Date, double> all_peaks;
  for (const auto& r : records) {
    weekly_peaks.push_back(daytime_peak_heights(r, params));
    all_peaks.insert(weekly_peaks.back().begin(), weekly_peaks.back().end());
  }

  std::vector<AnchorWeekSummary> out;
  SemesterBaselines baselines;
  try {
    baselines = semester_baselines(all_peaks, params);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoBaseline) throw;
    for (const auto& r : records) {
      const std::vector<SchoolDayLabel> none(7);
      auto s = summarize_week(r, none, {}, params);
      s.accepted = false;
      s.rejection_reasons.insert(s.rejection_reasons.begin(), Rejection::NoBaseline);
      out.push_back(std::move(s));
    }
    return out;
  }

  std::vector<std::vector<SchoolDayLabel>> labels;
  for (std::size_t w = 0; w < records.size(); ++w)
    labels.push_back(identify_school_days(records[w], weekly_peaks[w], baselines, params));
  const auto medians = gathering_medians(records, labels, params);
  for (std::size_t w = 0; w < records.size(); ++w) {
    const auto gatherings = detect_gatherings(records[w], labels[w], medians, params);
    out.push_back(summarize_week(records[w], labels[w], gatherings, params));
  }
  return out;
}

}  // namespace saac::anchors
