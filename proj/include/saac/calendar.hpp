#pragma once

// Local-time calendar helpers. Every timestamp handled by the pipeline is
// already in local time, so there is no timezone arithmetic anywhere.

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace saac {

using Date = std::chrono::sys_days;

/// Parses an ISO `YYYY-MM-DD` date.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);

/// 0 = Monday ... 6 = Sunday.
int weekday_index(Date date);
inline bool is_weekend(Date date) { return weekday_index(date) >= 5; }

/// The Monday on or before `date`.
Date monday_on_or_before(Date date);

struct YearMonth {
  int year = 1970;
  int month = 1;  // 1..12

  auto operator<=>(const YearMonth&) const = default;

  Date first_day() const;
  int days() const;
  int hours() const { return 24 * days(); }
  YearMonth next() const;
  std::string str() const;  // YYYY-MM

  static YearMonth of(Date date);
  static std::optional<YearMonth> parse(std::string_view text);
};

int month_of(Date date);
int day_of_month(Date date);

/// Spring baselines cover February-May, fall baselines September-November.
enum class Semester { Spring, Fall };

/// Dates before July 1 belong to the spring half of the year.
Semester semester_of(Date date);
bool in_spring_window(Date date);
bool in_fall_window(Date date);

const char* to_string(Semester s) noexcept;

}  // namespace saac
