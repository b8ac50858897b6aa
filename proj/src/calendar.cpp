#include "saac/calendar.hpp"

#include <charconv>
#include <cstdio>


namespace saac {

namespace chr = std::chrono;

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d))
    return std::nullopt;
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

std::string format_date(Date date) {
  const chr::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int weekday_index(Date date) {
  return static_cast<int>(chr::weekday{date}.iso_encoding()) - 1;
}

Date monday_on_or_before(Date date) { return date - chr::days(weekday_index(date)); }

Date YearMonth::first_day() const {
  return Date{chr::year{year} / chr::month{static_cast<unsigned>(month)} / chr::day{1}};
}

int YearMonth::days() const {
  const chr::year_month_day_last last{chr::year{year} / chr::month{static_cast<unsigned>(month)} /
                                      chr::last};
  return static_cast<int>(static_cast<unsigned>(last.day()));
}

YearMonth YearMonth::next() const {
  return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
}

std::string YearMonth::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

YearMonth YearMonth::of(Date date) {
  const chr::year_month_day ymd{date};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
}

std::optional<YearMonth> YearMonth::parse(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') return std::nullopt;
  int y = 0, m = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m)) return std::nullopt;
  if (m < 1 || m > 12) return std::nullopt;
  return YearMonth{y, m};
}

int month_of(Date date) { return YearMonth::of(date).month; }

int day_of_month(Date date) {
  return static_cast<int>(static_cast<unsigned>(chr::year_month_day{date}.day()));
}

Semester semester_of(Date date) { return month_of(date) < 7 ? Semester::Spring : Semester::Fall; }

bool in_spring_window(Date date) {
  const int m = month_of(date);
  return m >= 2 && m <= 5;
}

bool in_fall_window(Date date) {
  const int m = month_of(date);
  return m >= 9 && m <= 11;
}

const char* to_string(Semester s) noexcept { return s == Semester::Spring ? "spring" : "fall"; }

}  // namespace saac
