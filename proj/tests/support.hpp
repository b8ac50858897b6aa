#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "saac/anchors.hpp"
#include "saac/calendar.hpp"

namespace support {

inline saac::Date date(const char* iso) { return *saac::parse_date(iso); }

/// Deletes itself on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng{std::random_device{}()};
    path = std::filesystem::temp_directory_path() / ("saac_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

/// Week of hourly visits produced by `value(day, hour)`.
inline saac::anchors::SchoolWeekRecord week(saac::Date monday, const std::function<double(int, int)>& value,
                                            std::int64_t devices = 100, std::string poi = "hs-1",
                                            std::string county = "01001") {
  std::vector<double> v(168);
  for (int d = 0; d < 7; ++d)
    for (int h = 0; h < 24; ++h) v[static_cast<std::size_t>(d * 24 + h)] = value(d, h);
  saac::anchors::SchoolWeekRecord r;
  r.poi_id = std::move(poi);
  r.county = std::move(county);
  r.week_start = monday;
  r.hourly_visits = saac::HourlySeries({monday, 0}, std::move(v));
  r.weekly_distinct_devices = devices;
  return r;
}

/// School-hour plateau of `level` on the listed weekdays, zero elsewhere.
inline std::function<double(int, int)> school_plateau(double level, std::array<bool, 5> days = {1, 1, 1, 1, 1}) {
  return [=](int d, int h) { return d < 5 && days[static_cast<std::size_t>(d)] && h >= 8 && h < 16 ? level : 0.0; };
}

}  // namespace support
