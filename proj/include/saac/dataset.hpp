#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "saac/anchors.hpp"
#include "saac/calendar.hpp"
#include "saac/calibration.hpp"

namespace saac {

using CbgIndex = std::uint32_t;

/// CBG -> county -> state crosswalk. CBG indices are assigned in insertion order.
class Geography {
 public:
  CbgIndex add(std::string cbg, std::string county, std::string state);

  std::size_t size() const noexcept { return cbgs_.size(); }
  const std::string& cbg(CbgIndex i) const { return cbgs_[i]; }
  const std::string& county(CbgIndex i) const { return counties_[i]; }
  const std::string& state(CbgIndex i) const { return states_[i]; }
  std::optional<CbgIndex> find(std::string_view cbg) const;

  calibration::StateOf state_of_county() const;

 private:
  std::vector<std::string> cbgs_, counties_, states_;
  std::unordered_map<std::string, CbgIndex> index_;
};

struct OriginCount {
  CbgIndex origin = 0;
  double devices = 0.0;
};

/// One destination CBG in one month: hourly visitor stops and the distinct
/// device counts by home CBG.
struct NeighborhoodMonth {
  CbgIndex cbg = 0;
  YearMonth month;
  std::vector<double> hourly_stops;  // 24 * days-in-month
  std::vector<OriginCount> origin_devices;

  double total_origin_devices() const;
};

struct MonthData {
  YearMonth month;
  std::vector<NeighborhoodMonth> destinations;  // sorted by cbg, absent CBGs omitted
  std::vector<double> tracked_devices;          // per CBG; 0 when unreported
};

/// Everything the pipeline consumes, in memory.
struct Dataset {
  Geography geo;
  std::vector<double> residents;  // per CBG
  std::vector<anchors::SchoolWeekRecord> school_weeks;
  std::vector<MonthData> months;
};

}  // namespace saac
