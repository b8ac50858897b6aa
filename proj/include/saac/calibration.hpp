#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "saac/anchors.hpp"
#include "saac/calendar.hpp"

namespace saac::calibration {

/// One accepted anchor week: distinct devices over typical hourly events.
struct WeekOsfSample {
  std::string county;
  YearMonth month;
  std::int64_t weekly_distinct_devices = 0;
  double typical_hourly_count = 0.0;

  double week_osf() const { return static_cast<double>(weekly_distinct_devices) / typical_hourly_count; }
};

/// Samples from accepted summaries only.
std::vector<WeekOsfSample> samples_from(std::span<const anchors::AnchorWeekSummary> summaries);

enum class Provenance { Direct, TemporalCompletion, StateFallback };
const char* to_string(Provenance p) noexcept;
std::optional<Provenance> parse_provenance(std::string_view text);

struct OsfEntry {
  double k = 0.0;
  Provenance provenance = Provenance::Direct;

  bool operator==(const OsfEntry&) const = default;
};

struct CountyMonthOsf {
  std::string county;
  YearMonth month;
  double k = 0.0;
  Provenance provenance = Provenance::Direct;
};

/// k = sum(devices) / sum(typical events) for one county-month. Empty input, or
/// a zero device total, yields no entry.
std::optional<CountyMonthOsf> aggregate_county_month(std::span<const WeekOsfSample> samples);

/// Fills January from February, June from May, August from September and July
/// from the mean of May and September, using only direct donors of the same
/// year. Months whose donors are missing stay absent.
std::map<YearMonth, OsfEntry> temporal_complete(const std::map<YearMonth, double>& direct);

/// county -> state crosswalk.
using StateOf = std::map<std::string, std::string>;

class OsfTable {
 public:
  const OsfEntry* find(const std::string& county, YearMonth month) const;
  const OsfEntry& at(const std::string& county, YearMonth month) const;
  void set(const std::string& county, YearMonth month, OsfEntry entry);

  std::vector<CountyMonthOsf> rows() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, YearMonth>, OsfEntry> entries_;
};

/// Direct county-month values followed by temporal completion, per county.
OsfTable county_table(std::span<const WeekOsfSample> samples);

/// Completes `table` for every county in `state_of` and every month in
/// `months`: missing entries take the state-wide ratio of totals for that
/// month (itself temporally completed). Direct and completed entries are never
/// overwritten. Throws ErrorKind::Unresolved naming every county-month that
/// stays uncovered.
OsfTable state_fallback(OsfTable table, std::span<const WeekOsfSample> samples, const StateOf& state_of,
                        const std::set<YearMonth>& months);

/// aggregate -> temporal completion -> state fallback.
OsfTable build_osf_table(std::span<const WeekOsfSample> samples, const StateOf& state_of,
                         const std::set<YearMonth>& months);

}  // namespace saac::calibration
