#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saac/calendar.hpp"
#include "saac/dataset.hpp"

namespace saac::assembly {

enum Flag : unsigned {
  kClamped = 1u << 0,
  kInboundMissing = 1u << 1,
  kOsfFallback = 1u << 2,
};

std::string flag_names(unsigned flags);
/// Inverse of flag_names; no value if a name is unknown.
std::optional<unsigned> parse_flag_names(std::string_view text);

struct ClampRecord {
  CbgIndex cbg = 0;
  std::size_t hour = 0;
  double pre_clamp = 0.0;
};

/// CBG x hour population, p = N + In - Out, floored at zero. Cell (c, t) is at
/// c * hours + t in every per-cell vector.
struct PopulationSurface {
  std::size_t n_cbgs = 0;
  std::size_t hours = 0;
  std::vector<double> residents;
  std::vector<double> inbound;
  std::vector<double> outbound;
  std::vector<double> raw;         // before clamping
  std::vector<double> population;  // after clamping
  std::vector<unsigned> flags;
  std::vector<ClampRecord> clamps;

  std::size_t cell(std::size_t c, std::size_t t) const { return c * hours + t; }

  /// Sum over clamped cells of (post - pre).
  double clamp_deficit() const;
};

/// `cbg_flags` (optional, per CBG) are copied onto every hour of that CBG.
/// `names` (optional) label CBGs in shape errors.
PopulationSurface assemble(std::span<const double> residents, const std::vector<std::vector<double>>& inbound,
                           const std::vector<std::vector<double>>& outbound,
                           std::span<const unsigned> cbg_flags = {}, std::span<const std::string> names = {});

struct Reference {
  double daytime = 0.0;
  double nighttime = 0.0;
};

struct EvaluationParams {
  int noon_hour = 12;
  int midnight_hour = 0;
};

/// (estimate - reference) / reference; no value unless reference > 0.
std::optional<double> relative_difference(double estimate, double reference);

struct ReferenceRow {
  CbgIndex cbg = 0;
  double noon_mean = 0.0;
  double midnight_mean = 0.0;
  double daytime_ref = 0.0;
  double nighttime_ref = 0.0;
  std::optional<double> noon_diff;
  std::optional<double> midnight_diff;
};

struct ReferenceComparison {
  std::vector<ReferenceRow> rows;
  double mean_abs_noon_diff = 0.0;
  double mean_abs_midnight_diff = 0.0;
  std::size_t excluded_noon = 0;
  std::size_t excluded_midnight = 0;
};

/// Mean of the given hour over the month's Monday-Friday dates.
double weekday_hour_mean(std::span<const double> series, YearMonth month, int hour);

/// Compares weekday-noon and weekday-midnight means against the reference.
/// CBGs without a reference entry are skipped; references <= 0 are excluded
/// and counted.
ReferenceComparison evaluate_reference(const PopulationSurface& surface, YearMonth month,
                                       std::span<const std::optional<Reference>> references,
                                       const EvaluationParams& params = {});

}  // namespace saac::assembly
