#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "saac/calendar.hpp"

namespace saac {

/// Start of an hourly series: a local calendar date plus hour of day.
struct LocalHour {
  Date date{};
  int hour = 0;  // 0..23

  auto operator<=>(const LocalHour&) const = default;
};

/// Non-negative hourly counts; consecutive entries are one hour apart.
class HourlySeries {
 public:
  HourlySeries() = default;
  HourlySeries(LocalHour start, std::vector<double> values);

  LocalHour start() const noexcept { return start_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Calendar date and hour-of-day of entry `i`.
  LocalHour at(std::size_t i) const;

 private:
  LocalHour start_{};
  std::vector<double> values_;
};

namespace signal {

/// Least-squares weights that evaluate a degree-`order` polynomial fitted to
/// `window` equally spaced samples at offset `position` (0..window-1).
std::vector<double> savgol_weights(int window, int order, int position);

/// Savitzky-Golay smoothing. Interior points use the centred window; the first
/// and last window/2 points are evaluated on the polynomial fitted to the first
/// (last) full window. Outputs are clamped at zero.
std::vector<double> savgol_smooth(std::span<const double> values, int window, int order);
HourlySeries savgol_smooth(const HourlySeries& series, int window, int order);

struct Peak {
  std::size_t index = 0;
  double height = 0.0;
  double prominence = 0.0;
  double width = 0.0;  // at half prominence, interpolated
  std::size_t left_base = 0;
  std::size_t right_base = 0;
};

struct PeakCriteria {
  double min_height = 0.0;
  double min_prominence = 0.0;
  std::size_t min_distance = 0;
  double min_width = 0.0;
};

/// Local maxima passing the height, distance, prominence and width filters,
/// applied in that order. Plateaus report their midpoint (lower middle for
/// even lengths). The distance filter keeps the higher peak, ties to the lower
/// index. Prominence searches outward until a strictly higher sample.
std::vector<Peak> find_peaks(std::span<const double> values, const PeakCriteria& criteria);

/// Linear-interpolation percentile with rank q/100 * (n-1). q in [0, 100].
double percentile(std::span<const double> values, double q);

/// Median (mean of the middle pair for even counts).
double median(std::span<const double> values);

}  // namespace signal
}  // namespace saac
