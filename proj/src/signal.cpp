#include "saac/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "saac/error.hpp"

namespace saac {

HourlySeries::HourlySeries(LocalHour start, std::vector<double> values)
    : start_(start), values_(std::move(values)) {
  require(start.hour >= 0 && start.hour < 24, "series start hour out of range");
  require(!values_.empty(), "hourly series must not be empty");
  for (double v : values_)
    require(std::isfinite(v) && v >= 0.0, "hourly series values must be finite and non-negative");
}

LocalHour HourlySeries::at(std::size_t i) const {
  const auto offset = static_cast<long long>(start_.hour) + static_cast<long long>(i);
  return {start_.date + std::chrono::days(offset / 24), static_cast<int>(offset % 24)};
}

namespace signal {

std::vector<double> savgol_weights(int window, int order, int position) {
  require(window > 0 && window % 2 == 1, "savgol window must be odd and positive");
  require(order >= 0 && order < window, "savgol order must be below the window length");
  require(position >= 0 && position < window, "savgol position outside window");

  const int half = window / 2;
  const int terms = order + 1;

  // Normal equations G z = a(x0), G = A^T A with A[i][k] = x_i^k on centred x.
  std::vector<long double> gram(static_cast<std::size_t>(terms * (terms + 1)), 0.0L);
  auto g = [&](int r, int c) -> long double& { return gram[static_cast<std::size_t>(r * (terms + 1) + c)]; };
  for (int i = 0; i < window; ++i) {
    const long double x = i - half;
    long double pr = 1.0L;
    for (int r = 0; r < terms; ++r) {
      long double pc = 1.0L;
      for (int c = 0; c < terms; ++c) {
        g(r, c) += pr * pc;
        pc *= x;
      }
      pr *= x;
    }
  }
  const long double x0 = position - half;
  long double p = 1.0L;
  for (int r = 0; r < terms; ++r) {
    g(r, terms) = p;
    p *= x0;
  }

  for (int col = 0; col < terms; ++col) {
    int pivot = col;
    for (int r = col + 1; r < terms; ++r)
      if (std::fabs(g(r, col)) > std::fabs(g(pivot, col))) pivot = r;
    for (int c = 0; c <= terms; ++c) std::swap(g(col, c), g(pivot, c));
    for (int r = 0; r < terms; ++r) {
      if (r == col) continue;
      const long double f = g(r, col) / g(col, col);
      for (int c = col; c <= terms; ++c) g(r, c) -= f * g(col, c);
    }
  }

  std::vector<double> weights(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i) {
    const long double x = i - half;
    long double acc = 0.0L, xp = 1.0L;
    for (int k = 0; k < terms; ++k) {
      acc += xp * (g(k, terms) / g(k, k));
      xp *= x;
    }
    weights[static_cast<std::size_t>(i)] = static_cast<double>(acc);
  }
  return weights;
}

std::vector<double> savgol_smooth(std::span<const double> values, int window, int order) {
  require(window > 0 && window % 2 == 1, "savgol window must be odd and positive");
  require(order >= 0 && order < window, "savgol order must be below the window length");
  require(values.size() >= static_cast<std::size_t>(window),
          "series of length " + std::to_string(values.size()) + " is shorter than window " +
              std::to_string(window));

  const std::size_t n = values.size();
  const std::size_t w = static_cast<std::size_t>(window);
  const std::size_t half = w / 2;
  std::vector<double> out(n);

  auto apply = [&](const std::vector<double>& weights, std::size_t first) {
    double acc = 0.0;
    for (std::size_t k = 0; k < w; ++k) acc += weights[k] * values[first + k];
    return acc;
  };

  const auto centre = savgol_weights(window, order, static_cast<int>(half));
  for (std::size_t i = half; i + half < n; ++i) out[i] = apply(centre, i - half);
  for (std::size_t i = 0; i < half; ++i) {
    out[i] = apply(savgol_weights(window, order, static_cast<int>(i)), 0);
    const std::size_t j = n - half + i;
    out[j] = apply(savgol_weights(window, order, static_cast<int>(half + 1 + i)), n - w);
  }
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return out;
}

HourlySeries savgol_smooth(const HourlySeries& series, int window, int order) {
  return HourlySeries(series.start(), savgol_smooth(series.values(), window, order));
}

namespace {

std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> peaks;
  const std::size_t n = x.size();
  if (n < 3) return peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return peaks;
}

std::vector<std::size_t> select_by_distance(std::span<const double> x,
                                            const std::vector<std::size_t>& peaks,
                                            std::size_t distance) {
  if (distance <= 1 || peaks.size() < 2) return peaks;
  std::vector<std::size_t> order(peaks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[peaks[a]] > x[peaks[b]]; });
  std::vector<bool> keep(peaks.size(), true);
  for (std::size_t idx : order) {
    if (!keep[idx]) continue;
    for (std::size_t k = idx; k-- > 0 && peaks[idx] - peaks[k] < distance;) keep[k] = false;
    for (std::size_t k = idx + 1; k < peaks.size() && peaks[k] - peaks[idx] < distance; ++k)
      keep[k] = false;
  }
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < peaks.size(); ++k)
    if (keep[k]) kept.push_back(peaks[k]);
  return kept;
}

Peak measure(std::span<const double> x, std::size_t index) {
  Peak p;
  p.index = index;
  p.height = x[index];

  double left_min = x[index];
  p.left_base = index;
  for (std::size_t i = index + 1; i-- > 0 && x[i] <= x[index];) {
    if (x[i] < left_min) {
      left_min = x[i];
      p.left_base = i;
    }
  }
  double right_min = x[index];
  p.right_base = index;
  for (std::size_t i = index; i < x.size() && x[i] <= x[index]; ++i) {
    if (x[i] < right_min) {
      right_min = x[i];
      p.right_base = i;
    }
  }
  p.prominence = x[index] - std::max(left_min, right_min);

  const double level = x[index] - 0.5 * p.prominence;
  std::size_t i = index;
  while (i > p.left_base && x[i] > level) --i;
  double left_ip = static_cast<double>(i);
  if (x[i] < level) left_ip += (level - x[i]) / (x[i + 1] - x[i]);

  i = index;
  while (i < p.right_base && x[i] > level) ++i;
  double right_ip = static_cast<double>(i);
  if (x[i] < level) right_ip -= (level - x[i]) / (x[i - 1] - x[i]);

  p.width = right_ip - left_ip;
  return p;
}

}  // namespace

std::vector<Peak> find_peaks(std::span<const double> values, const PeakCriteria& criteria) {
  require(!values.empty(), "find_peaks needs a non-empty series");
  require(criteria.min_height >= 0.0 && criteria.min_prominence >= 0.0 && criteria.min_width >= 0.0,
          "peak thresholds must be non-negative");

  std::vector<std::size_t> candidates;
  for (std::size_t idx : local_maxima(values))
    if (values[idx] >= criteria.min_height) candidates.push_back(idx);
  candidates = select_by_distance(values, candidates, criteria.min_distance);

  std::vector<Peak> peaks;
  for (std::size_t idx : candidates) {
    Peak p = measure(values, idx);
    if (p.prominence >= criteria.min_prominence && p.width >= criteria.min_width) peaks.push_back(p);
  }
  return peaks;
}

double percentile(std::span<const double> values, double q) {
  require(!values.empty(), "percentile of an empty list");
  require(q >= 0.0 && q <= 100.0, "percentile q must be within [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (rank - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> values) { return percentile(values, 50.0); }

}  // namespace signal
}  // namespace saac
