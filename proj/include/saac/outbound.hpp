#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "saac/dataset.hpp"
#include "saac/inbound.hpp"

namespace saac::outbound {

/// Per-hour totals: row_t = sum over destinations of In_c^t.
std::vector<double> build_row_marginals(const inbound::MonthInbound& inbound);

/// Monthly outbound total per origin CBG. Each destination's monthly inbound
/// mass is attributed to its origins in proportion to device share times the
/// origin expansion factor (the terms of the destination's expansion mean).
std::vector<double> build_col_marginals(const MonthData& data, std::span<const double> residents,
                                        const inbound::MonthInbound& inbound);

struct MarginalSpec {
  std::vector<double> rows;  // tau hourly totals
  std::vector<double> cols;  // n monthly origin totals
  double rescale = 1.0;      // factor applied to cols by reconcile
};

struct ReconcileLimits {
  double warn_below = 0.5;
  double warn_above = 2.0;
};

/// Rescales column marginals so the grand totals agree; rows are left as is.
/// Emits a warning when the factor falls outside the limits. Throws
/// ErrorKind::EmptyMonth when either total is zero.
MarginalSpec reconcile(std::vector<double> rows, std::vector<double> cols, const ReconcileLimits& limits = {});

/// Dense tau x n matrix stored column-major in chunks of whole columns.
class TimeOriginMatrix {
 public:
  TimeOriginMatrix() = default;
  TimeOriginMatrix(std::size_t rows, std::size_t cols, double fill = 0.0, std::size_t chunk_cols = 4096);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<double> column(std::size_t j);
  std::span<const double> column(std::size_t j) const;
  double operator()(std::size_t t, std::size_t j) const { return column(j)[t]; }
  double& operator()(std::size_t t, std::size_t j) { return column(j)[t]; }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

 private:
  std::size_t rows_ = 0, cols_ = 0, chunk_cols_ = 1;
  std::vector<std::vector<double>> chunks_;
};

/// Uniform seed over the support of positive marginals (zero on any line with
/// a zero marginal).
TimeOriginMatrix uniform_seed(const MarginalSpec& spec);

struct IpfReport {
  int iterations = 0;
  double max_deviation = 0.0;  // max |line sum - target| / max(target, 1)
  bool converged = false;
};

struct IpfResult {
  TimeOriginMatrix matrix;
  IpfReport report;
};

/// Max line deviation of `x` against the marginals.
double max_deviation(const TimeOriginMatrix& x, const MarginalSpec& spec);

/// Alternating row then column scaling until max_deviation <= tol or max_iter
/// sweeps. Throws ErrorKind::Infeasible when a positive marginal meets an
/// all-zero seed line.
IpfResult ipf(TimeOriginMatrix seed, const MarginalSpec& spec, double tol = 1e-8, int max_iter = 100,
              unsigned threads = 1);

/// Out_c^t = X[t][c], one series per origin CBG.
std::vector<std::vector<double>> extract_outbound(const TimeOriginMatrix& x);

}  // namespace saac::outbound
