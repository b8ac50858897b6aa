#include "saac/outbound.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "saac/error.hpp"
#include "saac/log.hpp"
#include "saac/parallel.hpp"

namespace saac::outbound {

std::vector<double> build_row_marginals(const inbound::MonthInbound& inbound) {
  const auto hours = static_cast<std::size_t>(inbound.month.hours());
  std::vector<double> rows(hours, 0.0);
  for (const auto& d : inbound.by_cbg) {
    require(d.inbound.size() == hours, "inbound series length does not match the month");
    for (std::size_t t = 0; t < hours; ++t) rows[t] += d.inbound[t];
  }
  return rows;
}

std::vector<double> build_col_marginals(const MonthData& data, std::span<const double> residents,
                                        const inbound::MonthInbound& inbound) {
  const std::size_t n = residents.size();
  require(inbound.by_cbg.size() == n, "inbound must cover every CBG");
  const auto factors = inbound::expansion_factors(residents, data.tracked_devices);
  std::vector<double> cols(n, 0.0);
  for (const auto& rec : data.destinations) {
    const auto& dest = inbound.by_cbg[rec.cbg];
    double u_total = 0.0;
    for (double u : dest.u_hat) u_total += u;
    if (u_total <= 0.0) continue;

    double mass = 0.0;
    for (const auto& o : rec.origin_devices)
      if (o.devices > 0.0 && o.origin < n && factors[o.origin]) mass += o.devices;
    if (mass <= 0.0) continue;
    for (const auto& o : rec.origin_devices)
      if (o.devices > 0.0 && o.origin < n && factors[o.origin])
        cols[o.origin] += u_total * (o.devices / mass) * *factors[o.origin];
  }
  return cols;
}

MarginalSpec reconcile(std::vector<double> rows, std::vector<double> cols, const ReconcileLimits& limits) {
  double row_total = 0.0, col_total = 0.0;
  for (double r : rows) {
    require(r >= 0.0 && std::isfinite(r), "row marginals must be finite and non-negative");
    row_total += r;
  }
  for (double c : cols) {
    require(c >= 0.0 && std::isfinite(c), "column marginals must be finite and non-negative");
    col_total += c;
  }
  if (row_total <= 0.0 || col_total <= 0.0)
    fail(ErrorKind::EmptyMonth, "marginal totals must be positive (rows " + std::to_string(row_total) +
                                    ", cols " + std::to_string(col_total) + ")");
  MarginalSpec spec;
  spec.rescale = row_total / col_total;
  for (double& c : cols) c *= spec.rescale;
  spec.rows = std::move(rows);
  spec.cols = std::move(cols);

  std::ostringstream msg;
  msg << "column marginals rescaled by " << spec.rescale;
  if (spec.rescale < limits.warn_below || spec.rescale > limits.warn_above)
    log::warn(msg.str() + " (outside [" + std::to_string(limits.warn_below) + ", " +
              std::to_string(limits.warn_above) + "])");
  else
    log::info(msg.str());
  return spec;
}

TimeOriginMatrix::TimeOriginMatrix(std::size_t rows, std::size_t cols, double fill, std::size_t chunk_cols)
    : rows_(rows), cols_(cols), chunk_cols_(std::max<std::size_t>(chunk_cols, 1)) {
  for (std::size_t first = 0; first < cols; first += chunk_cols_)
    chunks_.emplace_back(rows * std::min(chunk_cols_, cols - first), fill);
}

std::span<double> TimeOriginMatrix::column(std::size_t j) {
  return {chunks_[j / chunk_cols_].data() + (j % chunk_cols_) * rows_, rows_};
}

std::span<const double> TimeOriginMatrix::column(std::size_t j) const {
  return {chunks_[j / chunk_cols_].data() + (j % chunk_cols_) * rows_, rows_};
}

std::vector<double> TimeOriginMatrix::row_sums() const {
  std::vector<double> sums(rows_, 0.0);
  for (std::size_t j = 0; j < cols_; ++j) {
    const auto col = column(j);
    for (std::size_t t = 0; t < rows_; ++t) sums[t] += col[t];
  }
  return sums;
}

std::vector<double> TimeOriginMatrix::col_sums() const {
  std::vector<double> sums(cols_, 0.0);
  for (std::size_t j = 0; j < cols_; ++j)
    for (double v : column(j)) sums[j] += v;
  return sums;
}

TimeOriginMatrix uniform_seed(const MarginalSpec& spec) {
  TimeOriginMatrix x(spec.rows.size(), spec.cols.size());
  for (std::size_t j = 0; j < spec.cols.size(); ++j) {
    if (spec.cols[j] <= 0.0) continue;
    auto col = x.column(j);
    for (std::size_t t = 0; t < spec.rows.size(); ++t) col[t] = spec.rows[t] > 0.0 ? 1.0 : 0.0;
  }
  return x;
}

namespace {

double deviation(double sum, double target) { return std::fabs(sum - target) / std::max(target, 1.0); }

}  // namespace

double max_deviation(const TimeOriginMatrix& x, const MarginalSpec& spec) {
  double worst = 0.0;
  const auto rs = x.row_sums();
  for (std::size_t t = 0; t < rs.size(); ++t) worst = std::max(worst, deviation(rs[t], spec.rows[t]));
  const auto cs = x.col_sums();
  for (std::size_t j = 0; j < cs.size(); ++j) worst = std::max(worst, deviation(cs[j], spec.cols[j]));
  return worst;
}

IpfResult ipf(TimeOriginMatrix seed, const MarginalSpec& spec, double tol, int max_iter, unsigned threads) {
  require(seed.rows() == spec.rows.size() && seed.cols() == spec.cols.size(),
          "seed shape does not match the marginals");
  require(tol > 0.0 && max_iter >= 0, "ipf needs tol > 0 and max_iter >= 0");
  for (std::size_t j = 0; j < seed.cols(); ++j)
    for (double v : seed.column(j))
      require(v >= 0.0 && std::isfinite(v), "ipf seed must be finite and non-negative");

  const auto rs = seed.row_sums();
  for (std::size_t t = 0; t < rs.size(); ++t)
    if (spec.rows[t] > 0.0 && rs[t] <= 0.0)
      fail(ErrorKind::Infeasible, "row " + std::to_string(t) + " has a positive marginal but an all-zero seed");
  const auto cs = seed.col_sums();
  for (std::size_t j = 0; j < cs.size(); ++j)
    if (spec.cols[j] > 0.0 && cs[j] <= 0.0)
      fail(ErrorKind::Infeasible, "column " + std::to_string(j) + " has a positive marginal but an all-zero seed");

  IpfResult result{std::move(seed), {}};
  auto& x = result.matrix;
  auto& report = result.report;
  report.max_deviation = max_deviation(x, spec);
  std::vector<double> factor(x.rows());
  while (report.max_deviation > tol && report.iterations < max_iter) {
    const auto sums = x.row_sums();
    for (std::size_t t = 0; t < factor.size(); ++t) factor[t] = sums[t] > 0.0 ? spec.rows[t] / sums[t] : 0.0;
    parallel_for(x.cols(), threads, [&](std::size_t j) {
      auto col = x.column(j);
      for (std::size_t t = 0; t < col.size(); ++t) col[t] *= factor[t];
    });
    parallel_for(x.cols(), threads, [&](std::size_t j) {
      auto col = x.column(j);
      double s = 0.0;
      for (double v : col) s += v;
      const double f = s > 0.0 ? spec.cols[j] / s : 0.0;
      for (double& v : col) v *= f;
    });
    ++report.iterations;
    report.max_deviation = max_deviation(x, spec);
  }
  report.converged = report.max_deviation <= tol;
  return result;
}

std::vector<std::vector<double>> extract_outbound(const TimeOriginMatrix& x) {
  std::vector<std::vector<double>> out(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const auto col = x.column(j);
    out[j].assign(col.begin(), col.end());
  }
  return out;
}

}  // namespace saac::outbound
