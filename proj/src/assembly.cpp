#include "saac/assembly.hpp"

#include <cmath>

#include "saac/error.hpp"

namespace saac::assembly {

namespace {

constexpr std::pair<unsigned, const char*> kFlagNames[] = {
    {kClamped, "clamped"}, {kInboundMissing, "inbound_missing"}, {kOsfFallback, "osf_fallback"}};

}  // namespace

std::string flag_names(unsigned flags) {
  std::string out;
  for (const auto& [bit, name] : kFlagNames) {
    if (!(flags & bit)) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

std::optional<unsigned> parse_flag_names(std::string_view text) {
  unsigned flags = 0;
  while (!text.empty()) {
    const auto bar = text.find('|');
    const auto name = text.substr(0, bar);
    bool known = false;
    for (const auto& [bit, n] : kFlagNames)
      if (name == n) {
        flags |= bit;
        known = true;
      }
    if (!known) return std::nullopt;
    text = bar == std::string_view::npos ? std::string_view{} : text.substr(bar + 1);
  }
  return flags;
}

double PopulationSurface::clamp_deficit() const {
  double total = 0.0;
  for (const auto& c : clamps) total += population[cell(c.cbg, c.hour)] - c.pre_clamp;
  return total;
}

PopulationSurface assemble(std::span<const double> residents, const std::vector<std::vector<double>>& inbound,
                           const std::vector<std::vector<double>>& outbound, std::span<const unsigned> cbg_flags,
                           std::span<const std::string> names) {
  const std::size_t n = residents.size();
  auto label = [&](std::size_t c) { return c < names.size() ? names[c] : "#" + std::to_string(c); };

  std::string missing;
  for (std::size_t c = inbound.size(); c < n; ++c) missing += " inbound:" + label(c);
  for (std::size_t c = outbound.size(); c < n; ++c) missing += " outbound:" + label(c);
  if (inbound.size() > n || outbound.size() > n) missing += " (components cover CBGs without residents)";
  if (!missing.empty()) fail(ErrorKind::Shape, "population components do not share a grid:" + missing);

  const std::size_t hours = n == 0 ? 0 : inbound.front().size();
  for (std::size_t c = 0; c < n; ++c) {
    if (inbound[c].size() != hours || outbound[c].size() != hours)
      fail(ErrorKind::Shape, "CBG " + label(c) + " has " + std::to_string(inbound[c].size()) + " inbound and " +
                                 std::to_string(outbound[c].size()) + " outbound hours, expected " +
                                 std::to_string(hours));
  }
  require(cbg_flags.empty() || cbg_flags.size() == n, "CBG flags must cover every CBG");

  PopulationSurface s;
  s.n_cbgs = n;
  s.hours = hours;
  s.residents.assign(residents.begin(), residents.end());
  s.inbound.resize(n * hours);
  s.outbound.resize(n * hours);
  s.raw.resize(n * hours);
  s.population.resize(n * hours);
  s.flags.assign(n * hours, 0u);
  for (std::size_t c = 0; c < n; ++c) {
    const unsigned base = cbg_flags.empty() ? 0u : cbg_flags[c];
    for (std::size_t t = 0; t < hours; ++t) {
      const std::size_t i = s.cell(c, t);
      s.inbound[i] = inbound[c][t];
      s.outbound[i] = outbound[c][t];
      s.raw[i] = residents[c] + inbound[c][t] - outbound[c][t];
      s.flags[i] = base;
      if (s.raw[i] < 0.0) {
        s.population[i] = 0.0;
        s.flags[i] |= kClamped;
        s.clamps.push_back({static_cast<CbgIndex>(c), t, s.raw[i]});
      } else {
        s.population[i] = s.raw[i];
      }
    }
  }
  return s;
}

std::optional<double> relative_difference(double estimate, double reference) {
  if (!(reference > 0.0)) return std::nullopt;
  return (estimate - reference) / reference;
}

double weekday_hour_mean(std::span<const double> series, YearMonth month, int hour) {
  require(hour >= 0 && hour < 24, "hour of day out of range");
  require(series.size() == static_cast<std::size_t>(month.hours()), "series does not span the month");
  double total = 0.0;
  int count = 0;
  const Date first = month.first_day();
  for (int d = 0; d < month.days(); ++d) {
    if (is_weekend(first + std::chrono::days(d))) continue;
    total += series[static_cast<std::size_t>(24 * d + hour)];
    ++count;
  }
  return count == 0 ? 0.0 : total / count;
}

ReferenceComparison evaluate_reference(const PopulationSurface& surface, YearMonth month,
                                       std::span<const std::optional<Reference>> references,
                                       const EvaluationParams& params) {
  require(surface.hours == static_cast<std::size_t>(month.hours()), "surface does not cover the month");
  require(references.size() == surface.n_cbgs, "reference lookup must be indexed by CBG");
  ReferenceComparison out;
  double noon_sum = 0.0, midnight_sum = 0.0;
  std::size_t noon_n = 0, midnight_n = 0;
  for (std::size_t c = 0; c < surface.n_cbgs; ++c) {
    if (!references[c]) continue;
    const std::span<const double> series(surface.population.data() + surface.cell(c, 0), surface.hours);
    ReferenceRow row;
    row.cbg = static_cast<CbgIndex>(c);
    row.noon_mean = weekday_hour_mean(series, month, params.noon_hour);
    row.midnight_mean = weekday_hour_mean(series, month, params.midnight_hour);
    row.daytime_ref = references[c]->daytime;
    row.nighttime_ref = references[c]->nighttime;
    row.noon_diff = relative_difference(row.noon_mean, row.daytime_ref);
    row.midnight_diff = relative_difference(row.midnight_mean, row.nighttime_ref);
    if (row.noon_diff) {
      noon_sum += std::fabs(*row.noon_diff);
      ++noon_n;
    } else {
      ++out.excluded_noon;
    }
    if (row.midnight_diff) {
      midnight_sum += std::fabs(*row.midnight_diff);
      ++midnight_n;
    } else {
      ++out.excluded_midnight;
    }
    out.rows.push_back(row);
  }
  out.mean_abs_noon_diff = noon_n ? noon_sum / static_cast<double>(noon_n) : 0.0;
  out.mean_abs_midnight_diff = midnight_n ? midnight_sum / static_cast<double>(midnight_n) : 0.0;
  return out;
}

}  // namespace saac::assembly
