#include "saac/inbound.hpp"

#include <cmath>

#include "saac/error.hpp"
#include "saac/parallel.hpp"

namespace saac::inbound {

std::optional<double> expansion_factor(double residents, double tracked_devices) {
  require(residents >= 0.0 && tracked_devices >= 0.0, "residents and tracked devices must be non-negative");
  if (tracked_devices <= 0.0) return std::nullopt;
  return residents / tracked_devices;
}

std::vector<std::optional<double>> expansion_factors(std::span<const double> residents,
                                                     std::span<const double> tracked_devices) {
  require(residents.size() == tracked_devices.size(), "residents and panel tables must cover the same CBGs");
  std::vector<std::optional<double>> out(residents.size());
  for (std::size_t j = 0; j < residents.size(); ++j) out[j] = expansion_factor(residents[j], tracked_devices[j]);
  return out;
}

DestinationExpansion destination_expansion(std::span<const OriginCount> origins,
                                           std::span<const std::optional<double>> factors) {
  DestinationExpansion out;
  double mass = 0.0, weighted = 0.0;
  for (const auto& o : origins) {
    require(o.devices >= 0.0, "origin device counts must be non-negative");
    if (o.devices == 0.0) continue;
    if (o.origin >= factors.size() || !factors[o.origin]) {
      ++out.excluded_origins;
      continue;
    }
    ++out.included_origins;
    mass += o.devices;
    weighted += o.devices * *factors[o.origin];
  }
  if (mass > 0.0) out.value = weighted / mass;
  return out;
}

InboundSeries inbound_surface(std::span<const double> hourly_stops, double k, double expansion) {
  require(k > 0.0 && std::isfinite(k), "OSF must be positive");
  require(expansion >= 0.0 && std::isfinite(expansion), "expansion factor must be non-negative");
  InboundSeries s;
  s.u_hat.resize(hourly_stops.size());
  s.inbound.resize(hourly_stops.size());
  for (std::size_t t = 0; t < hourly_stops.size(); ++t) {
    s.u_hat[t] = k * hourly_stops[t];
    s.inbound[t] = s.u_hat[t] * expansion;
  }
  return s;
}

namespace {

constexpr std::pair<unsigned, const char*> kFlagNames[] = {
    {kExcludedOrigins, "excluded_origins"}, {kAllOriginsExcluded, "all_origins_excluded"},
    {kInboundMissing, "inbound_missing"},   {kNoOrigins, "no_origins"},
    {kOsfFallback, "osf_fallback"},         {kOsfCompleted, "osf_completed"},
};

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

MonthInbound estimate_month(const Geography& geo, std::span<const double> residents, const MonthData& data,
                            const calibration::OsfTable& osf, unsigned threads) {
  const std::size_t n = geo.size();
  const auto hours = static_cast<std::size_t>(data.month.hours());
  require(residents.size() == n, "residents must cover every CBG");
  const auto factors = expansion_factors(residents, data.tracked_devices);

  std::vector<const NeighborhoodMonth*> record(n, nullptr);
  for (const auto& d : data.destinations) {
    require(d.cbg < n, "neighborhood record outside geography");
    require(d.hourly_stops.size() == hours, "neighborhood record for " + geo.cbg(d.cbg) + " has " +
                                                std::to_string(d.hourly_stops.size()) + " hours, expected " +
                                                std::to_string(hours));
    record[d.cbg] = &d;
  }

  MonthInbound out;
  out.month = data.month;
  out.by_cbg.resize(n);
  parallel_for(n, threads, [&](std::size_t c) {
    auto& dest = out.by_cbg[c];
    dest.cbg = static_cast<CbgIndex>(c);
    const auto& entry = osf.at(geo.county(dest.cbg), data.month);
    dest.k = entry.k;
    if (entry.provenance == calibration::Provenance::StateFallback) dest.flags |= kOsfFallback;
    if (entry.provenance == calibration::Provenance::TemporalCompletion) dest.flags |= kOsfCompleted;

    const NeighborhoodMonth* rec = record[c];
    if (!rec) {
      dest.flags |= kInboundMissing;
      dest.stops.assign(hours, 0.0);
      dest.u_hat.assign(hours, 0.0);
      dest.inbound.assign(hours, 0.0);
      return;
    }
    dest.stops = rec->hourly_stops;
    const auto ex = destination_expansion(rec->origin_devices, factors);
    dest.expansion = ex.value;
    dest.excluded_origins = ex.excluded_origins;
    if (ex.excluded_origins > 0) dest.flags |= kExcludedOrigins;
    if (ex.included_origins == 0) dest.flags |= ex.excluded_origins > 0 ? kAllOriginsExcluded : kNoOrigins;

    auto series = inbound_surface(rec->hourly_stops, dest.k, dest.expansion);
    dest.u_hat = std::move(series.u_hat);
    dest.inbound = std::move(series.inbound);
  });
  return out;
}

}  // namespace saac::inbound
