#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saac/calibration.hpp"
#include "saac/dataset.hpp"

namespace saac::inbound {

/// Residents per tracked device, N / D. No value when D is zero: such origins
/// are dropped from the destination mix rather than imputed.
std::optional<double> expansion_factor(double residents, double tracked_devices);

std::vector<std::optional<double>> expansion_factors(std::span<const double> residents,
                                                     std::span<const double> tracked_devices);

struct DestinationExpansion {
  double value = 0.0;
  std::size_t included_origins = 0;
  std::size_t excluded_origins = 0;
};

/// Device-share weighted mean of origin expansion factors, with shares
/// renormalised over origins that have a factor.
DestinationExpansion destination_expansion(std::span<const OriginCount> origins,
                                           std::span<const std::optional<double>> factors);

struct InboundSeries {
  std::vector<double> u_hat;    // k * e
  std::vector<double> inbound;  // k * e * P
};

InboundSeries inbound_surface(std::span<const double> hourly_stops, double k, double expansion);

enum Flag : unsigned {
  kExcludedOrigins = 1u << 0,     // some origins had no tracked devices
  kAllOriginsExcluded = 1u << 1,  // no usable origin: inbound forced to 0
  kInboundMissing = 1u << 2,      // no neighborhood record for the CBG
  kNoOrigins = 1u << 3,           // stops reported without an origin distribution
  kOsfFallback = 1u << 4,         // county OSF came from the state fallback
  kOsfCompleted = 1u << 5,        // county OSF came from temporal completion
};

std::string flag_names(unsigned flags);
/// Inverse of flag_names; no value if a name is unknown.
std::optional<unsigned> parse_flag_names(std::string_view text);

struct DestinationInbound {
  CbgIndex cbg = 0;
  double k = 0.0;
  double expansion = 0.0;
  std::size_t excluded_origins = 0;
  unsigned flags = 0;
  std::vector<double> stops;
  std::vector<double> u_hat;
  std::vector<double> inbound;
};

/// Inbound presence for every CBG of the geography in one month; CBGs without
/// a neighborhood record get all-zero series and kInboundMissing.
struct MonthInbound {
  YearMonth month;
  std::vector<DestinationInbound> by_cbg;
};

MonthInbound estimate_month(const Geography& geo, std::span<const double> residents, const MonthData& data,
                            const calibration::OsfTable& osf, unsigned threads = 1);

}  // namespace saac::inbound
