#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "saac/anchors.hpp"
#include "saac/assembly.hpp"
#include "saac/calibration.hpp"
#include "saac/dataset.hpp"
#include "saac/inbound.hpp"
#include "saac/outbound.hpp"
#include "saac/synth.hpp"

namespace saac::io {

namespace fs = std::filesystem;

namespace files {
inline constexpr const char* kWeeklyVisits = "weekly_visits.csv";
inline constexpr const char* kWeeklyDevices = "weekly_devices.csv";
inline constexpr const char* kNeighborhoodStops = "neighborhood_stops.csv";
inline constexpr const char* kOriginDistribution = "origin_distribution.csv";
inline constexpr const char* kPanel = "panel.csv";
inline constexpr const char* kResidents = "residents.csv";
inline constexpr const char* kGeo = "geo.csv";

inline constexpr const char* kTruthPopulation = "truth_population.csv";
inline constexpr const char* kTruthDepartures = "truth_departures.csv";
inline constexpr const char* kTruthAttendance = "truth_attendance.csv";
inline constexpr const char* kReference = "reference.csv";

inline constexpr const char* kAnchorWeeks = "anchor_weeks.csv";
inline constexpr const char* kOsf = "osf.csv";
inline constexpr const char* kInbound = "inbound.csv";
inline constexpr const char* kInboundAudit = "inbound_audit.csv";
inline constexpr const char* kOutbound = "outbound.csv";
inline constexpr const char* kConvergence = "convergence.csv";
inline constexpr const char* kPopulation = "population.csv";
inline constexpr const char* kClampAudit = "clamp_audit.csv";
inline constexpr const char* kEvaluation = "evaluation.csv";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace files

/// The seven pipeline input tables, in the order they are read.
std::vector<fs::path> input_files(const fs::path& dir);

void write_dataset(const fs::path& dir, const Dataset& data);

/// Reads and validates every input table. Throws ValidationError carrying
/// `file:line: column N (name): message` diagnostics.
Dataset read_dataset(const fs::path& dir);

Geography read_geo(const fs::path& path);
std::vector<double> read_residents(const fs::path& path, const Geography& geo);

/// Truth tables plus reference.csv: weekday-noon and weekday-midnight true
/// means of the first simulated month.
void write_truth(const fs::path& dir, const Geography& geo, const synth::GroundTruth& truth);

/// Per-CBG true presence of one month, cell (c, t) at c * hours + t.
std::vector<double> read_truth_population(const fs::path& path, const Geography& geo, YearMonth month);

void write_anchor_weeks(const fs::path& path, std::span<const anchors::AnchorWeekSummary> weeks);

void write_osf(const fs::path& path, const calibration::OsfTable& table);
calibration::OsfTable read_osf(const fs::path& path);

/// inbound.csv (hourly) and inbound_audit.csv (per CBG-month).
void write_inbound(const fs::path& dir, const Geography& geo, std::span<const inbound::MonthInbound> months);
std::vector<inbound::MonthInbound> read_inbound(const fs::path& dir, const Geography& geo);

struct MonthOutbound {
  YearMonth month;
  std::vector<std::vector<double>> by_cbg;
  outbound::IpfReport report;
  double rescale = 1.0;
};

void write_outbound(const fs::path& dir, const Geography& geo, std::span<const MonthOutbound> months);
std::vector<MonthOutbound> read_outbound(const fs::path& dir, const Geography& geo);

struct MonthPopulation {
  YearMonth month;
  assembly::PopulationSurface surface;
};

/// population.csv and clamp_audit.csv.
void write_population(const fs::path& dir, const Geography& geo, std::span<const MonthPopulation> months);
/// Reads population.csv back. Only population, inbound, outbound and flags
/// are restored.
std::vector<MonthPopulation> read_population(const fs::path& path, const Geography& geo);

/// cbg, daytime_ref, nighttime_ref. CBGs not listed have no reference.
std::vector<std::optional<assembly::Reference>> read_reference(const fs::path& path, const Geography& geo);

struct MonthEvaluation {
  YearMonth month;
  assembly::ReferenceComparison comparison;
};

void write_evaluation(const fs::path& path, const Geography& geo, std::span<const MonthEvaluation> months);

}  // namespace saac::io
