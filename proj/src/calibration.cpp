#include "saac/calibration.hpp"

#include <cmath>

#include "saac/error.hpp"

namespace saac::calibration {

namespace {

struct Totals {
  double devices = 0.0;
  double events = 0.0;

  void add(const WeekOsfSample& s) {
    devices += static_cast<double>(s.weekly_distinct_devices);
    events += s.typical_hourly_count;
  }
  std::optional<double> ratio() const {
    if (events <= 0.0 || devices <= 0.0) return std::nullopt;
    return devices / events;
  }
};

std::map<YearMonth, double> direct_ratios(const std::map<YearMonth, Totals>& totals) {
  std::map<YearMonth, double> out;
  for (const auto& [month, t] : totals)
    if (auto k = t.ratio()) out.emplace(month, *k);
  return out;
}

}  // namespace

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Direct: return "direct";
    case Provenance::TemporalCompletion: return "temporal_completion";
    case Provenance::StateFallback: return "state_fallback";
  }
  return "unknown";
}

std::optional<Provenance> parse_provenance(std::string_view text) {
  for (auto p : {Provenance::Direct, Provenance::TemporalCompletion, Provenance::StateFallback})
    if (text == to_string(p)) return p;
  return std::nullopt;
}

std::vector<WeekOsfSample> samples_from(std::span<const anchors::AnchorWeekSummary> summaries) {
  std::vector<WeekOsfSample> out;
  for (const auto& s : summaries)
    if (s.accepted) out.push_back({s.county, s.month, s.weekly_distinct_devices, s.typical_hourly_count});
  return out;
}

std::optional<CountyMonthOsf> aggregate_county_month(std::span<const WeekOsfSample> samples) {
  if (samples.empty()) return std::nullopt;
  Totals t;
  for (const auto& s : samples) {
    require(s.county == samples.front().county && s.month == samples.front().month,
            "aggregate_county_month needs samples from a single county-month");
    require(s.typical_hourly_count > 0.0, "sample typical hourly count must be positive");
    t.add(s);
  }
  const auto k = t.ratio();
  if (!k) return std::nullopt;
  return CountyMonthOsf{samples.front().county, samples.front().month, *k, Provenance::Direct};
}

std::map<YearMonth, OsfEntry> temporal_complete(const std::map<YearMonth, double>& direct) {
  std::map<YearMonth, OsfEntry> out;
  std::set<int> years;
  for (const auto& [month, k] : direct) {
    out.emplace(month, OsfEntry{k, Provenance::Direct});
    years.insert(month.year);
  }
  auto donor = [&](int year, int month) -> std::optional<double> {
    auto it = direct.find(YearMonth{year, month});
    return it == direct.end() ? std::nullopt : std::optional<double>(it->second);
  };
  auto fill = [&](int year, int month, std::optional<double> k) {
    if (k) out.emplace(YearMonth{year, month}, OsfEntry{*k, Provenance::TemporalCompletion});
  };
  for (int y : years) {
    fill(y, 1, donor(y, 2));
    fill(y, 6, donor(y, 5));
    fill(y, 8, donor(y, 9));
    const auto may = donor(y, 5), sep = donor(y, 9);
    if (may && sep) fill(y, 7, (*may + *sep) / 2.0);
  }
  return out;
}

const OsfEntry* OsfTable::find(const std::string& county, YearMonth month) const {
  auto it = entries_.find({county, month});
  return it == entries_.end() ? nullptr : &it->second;
}

const OsfEntry& OsfTable::at(const std::string& county, YearMonth month) const {
  if (const auto* e = find(county, month)) return *e;
  fail(ErrorKind::Unresolved, "no OSF for county " + county + " in " + month.str());
}

void OsfTable::set(const std::string& county, YearMonth month, OsfEntry entry) {
  require(std::isfinite(entry.k) && entry.k > 0.0, "OSF must be finite and positive");
  entries_[{county, month}] = entry;
}

std::vector<CountyMonthOsf> OsfTable::rows() const {
  std::vector<CountyMonthOsf> out;
  out.reserve(entries_.size());
  for (const auto& [key, e] : entries_) out.push_back({key.first, key.second, e.k, e.provenance});
  return out;
}

OsfTable county_table(std::span<const WeekOsfSample> samples) {
  std::map<std::string, std::map<YearMonth, Totals>> totals;
  for (const auto& s : samples) {
    require(s.typical_hourly_count > 0.0, "sample typical hourly count must be positive");
    totals[s.county][s.month].add(s);
  }
  OsfTable table;
  for (const auto& [county, months] : totals)
    for (const auto& [month, entry] : temporal_complete(direct_ratios(months)))
      table.set(county, month, entry);
  return table;
}

OsfTable state_fallback(OsfTable table, std::span<const WeekOsfSample> samples, const StateOf& state_of,
                        const std::set<YearMonth>& months) {
  std::map<std::string, std::map<YearMonth, Totals>> totals;
  for (const auto& s : samples) {
    auto it = state_of.find(s.county);
    if (it == state_of.end()) fail(ErrorKind::Validation, "county " + s.county + " has no state in the crosswalk");
    totals[it->second][s.month].add(s);
  }
  std::map<std::string, std::map<YearMonth, OsfEntry>> state_k;
  for (const auto& [state, by_month] : totals) state_k[state] = temporal_complete(direct_ratios(by_month));

  std::vector<std::string> unresolved;
  for (const auto& [county, state] : state_of) {
    for (YearMonth m : months) {
      if (table.find(county, m)) continue;
      const auto sit = state_k.find(state);
      const OsfEntry* se = nullptr;
      if (sit != state_k.end()) {
        auto mit = sit->second.find(m);
        if (mit != sit->second.end()) se = &mit->second;
      }
      if (se)
        table.set(county, m, OsfEntry{se->k, Provenance::StateFallback});
      else
        unresolved.push_back(county + "@" + m.str());
    }
  }
  if (!unresolved.empty()) {
    std::string msg = "unresolved county-months (no anchor samples in state):";
    for (const auto& u : unresolved) msg += " " + u;
    fail(ErrorKind::Unresolved, msg);
  }
  return table;
}

OsfTable build_osf_table(std::span<const WeekOsfSample> samples, const StateOf& state_of,
                         const std::set<YearMonth>& months) {
  return state_fallback(county_table(samples), samples, state_of, months);
}

}  // namespace saac::calibration
