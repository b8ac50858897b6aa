#include "saac/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "saac/csv.hpp"
#include "saac/error.hpp"

namespace saac::io {

namespace {

std::int64_t as_count(double v) { return static_cast<std::int64_t>(std::llround(v)); }

std::optional<Date> read_date(csv::Reader& r, std::size_t col) {
  auto d = parse_date(r.text(col));
  if (!d) r.error(col, "expected an ISO date, found '" + std::string(r.text(col)) + "'");
  return d;
}

std::optional<YearMonth> read_month(csv::Reader& r, std::size_t col) {
  auto m = YearMonth::parse(r.text(col));
  if (!m) r.error(col, "expected YYYY-MM, found '" + std::string(r.text(col)) + "'");
  return m;
}

std::optional<CbgIndex> read_cbg(csv::Reader& r, std::size_t col, const Geography& geo) {
  auto c = geo.find(r.text(col));
  if (!c) r.error(col, "unknown CBG '" + std::string(r.text(col)) + "'");
  return c;
}

std::optional<std::int64_t> read_hour(csv::Reader& r, std::size_t col, std::int64_t limit) {
  auto h = r.integer(col);
  if (h && (*h < 0 || *h >= limit)) {
    r.error(col, "hour_index " + std::to_string(*h) + " outside [0, " + std::to_string(limit) + ")");
    return std::nullopt;
  }
  return h;
}

bool nonempty(csv::Reader& r, std::size_t col) {
  if (!r.text(col).empty()) return true;
  r.error(col, "empty value");
  return false;
}

std::vector<anchors::SchoolWeekRecord> read_school_weeks(const fs::path& dir) {
  struct Partial {
    std::string county;
    std::vector<double> visits = std::vector<double>(anchors::kHoursPerWeek, -1.0);
    std::optional<std::int64_t> devices;
  };
  std::map<std::pair<std::string, Date>, Partial> weeks;

  csv::Reader v(dir / files::kWeeklyVisits);
  const auto poi = v.column("poi_id"), county = v.column("county"), week = v.column("week_start"),
             hour = v.column("hour_index"), visits = v.column("visits");
  v.finish();
  while (v.next()) {
    if (!nonempty(v, poi) || !nonempty(v, county)) continue;
    auto d = read_date(v, week);
    auto h = read_hour(v, hour, anchors::kHoursPerWeek);
    auto n = v.count(visits);
    if (!d || !h || !n) continue;
    if (weekday_index(*d) != 0) {
      v.error(week, "week_start " + format_date(*d) + " is not a Monday");
      continue;
    }
    auto& p = weeks[{std::string(v.text(poi)), *d}];
    if (p.county.empty()) p.county = v.text(county);
    if (p.county != v.text(county)) {
      v.error(county, "county differs from earlier rows of this school-week (" + p.county + ")");
      continue;
    }
    if (p.visits[*h] >= 0.0) {
      v.error(hour, "duplicate hour_index " + std::to_string(*h));
      continue;
    }
    p.visits[*h] = static_cast<double>(*n);
  }
  for (const auto& [key, p] : weeks)
    for (std::size_t h = 0; h < p.visits.size(); ++h)
      if (p.visits[h] < 0.0) {
        v.error("school-week " + key.first + " " + format_date(key.second) + " lacks hour_index " +
                std::to_string(h));
        break;
      }
  v.finish();

  csv::Reader d(dir / files::kWeeklyDevices);
  const auto dpoi = d.column("poi_id"), dcounty = d.column("county"), dweek = d.column("week_start"),
             ddev = d.column("distinct_devices");
  d.finish();
  while (d.next()) {
    auto date = read_date(d, dweek);
    auto n = d.count(ddev);
    if (!date || !n) continue;
    auto it = weeks.find({std::string(d.text(dpoi)), *date});
    if (it == weeks.end()) {
      d.error(dpoi, "no weekly visits for " + std::string(d.text(dpoi)) + " " + format_date(*date));
      continue;
    }
    if (it->second.county != d.text(dcounty)) d.error(dcounty, "county disagrees with weekly visits");
    if (it->second.devices) d.error(dpoi, "duplicate school-week");
    it->second.devices = *n;
  }
  for (const auto& [key, p] : weeks)
    if (!p.devices) d.error("no distinct_devices row for " + key.first + " " + format_date(key.second));
  d.finish();

  std::vector<anchors::SchoolWeekRecord> out;
  out.reserve(weeks.size());
  for (auto& [key, p] : weeks) {
    anchors::SchoolWeekRecord r;
    r.poi_id = key.first;
    r.county = std::move(p.county);
    r.week_start = key.second;
    r.hourly_visits = HourlySeries(LocalHour{key.second, 0}, std::move(p.visits));
    r.weekly_distinct_devices = *p.devices;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MonthData> read_months(const fs::path& dir, const Geography& geo) {
  const std::size_t n = geo.size();
  std::map<YearMonth, std::map<CbgIndex, NeighborhoodMonth>> months;
  auto record = [&](YearMonth m, CbgIndex c) -> NeighborhoodMonth& {
    auto& rec = months[m][c];
    if (rec.hourly_stops.empty()) {
      rec.cbg = c;
      rec.month = m;
      rec.hourly_stops.assign(static_cast<std::size_t>(m.hours()), -1.0);
    }
    return rec;
  };

  csv::Reader s(dir / files::kNeighborhoodStops);
  const auto cbg = s.column("cbg"), county = s.column("county"), month = s.column("month"),
             hour = s.column("hour_index"), stops = s.column("stops");
  s.finish();
  while (s.next()) {
    auto c = read_cbg(s, cbg, geo);
    auto m = read_month(s, month);
    auto v = s.count(stops);
    if (!c || !m || !v) continue;
    auto h = read_hour(s, hour, m->hours());
    if (!h) continue;
    if (geo.county(*c) != s.text(county)) {
      s.error(county, "county '" + std::string(s.text(county)) + "' does not match geo (" + geo.county(*c) + ")");
      continue;
    }
    auto& rec = record(*m, *c);
    if (rec.hourly_stops[*h] >= 0.0) {
      s.error(hour, "duplicate hour_index " + std::to_string(*h));
      continue;
    }
    rec.hourly_stops[*h] = static_cast<double>(*v);
  }
  s.finish();

  csv::Reader o(dir / files::kOriginDistribution);
  const auto dest = o.column("dest_cbg"), origin = o.column("origin_cbg"), omonth = o.column("month"),
             odev = o.column("devices");
  o.finish();
  std::set<std::tuple<YearMonth, CbgIndex, CbgIndex>> seen;
  while (o.next()) {
    auto d = read_cbg(o, dest, geo);
    auto org = read_cbg(o, origin, geo);
    auto m = read_month(o, omonth);
    auto v = o.count(odev);
    if (!d || !org || !m || !v) continue;
    if (!seen.insert({*m, *d, *org}).second) {
      o.error(origin, "duplicate origin for this destination-month");
      continue;
    }
    auto& rec = record(*m, *d);
    if (*v > 0) rec.origin_devices.push_back({*org, static_cast<double>(*v)});
  }
  o.finish();

  std::map<YearMonth, std::vector<double>> tracked;
  csv::Reader p(dir / files::kPanel);
  const auto pcbg = p.column("cbg"), pmonth = p.column("month"), pdev = p.column("tracked_devices");
  p.finish();
  std::set<std::pair<YearMonth, CbgIndex>> seen_panel;
  while (p.next()) {
    auto c = read_cbg(p, pcbg, geo);
    auto m = read_month(p, pmonth);
    auto v = p.count(pdev);
    if (!c || !m || !v) continue;
    if (!seen_panel.insert({*m, *c}).second) {
      p.error(pcbg, "duplicate panel row");
      continue;
    }
    auto& t = tracked[*m];
    if (t.empty()) t.assign(n, 0.0);
    t[*c] = static_cast<double>(*v);
  }
  p.finish();

  std::vector<MonthData> out;
  for (auto& [m, recs] : months) {
    MonthData md;
    md.month = m;
    md.tracked_devices = tracked.count(m) ? tracked[m] : std::vector<double>(n, 0.0);
    for (auto& [c, rec] : recs) {
      for (double& v : rec.hourly_stops) v = std::max(v, 0.0);  // omitted hours carry no stops
      std::sort(rec.origin_devices.begin(), rec.origin_devices.end(),
                [](const OriginCount& a, const OriginCount& b) { return a.origin < b.origin; });
      md.destinations.push_back(std::move(rec));
    }
    out.push_back(std::move(md));
  }
  return out;
}

}  // namespace

std::vector<fs::path> input_files(const fs::path& dir) {
  return {dir / files::kGeo,          dir / files::kResidents,          dir / files::kWeeklyVisits,
          dir / files::kWeeklyDevices, dir / files::kNeighborhoodStops, dir / files::kOriginDistribution,
          dir / files::kPanel};
}

void write_dataset(const fs::path& dir, const Dataset& data) {
  const auto& geo = data.geo;
  {
    csv::Writer w(dir / files::kGeo, {"cbg", "county", "state"});
    for (CbgIndex c = 0; c < geo.size(); ++c) w.field(geo.cbg(c)).field(geo.county(c)).field(geo.state(c)).end_row();
    w.commit();
  }
  {
    csv::Writer w(dir / files::kResidents, {"cbg", "population"});
    for (CbgIndex c = 0; c < geo.size(); ++c) w.field(geo.cbg(c)).field(as_count(data.residents[c])).end_row();
    w.commit();
  }
  {
    csv::Writer v(dir / files::kWeeklyVisits, {"poi_id", "county", "week_start", "hour_index", "visits"});
    csv::Writer d(dir / files::kWeeklyDevices, {"poi_id", "county", "week_start", "distinct_devices"});
    for (const auto& r : data.school_weeks) {
      const auto week = format_date(r.week_start);
      for (std::size_t h = 0; h < r.hourly_visits.size(); ++h)
        v.field(r.poi_id).field(r.county).field(week).field(h).field(as_count(r.hourly_visits[h])).end_row();
      d.field(r.poi_id).field(r.county).field(week).field(r.weekly_distinct_devices).end_row();
    }
    v.commit();
    d.commit();
  }
  {
    csv::Writer s(dir / files::kNeighborhoodStops, {"cbg", "county", "month", "hour_index", "stops"});
    csv::Writer o(dir / files::kOriginDistribution, {"dest_cbg", "origin_cbg", "month", "devices"});
    csv::Writer p(dir / files::kPanel, {"cbg", "month", "tracked_devices"});
    for (const auto& md : data.months) {
      const auto m = md.month.str();
      for (const auto& rec : md.destinations) {
        for (std::size_t t = 0; t < rec.hourly_stops.size(); ++t)
          if (rec.hourly_stops[t] > 0.0)
            s.field(geo.cbg(rec.cbg)).field(geo.county(rec.cbg)).field(m).field(t)
                .field(as_count(rec.hourly_stops[t])).end_row();
        for (const auto& od : rec.origin_devices)
          if (od.devices > 0.0)
            o.field(geo.cbg(rec.cbg)).field(geo.cbg(od.origin)).field(m).field(as_count(od.devices)).end_row();
      }
      for (CbgIndex c = 0; c < md.tracked_devices.size(); ++c)
        p.field(geo.cbg(c)).field(m).field(as_count(md.tracked_devices[c])).end_row();
    }
    s.commit();
    o.commit();
    p.commit();
  }
}

Geography read_geo(const fs::path& path) {
  csv::Reader r(path);
  const auto cbg = r.column("cbg"), county = r.column("county"), state = r.column("state");
  r.finish();
  Geography geo;
  while (r.next()) {
    if (!nonempty(r, cbg) || !nonempty(r, county) || !nonempty(r, state)) continue;
    if (geo.find(r.text(cbg))) {
      r.error(cbg, "duplicate CBG '" + std::string(r.text(cbg)) + "'");
      continue;
    }
    geo.add(std::string(r.text(cbg)), std::string(r.text(county)), std::string(r.text(state)));
  }
  r.finish();
  try {
    (void)geo.state_of_county();
  } catch (const Error& e) {
    throw ValidationError({path.string() + ": " + e.what()});
  }
  return geo;
}

std::vector<double> read_residents(const fs::path& path, const Geography& geo) {
  csv::Reader r(path);
  const auto cbg = r.column("cbg"), pop = r.column("population");
  r.finish();
  std::vector<double> out(geo.size(), -1.0);
  while (r.next()) {
    auto c = read_cbg(r, cbg, geo);
    auto v = r.count(pop);
    if (!c || !v) continue;
    if (out[*c] >= 0.0) {
      r.error(cbg, "duplicate CBG");
      continue;
    }
    out[*c] = static_cast<double>(*v);
  }
  for (CbgIndex c = 0; c < out.size(); ++c)
    if (out[c] < 0.0) r.error("no population for CBG " + geo.cbg(c));
  r.finish();
  return out;
}

Dataset read_dataset(const fs::path& dir) {
  Dataset d;
  d.geo = read_geo(dir / files::kGeo);
  d.residents = read_residents(dir / files::kResidents, d.geo);
  d.school_weeks = read_school_weeks(dir);
  d.months = read_months(dir, d.geo);
  return d;
}

void write_truth(const fs::path& dir, const Geography& geo, const synth::GroundTruth& truth) {
  csv::Writer p(dir / files::kTruthPopulation, {"cbg", "month", "hour_index", "population"});
  csv::Writer d(dir / files::kTruthDepartures, {"cbg", "month", "hour_index", "departures"});
  for (const auto& mt : truth.months) {
    const auto m = mt.month.str();
    for (CbgIndex c = 0; c < geo.size(); ++c) {
      for (std::size_t t = 0; t < mt.present[c].size(); ++t)
        p.field(geo.cbg(c)).field(m).field(t).field(mt.present[c][t]).end_row();
      for (std::size_t t = 0; t < mt.departures[c].size(); ++t)
        d.field(geo.cbg(c)).field(m).field(t).field(mt.departures[c][t]).end_row();
    }
  }
  p.commit();
  d.commit();

  csv::Writer a(dir / files::kTruthAttendance, {"poi_id", "week_start", "attendees"});
  for (const auto& w : truth.attendance)
    a.field(w.poi_id).field(format_date(w.week_start)).field(static_cast<std::int64_t>(w.attendees)).end_row();
  a.commit();

  csv::Writer r(dir / files::kReference, {"cbg", "daytime_ref", "nighttime_ref"});
  if (!truth.months.empty()) {
    const auto& mt = truth.months.front();
    const assembly::EvaluationParams hours;
    for (CbgIndex c = 0; c < geo.size(); ++c)
      r.field(geo.cbg(c))
          .field(assembly::weekday_hour_mean(mt.present[c], mt.month, hours.noon_hour))
          .field(assembly::weekday_hour_mean(mt.present[c], mt.month, hours.midnight_hour))
          .end_row();
  }
  r.commit();
}

std::vector<double> read_truth_population(const fs::path& path, const Geography& geo, YearMonth month) {
  csv::Reader r(path);
  const auto cbg = r.column("cbg"), mcol = r.column("month"), hour = r.column("hour_index"),
             pop = r.column("population");
  r.finish();
  const auto hours = static_cast<std::size_t>(month.hours());
  std::vector<double> out(geo.size() * hours, 0.0);
  const auto wanted = month.str();
  while (r.next()) {
    if (r.text(mcol) != wanted) continue;
    auto c = read_cbg(r, cbg, geo);
    auto h = read_hour(r, hour, static_cast<std::int64_t>(hours));
    auto v = r.real(pop);
    if (c && h && v) out[*c * hours + static_cast<std::size_t>(*h)] = *v;
  }
  r.finish();
  return out;
}

void write_anchor_weeks(const fs::path& path, std::span<const anchors::AnchorWeekSummary> weeks) {
  csv::Writer w(path, {"poi_id", "county", "week_start", "month", "school_days", "school_hour_events",
                       "gathering_events", "typical_hourly_count", "distinct_devices", "week_osf", "accepted",
                       "rejection_reasons"});
  for (const auto& s : weeks) {
    std::string reasons;
    for (auto r : s.rejection_reasons) {
      if (!reasons.empty()) reasons += '|';
      reasons += anchors::to_string(r);
    }
    w.field(s.poi_id).field(s.county).field(format_date(s.week_start)).field(s.month.str()).field(s.n_school_days)
        .field(s.school_hour_events).field(s.gathering_events).field(s.typical_hourly_count)
        .field(s.weekly_distinct_devices);
    if (s.typical_hourly_count > 0.0)
      w.field(static_cast<double>(s.weekly_distinct_devices) / s.typical_hourly_count);
    else
      w.field(std::string_view{});
    w.field(s.accepted ? std::string_view("true") : std::string_view("false")).field(reasons).end_row();
  }
  w.commit();
}

void write_osf(const fs::path& path, const calibration::OsfTable& table) {
  csv::Writer w(path, {"county", "month", "k", "provenance"});
  for (const auto& row : table.rows())
    w.field(row.county).field(row.month.str()).field(row.k).field(calibration::to_string(row.provenance)).end_row();
  w.commit();
}

calibration::OsfTable read_osf(const fs::path& path) {
  csv::Reader r(path);
  const auto county = r.column("county"), month = r.column("month"), k = r.column("k"),
             prov = r.column("provenance");
  r.finish();
  calibration::OsfTable table;
  while (r.next()) {
    auto m = read_month(r, month);
    auto v = r.real(k);
    auto p = calibration::parse_provenance(r.text(prov));
    if (!p) r.error(prov, "unknown provenance '" + std::string(r.text(prov)) + "'");
    if (!nonempty(r, county) || !m || !v || !p) continue;
    if (*v <= 0.0) {
      r.error(k, "OSF must be positive");
      continue;
    }
    if (table.find(std::string(r.text(county)), *m)) {
      r.error(county, "duplicate county-month");
      continue;
    }
    table.set(std::string(r.text(county)), *m, {*v, *p});
  }
  r.finish();
  return table;
}

void write_inbound(const fs::path& dir, const Geography& geo, std::span<const inbound::MonthInbound> months) {
  csv::Writer h(dir / files::kInbound, {"cbg", "month", "hour_index", "stops", "u_hat", "inbound"});
  csv::Writer a(dir / files::kInboundAudit,
                {"cbg", "month", "k", "expansion_factor", "excluded_origins", "flags"});
  for (const auto& mi : months) {
    const auto m = mi.month.str();
    for (const auto& d : mi.by_cbg) {
      const auto& name = geo.cbg(d.cbg);
      for (std::size_t t = 0; t < d.inbound.size(); ++t)
        h.field(name).field(m).field(t).field(d.stops[t]).field(d.u_hat[t]).field(d.inbound[t]).end_row();
      a.field(name).field(m).field(d.k).field(d.expansion).field(d.excluded_origins)
          .field(inbound::flag_names(d.flags)).end_row();
    }
  }
  h.commit();
  a.commit();
}

std::vector<inbound::MonthInbound> read_inbound(const fs::path& dir, const Geography& geo) {
  const std::size_t n = geo.size();
  std::map<YearMonth, inbound::MonthInbound> months;
  auto month_of = [&](YearMonth m) -> inbound::MonthInbound& {
    auto& mi = months[m];
    if (mi.by_cbg.empty()) {
      const auto hours = static_cast<std::size_t>(m.hours());
      mi.month = m;
      mi.by_cbg.resize(n);
      for (CbgIndex c = 0; c < n; ++c) {
        auto& d = mi.by_cbg[c];
        d.cbg = c;
        d.k = -1.0;
        d.stops.assign(hours, 0.0);
        d.u_hat.assign(hours, 0.0);
        d.inbound.assign(hours, 0.0);
      }
    }
    return mi;
  };

  csv::Reader a(dir / files::kInboundAudit);
  const auto acbg = a.column("cbg"), amonth = a.column("month"), ak = a.column("k"),
             aex = a.column("expansion_factor"), aexcl = a.column("excluded_origins"), aflags = a.column("flags");
  a.finish();
  while (a.next()) {
    auto c = read_cbg(a, acbg, geo);
    auto m = read_month(a, amonth);
    auto k = a.real(ak);
    auto ex = a.real(aex);
    auto excl = a.count(aexcl);
    auto flags = inbound::parse_flag_names(a.text(aflags));
    if (!flags) a.error(aflags, "unknown flag in '" + std::string(a.text(aflags)) + "'");
    if (!c || !m || !k || !ex || !excl || !flags) continue;
    auto& d = month_of(*m).by_cbg[*c];
    d.k = *k;
    d.expansion = *ex;
    d.excluded_origins = static_cast<std::size_t>(*excl);
    d.flags = *flags;
  }
  for (const auto& [m, mi] : months)
    for (const auto& d : mi.by_cbg)
      if (d.k < 0.0) a.error("no audit row for CBG " + geo.cbg(d.cbg) + " in " + m.str());
  a.finish();

  csv::Reader h(dir / files::kInbound);
  const auto cbg = h.column("cbg"), month = h.column("month"), hour = h.column("hour_index"),
             stops = h.column("stops"), u_hat = h.column("u_hat"), in = h.column("inbound");
  h.finish();
  while (h.next()) {
    auto c = read_cbg(h, cbg, geo);
    auto m = read_month(h, month);
    if (!c || !m) continue;
    auto it = months.find(*m);
    if (it == months.end()) {
      h.error(month, "month absent from the inbound audit");
      continue;
    }
    auto t = read_hour(h, hour, m->hours());
    auto s = h.real(stops);
    auto u = h.real(u_hat);
    auto v = h.real(in);
    if (!t || !s || !u || !v) continue;
    auto& d = it->second.by_cbg[*c];
    d.stops[*t] = *s;
    d.u_hat[*t] = *u;
    d.inbound[*t] = *v;
  }
  h.finish();

  std::vector<inbound::MonthInbound> out;
  for (auto& [m, mi] : months) out.push_back(std::move(mi));
  return out;
}

void write_outbound(const fs::path& dir, const Geography& geo, std::span<const MonthOutbound> months) {
  csv::Writer w(dir / files::kOutbound, {"cbg", "month", "hour_index", "outbound"});
  csv::Writer c(dir / files::kConvergence, {"month", "iterations", "max_deviation", "converged", "column_rescale"});
  for (const auto& mo : months) {
    const auto m = mo.month.str();
    for (CbgIndex j = 0; j < mo.by_cbg.size(); ++j)
      for (std::size_t t = 0; t < mo.by_cbg[j].size(); ++t)
        w.field(geo.cbg(j)).field(m).field(t).field(mo.by_cbg[j][t]).end_row();
    c.field(m).field(mo.report.iterations).field(mo.report.max_deviation)
        .field(mo.report.converged ? std::string_view("true") : std::string_view("false")).field(mo.rescale)
        .end_row();
  }
  w.commit();
  c.commit();
}

std::vector<MonthOutbound> read_outbound(const fs::path& dir, const Geography& geo) {
  std::map<YearMonth, MonthOutbound> months;
  csv::Reader c(dir / files::kConvergence);
  const auto cm = c.column("month"), ci = c.column("iterations"), cd = c.column("max_deviation"),
             cc = c.column("converged"), cr = c.column("column_rescale");
  c.finish();
  while (c.next()) {
    auto m = read_month(c, cm);
    auto it = c.integer(ci);
    auto dev = c.real(cd);
    auto rescale = c.real(cr);
    if (!m || !it || !dev || !rescale) continue;
    auto& mo = months[*m];
    mo.month = *m;
    mo.report = {static_cast<int>(*it), *dev, c.text(cc) == "true"};
    mo.rescale = *rescale;
    mo.by_cbg.assign(geo.size(), std::vector<double>(static_cast<std::size_t>(m->hours()), 0.0));
  }
  c.finish();

  csv::Reader r(dir / files::kOutbound);
  const auto cbg = r.column("cbg"), month = r.column("month"), hour = r.column("hour_index"),
             out = r.column("outbound");
  r.finish();
  while (r.next()) {
    auto j = read_cbg(r, cbg, geo);
    auto m = read_month(r, month);
    if (!j || !m) continue;
    auto it = months.find(*m);
    if (it == months.end()) {
      r.error(month, "month absent from the convergence table");
      continue;
    }
    auto t = read_hour(r, hour, m->hours());
    auto v = r.real(out);
    if (t && v) it->second.by_cbg[*j][*t] = *v;
  }
  r.finish();

  std::vector<MonthOutbound> result;
  for (auto& [m, mo] : months) result.push_back(std::move(mo));
  return result;
}

void write_population(const fs::path& dir, const Geography& geo, std::span<const MonthPopulation> months) {
  csv::Writer w(dir / files::kPopulation,
                {"cbg", "month", "hour_index", "population", "inbound", "outbound", "flags"});
  csv::Writer a(dir / files::kClampAudit, {"cbg", "month", "hour_index", "pre_clamp", "deficit"});
  for (const auto& mp : months) {
    const auto m = mp.month.str();
    const auto& s = mp.surface;
    for (CbgIndex c = 0; c < s.n_cbgs; ++c)
      for (std::size_t t = 0; t < s.hours; ++t) {
        const auto i = s.cell(c, t);
        w.field(geo.cbg(c)).field(m).field(t).field(s.population[i]).field(s.inbound[i]).field(s.outbound[i])
            .field(assembly::flag_names(s.flags[i])).end_row();
      }
    for (const auto& cr : s.clamps)
      a.field(geo.cbg(cr.cbg)).field(m).field(cr.hour).field(cr.pre_clamp)
          .field(s.population[s.cell(cr.cbg, cr.hour)] - cr.pre_clamp).end_row();
  }
  w.commit();
  a.commit();
}

std::vector<MonthPopulation> read_population(const fs::path& path, const Geography& geo) {
  const std::size_t n = geo.size();
  std::map<YearMonth, MonthPopulation> months;
  csv::Reader r(path);
  const auto cbg = r.column("cbg"), month = r.column("month"), hour = r.column("hour_index"),
             pop = r.column("population"), in = r.column("inbound"), out = r.column("outbound"),
             flags = r.column("flags");
  r.finish();
  while (r.next()) {
    auto c = read_cbg(r, cbg, geo);
    auto m = read_month(r, month);
    if (!c || !m) continue;
    auto t = read_hour(r, hour, m->hours());
    auto p = r.real(pop);
    auto i = r.real(in);
    auto o = r.real(out);
    auto f = assembly::parse_flag_names(r.text(flags));
    if (!f) r.error(flags, "unknown flag in '" + std::string(r.text(flags)) + "'");
    if (!t || !p || !i || !o || !f) continue;
    auto& mp = months[*m];
    auto& s = mp.surface;
    if (s.hours == 0) {
      mp.month = *m;
      s.n_cbgs = n;
      s.hours = static_cast<std::size_t>(m->hours());
      s.population.assign(n * s.hours, 0.0);
      s.inbound.assign(n * s.hours, 0.0);
      s.outbound.assign(n * s.hours, 0.0);
      s.flags.assign(n * s.hours, 0u);
    }
    const auto cell = s.cell(*c, static_cast<std::size_t>(*t));
    s.population[cell] = *p;
    s.inbound[cell] = *i;
    s.outbound[cell] = *o;
    s.flags[cell] = *f;
  }
  r.finish();
  std::vector<MonthPopulation> result;
  for (auto& [m, mp] : months) result.push_back(std::move(mp));
  return result;
}

std::vector<std::optional<assembly::Reference>> read_reference(const fs::path& path, const Geography& geo) {
  csv::Reader r(path);
  const auto cbg = r.column("cbg"), day = r.column("daytime_ref"), night = r.column("nighttime_ref");
  r.finish();
  std::vector<std::optional<assembly::Reference>> out(geo.size());
  while (r.next()) {
    auto c = read_cbg(r, cbg, geo);
    auto d = r.real(day);
    auto n = r.real(night);
    if (!c || !d || !n) continue;
    if (out[*c]) {
      r.error(cbg, "duplicate CBG");
      continue;
    }
    out[*c] = assembly::Reference{*d, *n};
  }
  r.finish();
  return out;
}

void write_evaluation(const fs::path& path, const Geography& geo, std::span<const MonthEvaluation> months) {
  csv::Writer w(path, {"cbg", "month", "noon_mean", "midnight_mean", "daytime_ref", "nighttime_ref", "noon_diff",
                       "midnight_diff"});
  auto opt = [&](const std::optional<double>& v) -> csv::Writer& {
    return v ? w.field(*v) : w.field(std::string_view{});
  };
  for (const auto& me : months)
    for (const auto& row : me.comparison.rows) {
      w.field(geo.cbg(row.cbg)).field(me.month.str()).field(row.noon_mean).field(row.midnight_mean)
          .field(row.daytime_ref).field(row.nighttime_ref);
      opt(row.noon_diff);
      opt(row.midnight_diff);
      w.end_row();
    }
  w.commit();
}

}  // namespace saac::io
