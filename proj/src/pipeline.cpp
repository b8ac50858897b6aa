#include "saac/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <variant>

#include "saac/calibration.hpp"
#include "saac/csv.hpp"
#include "saac/inbound.hpp"
#include "saac/io.hpp"
#include "saac/log.hpp"
#include "saac/parallel.hpp"
#include "saac/version.hpp"

namespace saac::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// size_t and uint64_t each map onto one of the two unsigned long types.
using FieldRef = std::variant<int*, unsigned*, unsigned long*, unsigned long long*, double*, std::string*, YearMonth*>;

/// The single table of configurable fields. Everything that reads, writes or
/// diffs a config goes through it.
std::vector<std::pair<std::string, FieldRef>> fields(PipelineConfig& c) {
  auto& a = c.anchors;
  auto& w = c.world;
  return {
      {"input_dir", &c.input_dir},
      {"output_dir", &c.output_dir},
      {"reference", &c.reference},
      {"threads", &c.threads},
      {"ipf.tol", &c.ipf_tol},
      {"ipf.max_iter", &c.ipf_max_iter},
      {"reconcile.warn_below", &c.reconcile.warn_below},
      {"reconcile.warn_above", &c.reconcile.warn_above},
      {"anchors.savgol_window", &a.savgol_window},
      {"anchors.savgol_order", &a.savgol_order},
      {"anchors.peak_min_height", &a.peaks.min_height},
      {"anchors.peak_min_prominence", &a.peaks.min_prominence},
      {"anchors.peak_min_distance", &a.peaks.min_distance},
      {"anchors.peak_min_width", &a.peaks.min_width},
      {"anchors.school_hour_start", &a.school_hour_start},
      {"anchors.school_hour_end", &a.school_hour_end},
      {"anchors.after_school_start", &a.after_school_start},
      {"anchors.after_school_end", &a.after_school_end},
      {"anchors.weekend_day_start", &a.weekend_day_start},
      {"anchors.weekend_day_end", &a.weekend_day_end},
      {"anchors.baseline_fraction", &a.baseline_fraction},
      {"anchors.min_baseline_peaks", &a.min_baseline_peaks},
      {"anchors.gathering_median_multiple", &a.gathering_median_multiple},
      {"anchors.after_school_min_hourly", &a.after_school_min_hourly},
      {"anchors.weekend_min_hourly", &a.weekend_min_hourly},
      {"anchors.typical_hour", &a.typical_hour},
      {"anchors.typical_percentile", &a.typical_percentile},
      {"anchors.min_school_days", &a.min_school_days},
      {"anchors.max_gathering_ratio", &a.max_gathering_ratio},
      {"anchors.max_osf", &a.max_osf},
      {"evaluation.noon_hour", &c.evaluation.noon_hour},
      {"evaluation.midnight_hour", &c.evaluation.midnight_hour},
      {"world.n_cbgs", &w.n_cbgs},
      {"world.cbgs_per_county", &w.cbgs_per_county},
      {"world.counties_per_state", &w.counties_per_state},
      {"world.residents_min", &w.residents_min},
      {"world.residents_max", &w.residents_max},
      {"world.penetration_min", &w.penetration_min},
      {"world.penetration_max", &w.penetration_max},
      {"world.observation_rate", &w.observation_rate},
      {"world.n_schools", &w.n_schools},
      {"world.school_size_min", &w.school_size_min},
      {"world.school_size_max", &w.school_size_max},
      {"world.school_start_hour", &w.school_start_hour},
      {"world.school_end_hour", &w.school_end_hour},
      {"world.commuter_fraction", &w.commuter_fraction},
      {"world.commute_start_hour", &w.commute_start_hour},
      {"world.commute_end_hour", &w.commute_end_hour},
      {"world.commute_jitter_hours", &w.commute_jitter_hours},
      {"world.local_job_share", &w.local_job_share},
      {"world.job_center_fraction", &w.job_center_fraction},
      {"world.job_center_weight", &w.job_center_weight},
      {"world.errand_rate", &w.errand_rate},
      {"world.gathering_rate", &w.gathering_rate},
      {"world.start_month", &w.start_month},
      {"world.months", &w.months},
      {"world.weeks", &w.weeks},
      {"world.seed", &w.seed},
  };
}

json field_value(const FieldRef& f) {
  return std::visit(
      [](auto* p) -> json {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, YearMonth>)
          return p->str();
        else
          return *p;
      },
      f);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& detail) {
  fail(ErrorKind::Config, "config key '" + key + "': " + detail);
}

void assign_json(const std::string& key, const FieldRef& f, const json& v) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (!v.is_string()) bad_value(key, "expected a string");
          *p = v.get<std::string>();
        } else if constexpr (std::is_same_v<T, YearMonth>) {
          auto m = v.is_string() ? YearMonth::parse(v.get<std::string>()) : std::nullopt;
          if (!m) bad_value(key, "expected YYYY-MM");
          *p = *m;
        } else if constexpr (std::is_same_v<T, double>) {
          if (!v.is_number()) bad_value(key, "expected a number");
          *p = v.get<double>();
        } else {
          if (!v.is_number_integer()) bad_value(key, "expected an integer");
          if constexpr (std::is_unsigned_v<T>)
            if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
              bad_value(key, "expected a non-negative integer");
          *p = v.get<T>();
        }
      },
      f);
}

void assign_text(const std::string& key, const FieldRef& f, std::string_view text) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::string>) {
          *p = std::string(text);
        } else if constexpr (std::is_same_v<T, YearMonth>) {
          auto m = YearMonth::parse(text);
          if (!m) bad_value(key, "expected YYYY-MM, got '" + std::string(text) + "'");
          *p = *m;
        } else {
          json v;
          try {
            v = json::parse(text);
          } catch (const json::exception&) {
            bad_value(key, "cannot parse '" + std::string(text) + "'");
          }
          assign_json(key, f, v);
        }
      },
      f);
}

void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out[prefix] = j;
  }
}

std::string hex(const unsigned char* data, unsigned n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < n; ++i) {
    s += digits[data[i] >> 4];
    s += digits[data[i] & 15];
  }
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// In-memory artifacts shared by the stages of one run; each is loaded from
/// disk on first use when an earlier stage did not produce it.
class Context {
 public:
  explicit Context(const PipelineConfig& config) : cfg_(config), in_(config.input_path()), out_(config.output_dir) {
    fs::create_directories(out_);
    const auto path = out_ / io::files::kManifest;
    if (fs::exists(path)) {
      std::ifstream f(path);
      manifest_ = json::parse(f, nullptr, false);
      if (manifest_.is_discarded() || !manifest_.is_object()) manifest_ = json::object();
    }
    if (!manifest_.contains("stages")) manifest_["stages"] = json::array();
    manifest_["tool"] = "saac";
    manifest_["version"] = kVersion;
    manifest_["config"] = cfg_.to_json();
    manifest_["overrides"] = cfg_.overrides();
  }

  const PipelineConfig& cfg() const { return cfg_; }
  const fs::path& in() const { return in_; }
  const fs::path& out() const { return out_; }

  // Accessors record the digest of every file they stand for, whether or not
  // the artifact is already in memory.
  const Dataset& dataset() {
    for (const auto& f : io::input_files(in_)) record_input(f);
    if (!dataset_) dataset_ = io::read_dataset(in_);
    return *dataset_;
  }

  const calibration::OsfTable& osf() {
    record_input(out_ / io::files::kOsf);
    if (!osf_) osf_ = io::read_osf(out_ / io::files::kOsf);
    return *osf_;
  }

  const std::vector<inbound::MonthInbound>& inbound() {
    record_input(out_ / io::files::kInbound);
    record_input(out_ / io::files::kInboundAudit);
    if (!inbound_) inbound_ = io::read_inbound(out_, dataset().geo);
    return *inbound_;
  }

  const std::vector<io::MonthOutbound>& outbound() {
    record_input(out_ / io::files::kOutbound);
    record_input(out_ / io::files::kConvergence);
    if (!outbound_) outbound_ = io::read_outbound(out_, dataset().geo);
    return *outbound_;
  }

  const std::vector<io::MonthPopulation>& population() {
    record_input(out_ / io::files::kPopulation);
    if (!population_) population_ = io::read_population(out_ / io::files::kPopulation, geo());
    return *population_;
  }

  /// Geography alone, without reading the other input tables.
  const Geography& geo() {
    record_input(in_ / io::files::kGeo);
    if (dataset_) return dataset_->geo;
    if (!geo_) geo_ = io::read_geo(in_ / io::files::kGeo);
    return *geo_;
  }

  void set_osf(calibration::OsfTable t) { osf_ = std::move(t); }
  void set_inbound(std::vector<inbound::MonthInbound> v) { inbound_ = std::move(v); }
  void set_outbound(std::vector<io::MonthOutbound> v) { outbound_ = std::move(v); }
  void set_population(std::vector<io::MonthPopulation> v) { population_ = std::move(v); }

  void record_input(const fs::path& path) {
    const auto name = path.filename().string();
    if (stage_inputs_.contains(name)) return;
    auto it = digests_.find(path.string());
    if (it == digests_.end()) {
      if (!fs::exists(path)) fail(ErrorKind::Io, "missing input " + path.string());
      it = digests_.emplace(path.string(), sha256_file(path)).first;
    }
    stage_inputs_[name] = it->second;
  }

  /// Runs one stage and appends its manifest entry.
  void stage(const char* name, const std::function<json(std::vector<std::string>&)>& body) {
    stage_inputs_ = json::object();
    std::vector<std::string> outputs;
    const auto start = std::chrono::steady_clock::now();
    json details = body(outputs);
    json entry = {{"stage", name}, {"seconds", seconds_since(start)}, {"inputs", stage_inputs_},
                  {"outputs", outputs}};
    if (!details.is_null()) entry["details"] = std::move(details);
    manifest_["stages"].push_back(std::move(entry));
    for (auto& o : outputs) artifacts_.push_back(std::move(o));
    save_manifest();
  }

  void save_manifest() const {
    const auto path = out_ / io::files::kManifest;
    const auto tmp = fs::path(path.string() + ".tmp");
    {
      std::ofstream f(tmp, std::ios::trunc);
      f << manifest_.dump(2) << '\n';
      if (!f) fail(ErrorKind::Io, "cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
  }

  RunResult result() const { return {manifest_, artifacts_}; }

 private:
  PipelineConfig cfg_;
  fs::path in_, out_;
  json manifest_ = json::object();
  json stage_inputs_ = json::object();
  std::map<std::string, std::string> digests_;  // files are never rewritten within a run
  std::vector<std::string> artifacts_;
  std::optional<Dataset> dataset_;
  std::optional<Geography> geo_;
  std::optional<calibration::OsfTable> osf_;
  std::optional<std::vector<inbound::MonthInbound>> inbound_;
  std::optional<std::vector<io::MonthOutbound>> outbound_;
  std::optional<std::vector<io::MonthPopulation>> population_;
};

const MonthData& month_data(const Dataset& d, YearMonth m) {
  for (const auto& md : d.months)
    if (md.month == m) return md;
  fail(ErrorKind::Validation, "no neighborhood data for month " + m.str());
}

json simulate(Context& ctx, std::vector<std::string>& outputs) {
  const auto world = synth::generate_world(ctx.cfg().world);
  const auto truth = synth::ground_truth(world);
  const auto data = synth::observe(world);
  io::write_dataset(ctx.out(), data);
  io::write_truth(ctx.out(), world.geo, truth);
  for (const auto& f : io::input_files(ctx.out())) outputs.push_back(f.filename().string());
  for (const char* f : {io::files::kTruthPopulation, io::files::kTruthDepartures, io::files::kTruthAttendance,
                        io::files::kReference})
    outputs.emplace_back(f);
  std::vector<std::string> months;
  for (const auto& mt : truth.months) months.push_back(mt.month.str());
  return {{"cbgs", world.geo.size()},
          {"residents", truth.total_residents},
          {"schools", world.schools.size()},
          {"gatherings", world.gatherings.size()},
          {"weeks", world.span.weeks},
          {"months", months}};
}

json calibrate(Context& ctx, std::vector<std::string>& outputs) {
  const auto& data = ctx.dataset();
  const auto& params = ctx.cfg().anchors;

  std::map<std::string, std::vector<anchors::SchoolWeekRecord>> by_school;
  for (const auto& r : data.school_weeks) by_school[r.poi_id].push_back(r);
  std::vector<std::vector<anchors::SchoolWeekRecord>*> schools;
  for (auto& [id, recs] : by_school) schools.push_back(&recs);
  std::vector<std::vector<anchors::AnchorWeekSummary>> screened(schools.size());
  parallel_for(schools.size(), ctx.cfg().threads,
               [&](std::size_t i) { screened[i] = anchors::screen_school(std::move(*schools[i]), params); });

  std::vector<anchors::AnchorWeekSummary> weeks;
  json rejections = json::object();
  std::size_t accepted = 0;
  for (auto& s : screened)
    for (auto& w : s) {
      accepted += w.accepted;
      for (auto r : w.rejection_reasons) {
        auto& slot = rejections[anchors::to_string(r)];
        slot = slot.is_null() ? 1 : slot.get<int>() + 1;
      }
      weeks.push_back(std::move(w));
    }
  io::write_anchor_weeks(ctx.out() / io::files::kAnchorWeeks, weeks);
  outputs.emplace_back(io::files::kAnchorWeeks);

  std::set<YearMonth> months;
  for (const auto& md : data.months) months.insert(md.month);
  const auto samples = calibration::samples_from(weeks);
  auto table = calibration::build_osf_table(samples, data.geo.state_of_county(), months);
  io::write_osf(ctx.out() / io::files::kOsf, table);
  outputs.emplace_back(io::files::kOsf);

  json provenance = json::object();
  for (const auto& row : table.rows()) {
    auto& slot = provenance[calibration::to_string(row.provenance)];
    slot = slot.is_null() ? 1 : slot.get<int>() + 1;
  }
  ctx.set_osf(std::move(table));
  return {{"schools", by_school.size()},
          {"weeks", weeks.size()},
          {"accepted_weeks", accepted},
          {"rejection_reasons", rejections},
          {"osf_provenance", provenance}};
}

json estimate_inbound(Context& ctx, std::vector<std::string>& outputs) {
  const auto& data = ctx.dataset();
  const auto& osf = ctx.osf();
  std::vector<inbound::MonthInbound> months;
  json flags = json::object();
  for (const auto& md : data.months) {
    months.push_back(inbound::estimate_month(data.geo, data.residents, md, osf, ctx.cfg().threads));
    for (const auto& d : months.back().by_cbg)
      for (unsigned bit = 1; bit <= inbound::kOsfCompleted; bit <<= 1)
        if (d.flags & bit) {
          auto& slot = flags[inbound::flag_names(bit)];
          slot = slot.is_null() ? 1 : slot.get<int>() + 1;
        }
  }
  io::write_inbound(ctx.out(), data.geo, months);
  outputs.emplace_back(io::files::kInbound);
  outputs.emplace_back(io::files::kInboundAudit);
  ctx.set_inbound(std::move(months));
  return {{"flag_counts", flags}};
}

json estimate_outbound(Context& ctx, std::vector<std::string>& outputs) {
  const auto& data = ctx.dataset();
  const auto& cfg = ctx.cfg();
  std::vector<io::MonthOutbound> months;
  json reports = json::array();
  for (const auto& mi : ctx.inbound()) {
    const auto& md = month_data(data, mi.month);
    auto spec = outbound::reconcile(outbound::build_row_marginals(mi),
                                    outbound::build_col_marginals(md, data.residents, mi), cfg.reconcile);
    auto res = outbound::ipf(outbound::uniform_seed(spec), spec, cfg.ipf_tol, cfg.ipf_max_iter, cfg.threads);
    if (!res.report.converged)
      log::warn("IPF for " + mi.month.str() + " stopped after " + std::to_string(res.report.iterations) +
                " iterations at deviation " + csv::format_double(res.report.max_deviation));
    reports.push_back({{"month", mi.month.str()},
                       {"iterations", res.report.iterations},
                       {"max_deviation", res.report.max_deviation},
                       {"converged", res.report.converged},
                       {"column_rescale", spec.rescale}});
    months.push_back({mi.month, outbound::extract_outbound(res.matrix), res.report, spec.rescale});
  }
  io::write_outbound(ctx.out(), data.geo, months);
  outputs.emplace_back(io::files::kOutbound);
  outputs.emplace_back(io::files::kConvergence);
  ctx.set_outbound(std::move(months));
  return {{"convergence", reports}};
}

json assemble(Context& ctx, std::vector<std::string>& outputs) {
  const auto& data = ctx.dataset();
  const auto& inbound = ctx.inbound();
  const auto& outbound = ctx.outbound();
  std::vector<std::string> names(data.geo.size());
  for (CbgIndex c = 0; c < names.size(); ++c) names[c] = data.geo.cbg(c);

  std::vector<io::MonthPopulation> months;
  json per_month = json::array();
  for (const auto& mi : inbound) {
    const io::MonthOutbound* mo = nullptr;
    for (const auto& o : outbound)
      if (o.month == mi.month) mo = &o;
    if (!mo) fail(ErrorKind::Shape, "no outbound estimate for " + mi.month.str());

    std::vector<std::vector<double>> in(mi.by_cbg.size());
    std::vector<unsigned> flags(mi.by_cbg.size(), 0u);
    for (std::size_t c = 0; c < mi.by_cbg.size(); ++c) {
      const auto& d = mi.by_cbg[c];
      in[c] = d.inbound;
      if (d.flags & (inbound::kInboundMissing | inbound::kAllOriginsExcluded)) flags[c] |= assembly::kInboundMissing;
      if (d.flags & inbound::kOsfFallback) flags[c] |= assembly::kOsfFallback;
    }
    auto surface = assembly::assemble(data.residents, in, mo->by_cbg, flags, names);
    per_month.push_back({{"month", mi.month.str()},
                         {"clamped_cells", surface.clamps.size()},
                         {"clamp_deficit", surface.clamp_deficit()}});
    months.push_back({mi.month, std::move(surface)});
  }
  io::write_population(ctx.out(), data.geo, months);
  outputs.emplace_back(io::files::kPopulation);
  outputs.emplace_back(io::files::kClampAudit);
  ctx.set_population(std::move(months));
  return {{"months", per_month}};
}

fs::path reference_path(const Context& ctx) {
  return ctx.cfg().reference.empty() ? ctx.in() / io::files::kReference : fs::path(ctx.cfg().reference);
}

json evaluate(Context& ctx, std::vector<std::string>& outputs) {
  const auto& geo = ctx.geo();
  const auto ref_path = reference_path(ctx);
  ctx.record_input(ref_path);
  const auto refs = io::read_reference(ref_path, geo);
  std::vector<io::MonthEvaluation> months;
  json summary = json::array();
  for (const auto& mp : ctx.population()) {
    auto cmp = assembly::evaluate_reference(mp.surface, mp.month, refs, ctx.cfg().evaluation);
    summary.push_back({{"month", mp.month.str()},
                       {"cbgs", cmp.rows.size()},
                       {"mean_abs_noon_diff", cmp.mean_abs_noon_diff},
                       {"mean_abs_midnight_diff", cmp.mean_abs_midnight_diff},
                       {"excluded_noon", cmp.excluded_noon},
                       {"excluded_midnight", cmp.excluded_midnight}});
    months.push_back({mp.month, std::move(cmp)});
  }
  io::write_evaluation(ctx.out() / io::files::kEvaluation, geo, months);
  outputs.emplace_back(io::files::kEvaluation);
  return {{"months", summary}};
}

}  // namespace

json PipelineConfig::to_json() const {
  json out = json::object();
  for (const auto& [key, f] : fields(const_cast<PipelineConfig&>(*this))) {
    std::string pointer = "/" + key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    out[json::json_pointer(pointer)] = field_value(f);
  }
  return out;
}

void PipelineConfig::merge(const json& overrides) {
  if (!overrides.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
  std::map<std::string, json> flat;
  flatten(overrides, "", flat);
  auto table = fields(*this);
  for (const auto& [key, value] : flat) {
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == key; });
    if (it == table.end()) fail(ErrorKind::Config, "unknown config key '" + key + "'");
    assign_json(key, it->second, value);
  }
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  for (const auto& [k, f] : fields(*this))
    if (k == key) {
      assign_text(k, f, value);
      return;
    }
  fail(ErrorKind::Config, "unknown config key '" + std::string(key) + "'");
}

json PipelineConfig::overrides() const {
  PipelineConfig defaults;
  const auto mine = fields(const_cast<PipelineConfig&>(*this));
  const auto base = fields(defaults);
  json out = json::object();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    const auto& key = mine[i].first;
    if (key == "input_dir" || key == "output_dir" || key == "reference" || key == "threads") continue;
    auto v = field_value(mine[i].second);
    if (v != field_value(base[i].second)) out[key] = std::move(v);
  }
  return out;
}

std::vector<std::string> PipelineConfig::keys() {
  PipelineConfig c;
  std::vector<std::string> out;
  for (const auto& [k, f] : fields(c)) out.push_back(k);
  return out;
}

void PipelineConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::Config, "invalid config: " + what);
  };
  auto hour_window = [&](int start, int end, const std::string& name) {
    check(0 <= start && start < end && end <= 24, name + " must satisfy 0 <= start < end <= 24");
  };
  check(!output_dir.empty(), "output_dir must be set");
  check(threads >= 1, "threads must be >= 1");
  check(ipf_tol > 0.0 && std::isfinite(ipf_tol), "ipf.tol must be positive");
  check(ipf_max_iter >= 1, "ipf.max_iter must be >= 1");
  check(reconcile.warn_below > 0.0 && reconcile.warn_below <= reconcile.warn_above, "reconcile limits out of order");
  const auto& a = anchors;
  check(a.savgol_window > a.savgol_order && a.savgol_window % 2 == 1 && a.savgol_order >= 0,
        "anchors.savgol_window must be odd and exceed savgol_order");
  check(a.peaks.min_distance >= 1, "anchors.peak_min_distance must be >= 1");
  hour_window(a.school_hour_start, a.school_hour_end, "anchors school hours");
  hour_window(a.after_school_start, a.after_school_end, "anchors after-school hours");
  hour_window(a.weekend_day_start, a.weekend_day_end, "anchors weekend hours");
  check(a.baseline_fraction > 0.0, "anchors.baseline_fraction must be positive");
  check(a.typical_hour >= 0 && a.typical_hour < 24, "anchors.typical_hour must be an hour of day");
  check(a.typical_percentile >= 0.0 && a.typical_percentile <= 100.0, "anchors.typical_percentile must be in [0, 100]");
  check(a.min_school_days >= 0 && a.min_school_days <= 5, "anchors.min_school_days must be in [0, 5]");
  check(a.max_gathering_ratio >= 0.0 && a.max_osf > 0.0, "anchors ratio caps must be positive");
  check(evaluation.noon_hour >= 0 && evaluation.noon_hour < 24 && evaluation.midnight_hour >= 0 &&
            evaluation.midnight_hour < 24,
        "evaluation hours must be hours of day");
  world.validate();
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot open config " + path.string());
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::Config, "config " + path.string() + " is not valid JSON");
  PipelineConfig c;
  c.merge(j);
  return c;
}

std::optional<Subcommand> parse_subcommand(std::string_view name) {
  for (auto s : {Subcommand::Simulate, Subcommand::Calibrate, Subcommand::Inbound, Subcommand::Outbound,
                 Subcommand::Assemble, Subcommand::Evaluate, Subcommand::All})
    if (name == to_string(s)) return s;
  return std::nullopt;
}

const char* to_string(Subcommand s) noexcept {
  switch (s) {
    case Subcommand::Simulate: return "simulate";
    case Subcommand::Calibrate: return "calibrate";
    case Subcommand::Inbound: return "inbound";
    case Subcommand::Outbound: return "outbound";
    case Subcommand::Assemble: return "assemble";
    case Subcommand::Evaluate: return "evaluate";
    case Subcommand::All: return "all";
  }
  return "?";
}

RunResult run(Subcommand subcommand, const PipelineConfig& config) {
  config.validate();
  Context ctx(config);
  switch (subcommand) {
    case Subcommand::Simulate: ctx.stage("simulate", [&](auto& o) { return simulate(ctx, o); }); break;
    case Subcommand::Calibrate: ctx.stage("calibrate", [&](auto& o) { return calibrate(ctx, o); }); break;
    case Subcommand::Inbound: ctx.stage("inbound", [&](auto& o) { return estimate_inbound(ctx, o); }); break;
    case Subcommand::Outbound: ctx.stage("outbound", [&](auto& o) { return estimate_outbound(ctx, o); }); break;
    case Subcommand::Assemble: ctx.stage("assemble", [&](auto& o) { return assemble(ctx, o); }); break;
    case Subcommand::Evaluate: ctx.stage("evaluate", [&](auto& o) { return evaluate(ctx, o); }); break;
    case Subcommand::All:
      ctx.stage("calibrate", [&](auto& o) { return calibrate(ctx, o); });
      ctx.stage("inbound", [&](auto& o) { return estimate_inbound(ctx, o); });
      ctx.stage("outbound", [&](auto& o) { return estimate_outbound(ctx, o); });
      ctx.stage("assemble", [&](auto& o) { return assemble(ctx, o); });
      if (fs::exists(reference_path(ctx)))
        ctx.stage("evaluate", [&](auto& o) { return evaluate(ctx, o); });
      else
        log::info("no reference table at " + reference_path(ctx).string() + "; skipping evaluate");
      break;
  }
  return ctx.result();
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Unresolved:
    case ErrorKind::Infeasible:
    case ErrorKind::EmptyMonth:
    case ErrorKind::NoBaseline:
      return 2;
    default:
      return 1;
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> md(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(md.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 20);
  while (f) {
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (f.gcount() > 0) EVP_DigestUpdate(md.get(), buf.data(), static_cast<std::size_t>(f.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(md.get(), digest, &len);
  return hex(digest, len);
}

}  // namespace saac::pipeline
