// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "saac/saac.h"

namespace {

struct Options {
  std::string config, out, in, reference;
  std::optional<std::string> seed, ipf_tol, ipf_max_iter, threads;
  std::vector<std::string> sets;
  bool quiet = false;
};

void add_common(CLI::App* sub, Options& o, bool with_reference) {
  sub->add_option("--config", o.config, "JSON config file");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--in", o.in, "Input directory (defaults to --out)");
  sub->add_option("--seed", o.seed, "Simulation seed");
  sub->add_option("--ipf-tol", o.ipf_tol, "IPF convergence tolerance");
  sub->add_option("--ipf-max-iter", o.ipf_max_iter, "IPF iteration cap");
  sub->add_option("--threads", o.threads, "Worker threads");
  sub->add_option("--set", o.sets, "Override a config key: key=value (repeatable)");
  sub->add_flag("-q,--quiet", o.quiet, "Do not list artifacts");
  if (with_reference) sub->add_option("--reference", o.reference, "Reference table (cbg, daytime_ref, nighttime_ref)");
}

int report(saac_status status) {
  std::fprintf(stderr, "saac: %s: %s\n", saac_status_name(status), saac_last_error());
  return saac_exit_code(status);
}

int run(const std::string& subcommand, const Options& o) {
  saac_config* cfg = nullptr;
  if (saac_status s = saac_config_create(&cfg); s != SAAC_OK) return report(s);
  auto apply = [&]() -> saac_status {
    if (!o.config.empty())
      if (auto s = saac_config_load_file(cfg, o.config.c_str()); s != SAAC_OK) return s;
    std::vector<std::pair<std::string, std::string>> pairs;
    if (!o.out.empty()) pairs.emplace_back("output_dir", o.out);
    if (!o.in.empty()) pairs.emplace_back("input_dir", o.in);
    if (!o.reference.empty()) pairs.emplace_back("reference", o.reference);
    if (o.seed) pairs.emplace_back("world.seed", *o.seed);
    if (o.ipf_tol) pairs.emplace_back("ipf.tol", *o.ipf_tol);
    if (o.ipf_max_iter) pairs.emplace_back("ipf.max_iter", *o.ipf_max_iter);
    if (o.threads) pairs.emplace_back("threads", *o.threads);
    for (const auto& kv : o.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "saac: --set expects key=value, got '%s'\n", kv.c_str());
        return SAAC_ERR_CONFIG;
      }
      pairs.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [k, v] : pairs)
      if (auto s = saac_config_set(cfg, k.c_str(), v.c_str()); s != SAAC_OK) return s;
    return SAAC_OK;
  };

  saac_status s = apply();
  saac_result* result = nullptr;
  if (s == SAAC_OK) s = saac_run(cfg, subcommand.c_str(), &result);
  saac_config_destroy(cfg);
  if (s != SAAC_OK) return report(s);
  if (!o.quiet)
    for (size_t i = 0; i < saac_result_artifact_count(result); ++i) std::printf("%s\n", saac_result_artifact(result, i));
  saac_result_destroy(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hourly population estimation from mobile device observations"};
  app.set_version_flag("--version", std::string(saac_version()));
  app.require_subcommand(1);

  Options opts;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Generate a synthetic world and its input tables"},
      {"calibrate", "Screen anchor weeks and build the county-month OSF table"},
      {"inbound", "Estimate hourly inbound presence per CBG"},
      {"outbound", "Balance the time-origin matrix and extract outbound presence"},
      {"assemble", "Combine residents, inbound and outbound into the population table"},
      {"evaluate", "Compare weekday noon and midnight means with a reference"},
      {"all", "Run calibrate through evaluate"},
  };
  std::string chosen;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, opts, std::string(name) == "evaluate" || std::string(name) == "all");
    sub->callback([&chosen, n = std::string(name)] { chosen = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  return run(chosen, opts);
}
