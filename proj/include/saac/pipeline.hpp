#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "saac/anchors.hpp"
#include "saac/assembly.hpp"
#include "saac/error.hpp"
#include "saac/outbound.hpp"
#include "saac/synth.hpp"

namespace saac::pipeline {

/// Every tunable of a run. Defaults are the published thresholds; anything a
/// config file or `set` changes is echoed as an override in the manifest.
struct PipelineConfig {
  std::string input_dir;   // empty: same as output_dir
  std::string output_dir = "saac_out";
  std::string reference;   // empty: <input_dir>/reference.csv when present
  unsigned threads = 1;

  double ipf_tol = 1e-8;
  int ipf_max_iter = 100;
  outbound::ReconcileLimits reconcile;
  anchors::AnchorParams anchors;
  assembly::EvaluationParams evaluation;
  synth::WorldConfig world;

  std::filesystem::path input_path() const { return input_dir.empty() ? output_dir : input_dir; }

  /// Nested JSON snapshot of every field.
  nlohmann::json to_json() const;
  /// Applies a (possibly partial) nested or dotted-key JSON object. Unknown keys
  /// and mistyped values throw ErrorKind::Config.
  void merge(const nlohmann::json& overrides);
  /// Sets one dotted key ("anchors.min_school_days") from its text form.
  void set(std::string_view key, std::string_view value);
  /// Dotted keys whose values differ from the defaults, with their values.
  nlohmann::json overrides() const;
  static std::vector<std::string> keys();

  void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& path);

enum class Subcommand { Simulate, Calibrate, Inbound, Outbound, Assemble, Evaluate, All };

std::optional<Subcommand> parse_subcommand(std::string_view name);
const char* to_string(Subcommand s) noexcept;

struct RunResult {
  nlohmann::json manifest;
  std::vector<std::string> artifacts;  // files written, relative to output_dir
};

/// Runs one stage, or the whole chain for `All`, writing artifact tables and
/// appending to <output_dir>/manifest.json.
RunResult run(Subcommand subcommand, const PipelineConfig& config);

/// Process exit status for an error kind: 1 for input and configuration
/// problems, 2 for infeasible or unresolvable estimation.
int exit_code(ErrorKind kind) noexcept;

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace saac::pipeline
