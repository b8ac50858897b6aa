#include "saac/saac.h"

#include <cstring>
#include <string>
#include <vector>

#include "saac/error.hpp"
#include "saac/log.hpp"
#include "saac/outbound.hpp"
#include "saac/pipeline.hpp"
#include "saac/signal.hpp"
#include "saac/version.hpp"

struct saac_config {
  saac::pipeline::PipelineConfig value;
};

struct saac_result {
  std::string manifest;
  std::vector<std::string> artifacts;
};

namespace {

thread_local std::string last_error;

saac_status status_of(saac::ErrorKind kind) {
  using saac::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return SAAC_ERR_INVALID_ARGUMENT;
    case ErrorKind::Validation: return SAAC_ERR_VALIDATION;
    case ErrorKind::NoBaseline: return SAAC_ERR_NO_BASELINE;
    case ErrorKind::Unresolved: return SAAC_ERR_UNRESOLVED;
    case ErrorKind::Infeasible: return SAAC_ERR_INFEASIBLE;
    case ErrorKind::EmptyMonth: return SAAC_ERR_EMPTY_MONTH;
    case ErrorKind::Shape: return SAAC_ERR_SHAPE;
    case ErrorKind::Config: return SAAC_ERR_CONFIG;
    case ErrorKind::Io: return SAAC_ERR_IO;
  }
  return SAAC_ERR_INTERNAL;
}

saac_status failure(saac_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

/// Runs `body`, translating exceptions into status codes.
template <class Fn>
saac_status guarded(Fn&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const saac::ValidationError& e) {
    std::string msg = e.what();
    for (const auto& d : e.diagnostics()) msg += "\n  " + d;
    return failure(SAAC_ERR_VALIDATION, msg);
  } catch (const saac::Error& e) {
    return failure(status_of(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return failure(SAAC_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return failure(SAAC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return failure(SAAC_ERR_INTERNAL, e.what());
  }
}

#define SAAC_REQUIRE(cond, msg) \
  if (!(cond)) return failure(SAAC_ERR_INVALID_ARGUMENT, msg)

}  // namespace

extern "C" {

const char* saac_version(void) { return saac::kVersion; }

const char* saac_status_name(saac_status status) {
  switch (status) {
    case SAAC_OK: return "ok";
    case SAAC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SAAC_ERR_VALIDATION: return "validation";
    case SAAC_ERR_NO_BASELINE: return "no_baseline";
    case SAAC_ERR_UNRESOLVED: return "unresolved";
    case SAAC_ERR_INFEASIBLE: return "infeasible";
    case SAAC_ERR_EMPTY_MONTH: return "empty_month";
    case SAAC_ERR_SHAPE: return "shape";
    case SAAC_ERR_CONFIG: return "config";
    case SAAC_ERR_IO: return "io";
    case SAAC_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case SAAC_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* saac_last_error(void) { return last_error.c_str(); }

int saac_exit_code(saac_status status) {
  switch (status) {
    case SAAC_OK: return 0;
    case SAAC_ERR_NO_BASELINE: return saac::pipeline::exit_code(saac::ErrorKind::NoBaseline);
    case SAAC_ERR_UNRESOLVED: return saac::pipeline::exit_code(saac::ErrorKind::Unresolved);
    case SAAC_ERR_INFEASIBLE: return saac::pipeline::exit_code(saac::ErrorKind::Infeasible);
    case SAAC_ERR_EMPTY_MONTH: return saac::pipeline::exit_code(saac::ErrorKind::EmptyMonth);
    default: return 1;
  }
}

void saac_set_log_callback(saac_log_callback callback, void* user) {
  static saac::log::Sink original = saac::log::set_sink(nullptr);
  if (!callback) {
    saac::log::set_sink(original);
    return;
  }
  saac::log::set_sink([callback, user](saac::log::Level level, const std::string& message) {
    callback(static_cast<saac_log_level>(level), message.c_str(), user);
  });
}

saac_status saac_config_create(saac_config** out) {
  SAAC_REQUIRE(out, "out must not be NULL");
  return guarded([&] {
    *out = new saac_config{};
    return SAAC_OK;
  });
}

void saac_config_destroy(saac_config* config) { delete config; }

saac_status saac_config_load_file(saac_config* config, const char* path) {
  SAAC_REQUIRE(config && path, "config and path must not be NULL");
  return guarded([&] {
    auto loaded = saac::pipeline::load_config(path);
    config->value = std::move(loaded);
    return SAAC_OK;
  });
}

saac_status saac_config_set(saac_config* config, const char* key, const char* value) {
  SAAC_REQUIRE(config && key && value, "config, key and value must not be NULL");
  return guarded([&] {
    config->value.set(key, value);
    return SAAC_OK;
  });
}

saac_status saac_config_to_json(const saac_config* config, char** out) {
  SAAC_REQUIRE(config && out, "config and out must not be NULL");
  return guarded([&] {
    const auto text = config->value.to_json().dump(2);
    *out = new char[text.size() + 1];
    std::memcpy(*out, text.c_str(), text.size() + 1);
    return SAAC_OK;
  });
}

void saac_string_free(char* text) { delete[] text; }

saac_status saac_run(const saac_config* config, const char* subcommand, saac_result** out) {
  SAAC_REQUIRE(config && subcommand && out, "config, subcommand and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    const auto sub = saac::pipeline::parse_subcommand(subcommand);
    if (!sub) return failure(SAAC_ERR_INVALID_ARGUMENT, std::string("unknown subcommand '") + subcommand + "'");
    auto result = saac::pipeline::run(*sub, config->value);
    *out = new saac_result{result.manifest.dump(2), std::move(result.artifacts)};
    return SAAC_OK;
  });
}

const char* saac_result_manifest(const saac_result* result) { return result ? result->manifest.c_str() : ""; }

size_t saac_result_artifact_count(const saac_result* result) { return result ? result->artifacts.size() : 0; }

const char* saac_result_artifact(const saac_result* result, size_t index) {
  if (!result || index >= result->artifacts.size()) return nullptr;
  return result->artifacts[index].c_str();
}

void saac_result_destroy(saac_result* result) { delete result; }

saac_status saac_savgol_smooth(const double* values, size_t n, int window, int order, double* out) {
  SAAC_REQUIRE(values && out, "values and out must not be NULL");
  return guarded([&] {
    const auto smoothed = saac::signal::savgol_smooth({values, n}, window, order);
    std::copy(smoothed.begin(), smoothed.end(), out);
    return SAAC_OK;
  });
}

saac_status saac_find_peaks(const double* values, size_t n, double min_height, double min_prominence,
                            size_t min_distance, double min_width, saac_peak* out, size_t capacity,
                            size_t* count) {
  SAAC_REQUIRE((values || n == 0) && count && (out || capacity == 0), "NULL buffer");
  return guarded([&] {
    const auto peaks = saac::signal::find_peaks({values, n}, {min_height, min_prominence, min_distance, min_width});
    *count = peaks.size();
    for (size_t i = 0; i < peaks.size() && i < capacity; ++i) {
      const auto& p = peaks[i];
      out[i] = {p.index, p.height, p.prominence, p.width, p.left_base, p.right_base};
    }
    if (capacity < peaks.size())
      return failure(SAAC_ERR_BUFFER_TOO_SMALL, "peak buffer holds " + std::to_string(capacity) + " of " +
                                                    std::to_string(peaks.size()));
    return SAAC_OK;
  });
}

saac_status saac_percentile(const double* values, size_t n, double q, double* out) {
  SAAC_REQUIRE(values && out, "values and out must not be NULL");
  return guarded([&] {
    *out = saac::signal::percentile({values, n}, q);
    return SAAC_OK;
  });
}

saac_status saac_ipf(const double* rows, size_t n_rows, const double* cols, size_t n_cols, double tol,
                     int max_iter, double* out, int* iterations, double* max_deviation) {
  SAAC_REQUIRE(rows && cols && out, "rows, cols and out must not be NULL");
  return guarded([&] {
    saac::outbound::MarginalSpec spec{{rows, rows + n_rows}, {cols, cols + n_cols}, 1.0};
    auto res = saac::outbound::ipf(saac::outbound::uniform_seed(spec), spec, tol, max_iter);
    for (size_t t = 0; t < n_rows; ++t)
      for (size_t j = 0; j < n_cols; ++j) out[t * n_cols + j] = res.matrix(t, j);
    if (iterations) *iterations = res.report.iterations;
    if (max_deviation) *max_deviation = res.report.max_deviation;
    return SAAC_OK;
  });
}

}  // extern "C"
