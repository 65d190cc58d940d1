#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amo/config.hpp"

namespace amo {

struct PointSpec {
  double lambda = 0.0;
  Int p = 0;
  Int j = 0;
};

/// "lambda=<%.17g>_p=<p>_j=<j>", also the file stem of the point's outputs.
std::string point_key(const PointSpec& spec);

/// Grid points in (lambda, p, j) order as listed in the config.
std::vector<PointSpec> expand_points(const ExperimentConfig& config);

std::shared_ptr<const FrequencyModel> experiment_frequency(const ExperimentConfig& config);

/// SHA-256 over the artifact version, the content-relevant knobs and the point.
std::string point_hash(const ExperimentConfig& config, const PointSpec& spec);

struct PointOutcome {
  PointSpec spec;
  std::string key;
  std::string hash;
  /// 0 ok, 3 degenerate, 4 regime violation (verdict still produced).
  int exit_code = 0;
  bool failed = false;
  std::string error_kind;
  std::string error_message;
  Json json;
  std::string csv;
};

/// Verdict, optional resonant filter checks, config echo. Library errors
/// are captured in the outcome instead of thrown.
PointOutcome run_point(const ExperimentConfig& config, std::shared_ptr<const FrequencyModel> model,
                       const PointSpec& spec);

struct SweepSummary {
  std::size_t total = 0;
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::vector<std::string> failed;
  std::filesystem::path aggregate;
  std::filesystem::path manifest;
};

/// Writes points/<key>.json and points/<key>.modes.csv per point, then
/// aggregate.csv sorted by (lambda, p, j) and manifest.json. Points whose
/// JSON already carries the same hash are not recomputed.
SweepSummary run_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir, unsigned parallelism);

/// Column list of aggregate.csv.
std::string aggregate_header();

}  // namespace amo
