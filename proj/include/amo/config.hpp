#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "amo/localization.hpp"
#include "amo/report.hpp"

namespace amo {

/// Flat key-value text with [sections]:
///
///   # comment
///   [section]
///   key = 1.5 | -3 | true | "text" | [1, 2, 3]
///
/// Keys are addressed as "section.key"; keys before any section header have
/// no prefix. Duplicate keys are rejected.
using FlatConfig = std::map<std::string, Json>;
FlatConfig parse_flat_config(std::string_view text);

struct ExperimentConfig {
  // [frequency]
  std::string frequency = "golden";
  Int q_cap = 1'000'000;
  std::size_t depth = 0;
  std::size_t beta_window = 0;
  // [operator]
  std::vector<double> lambdas;
  std::vector<Int> ps{0};
  std::vector<Int> js{0};
  // [truncation]
  Int half_width = 1500;
  // [fit]
  VerdictPolicy policy;
  // [filter]
  bool filter_enabled = false;
  Int local_half_width = 64;
  double rate_offset = 0.1;
  Int max_set_size = 100'000;
  std::size_t max_scales = 10;
  // [output]
  std::string output_dir = "amolab-out";
  // [sweep]
  unsigned parallelism = 1;

  std::string source_text;

  std::size_t point_count() const { return lambdas.size() * ps.size() * js.size(); }
};

/// Unknown keys and out-of-range knobs raise UsageError.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Echo of every knob, for embedding in outputs.
Json to_json(const ExperimentConfig& c);

}  // namespace amo
