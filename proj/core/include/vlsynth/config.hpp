#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlsynth/assembly.hpp"
#include "vlsynth/dataset_ops.hpp"
#include "vlsynth/dedup.hpp"
#include "vlsynth/evolution.hpp"
#include "vlsynth/group.hpp"
#include "vlsynth/image_qc.hpp"
#include "vlsynth/providers.hpp"
#include "vlsynth/renderer.hpp"

namespace vlsynth {

/// Parse the TOML subset used by pipeline configs: [table] and [a.b]
/// headers, bare or quoted keys, dotted keys, basic and literal strings,
/// integers, floats, booleans, and arrays of those (which may span lines).
/// Inline tables, dates and multi-line strings are not supported. Throws
/// ConfigError with a line number.
nlohmann::json parse_toml(std::string_view text);

enum class SolverKind { Random, Oracle, Adversarial };

struct PipelineConfig {
  std::filesystem::path config_dir;  // relative paths resolve against this
  std::filesystem::path seeds;
  std::filesystem::path workdir;
  std::filesystem::path export_dir;  // default: <workdir>/dataset

  std::uint64_t rng_seed = 0;
  int workers = 1;

  EvolutionConfig evolution;
  double dedup_threshold = kDefaultDedupThreshold;
  std::size_t embedding_dim = 64;
  ScoreFilter filter;

  std::vector<StyleId> styles = {kAllStyles.begin(), kAllStyles.end()};
  RenderConfig render;
  QcThresholds qc;

  SheetLayout sheet;
  ExpandOptions expand;

  Annotation stub_annotation{4, 4};
  int passrate_attempts = 8;
  SolverKind solver = SolverKind::Random;

  std::size_t sample_n = 100;
  SamplerConfig sampler;

  bool stub_providers = true;
  HttpConfig http;

  /// Per-stage seed: derive_seed(rng_seed, stage name).
  std::uint64_t stage_seed(std::string_view stage) const;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  /// The settings a stage depends on, as JSON; a stage is stale when this
  /// changes between runs.
  nlohmann::json stage_settings(std::string_view stage) const;
};

/// Load a config file. Unknown keys are errors. VLSYNTH_ENDPOINT and
/// VLSYNTH_API_KEY override the provider endpoint and key.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc, const std::filesystem::path& config_dir);

}  // namespace vlsynth
