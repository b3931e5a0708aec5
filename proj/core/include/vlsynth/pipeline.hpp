#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlsynth/config.hpp"
#include "vlsynth/providers.hpp"
#include "vlsynth/rule.hpp"

namespace vlsynth {

inline constexpr std::array<std::string_view, 10> kStages = {
    "seed-import", "evolve", "filter", "render", "qc", "assemble", "annotate", "passrate", "sample", "stats"};

/// Direct upstream stages.
std::vector<std::string_view> stage_dependencies(std::string_view stage);
bool is_stage(std::string_view name);

/// Seed rules from a JSON-lines file. Each line holds class and bullets and
/// either an inline "program" or a "program_file" relative to the seed file.
/// Ids are recomputed from content; every seed must validate, have
/// generation 0 and no lineage.
std::vector<Rule> load_seed_file(const std::filesystem::path& path);

struct ProviderSet {
  std::unique_ptr<Transformer> transformer;
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<Scorer> scorer;
  std::unique_ptr<Annotator> annotator;
};

/// Stubs or HTTP providers, per cfg.stub_providers.
ProviderSet make_providers(const PipelineConfig& cfg);

enum class StageStatus { Missing, Stale, Fresh };
std::string_view to_string(StageStatus s) noexcept;

struct RunOptions {
  bool resume = false;  // reuse fresh stages and evolution checkpoints
};

using Logger = std::function<void(const std::string&)>;

/// Stage runner over one workdir. Each stage writes its outputs, then a
/// done marker listing them with their SHA-256 and the digests of the
/// upstream markers it consumed. A stage whose marker is absent, whose
/// settings changed, or whose upstream changed is not fresh, and stages
/// refuse to run on an upstream that is not fresh.
class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, ProviderSet providers, Logger log = {});

  const PipelineConfig& config() const noexcept { return cfg_; }

  StageStatus status(std::string_view stage) const;
  /// Runs one stage. Throws StageError when an upstream stage is not fresh.
  nlohmann::json run_stage(std::string_view stage, const RunOptions& opts = {});
  /// Runs every stage in order up to and including `last` (all when
  /// empty). With opts.resume, fresh stages are skipped.
  void run_all(const RunOptions& opts = {}, std::string_view last = {});

  std::filesystem::path stage_dir(std::string_view stage) const;
  std::filesystem::path done_path(std::string_view stage) const;

 private:
  nlohmann::json current_settings(std::string_view stage) const;
  std::string marker_digest(std::string_view stage) const;
  nlohmann::json execute(std::string_view stage, const RunOptions& opts, std::vector<std::filesystem::path>& outputs);

  nlohmann::json seed_import(std::vector<std::filesystem::path>& out);
  nlohmann::json evolve_stage(const RunOptions& opts, std::vector<std::filesystem::path>& out);
  nlohmann::json filter_stage(std::vector<std::filesystem::path>& out);
  nlohmann::json render_stage(std::vector<std::filesystem::path>& out);
  nlohmann::json qc_stage(std::vector<std::filesystem::path>& out);
  nlohmann::json assemble_stage(std::vector<std::filesystem::path>& out);
  nlohmann::json annotate_stage(std::vector<std::filesystem::path>& out);
  nlohmann::json passrate_stage(std::vector<std::filesystem::path>& out);
  nlohmann::json sample_stage(std::vector<std::filesystem::path>& out);
  nlohmann::json stats_stage(std::vector<std::filesystem::path>& out);

  PipelineConfig cfg_;
  ProviderSet providers_;
  Logger log_;
};

}  // namespace vlsynth
