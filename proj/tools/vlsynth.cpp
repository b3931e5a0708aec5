#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vlsynth/config.hpp"
#include "vlsynth/errors.hpp"
#include "vlsynth/io.hpp"
#include "vlsynth/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStage = 1;
constexpr int kExitConfig = 2;

int report(int code, const std::string& kind, const std::string& message, const std::string& stage) {
  nlohmann::json j = {{"error", kind}, {"message", message}};
  if (!stage.empty()) j["stage"] = stage;
  std::cerr << vlsynth::dump_line(j) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual logic puzzle synthesis pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string last_stage;
  bool resume = false;
  std::optional<int> workers;
  bool stub = false;
  std::optional<std::size_t> sample_n;
  app.add_option("--config", config_path, "Pipeline config (TOML)")->required();
  app.add_option("--stage", last_stage, "run-all: stop after this stage");
  app.add_flag("--resume", resume, "Skip fresh stages and resume evolution from checkpoints");
  app.add_option("--workers", workers, "Worker threads (0: one per core)")->check(CLI::NonNegativeNumber);
  app.add_flag("--stub-providers", stub, "Use the deterministic offline providers");

  std::string command;
  for (auto stage : vlsynth::kStages) {
    auto* sub = app.add_subcommand(std::string(stage), "Run the " + std::string(stage) + " stage");
    sub->callback([&command, stage] { command = stage; });
    if (stage == "sample") sub->add_option("--n", sample_n, "Number of puzzles to sample");
  }
  app.add_subcommand("run-all", "Run every stage in order")->callback([&] { command = "run-all"; });
  app.add_subcommand("status", "Show each stage's checkpoint status")->callback([&] { command = "status"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kExitConfig, "UsageError", e.what(), "");
  }

  std::optional<vlsynth::Pipeline> pipeline;
  try {
    auto cfg = vlsynth::load_pipeline_config(config_path);
    if (workers) cfg.workers = *workers;
    if (stub) cfg.stub_providers = true;
    if (sample_n) cfg.sample_n = *sample_n;
    cfg.validate();
    auto providers = vlsynth::make_providers(cfg);
    pipeline.emplace(std::move(cfg), std::move(providers), [](const std::string& line) { std::cerr << line << "\n"; });
  } catch (const vlsynth::Error& e) {
    return report(kExitConfig, e.kind(), e.what(), "");
  } catch (const std::exception& e) {
    return report(kExitConfig, "ConfigError", e.what(), "");
  }

  std::string current = command;
  try {
    const vlsynth::RunOptions opts{resume};
    if (command == "status") {
      nlohmann::json j = nlohmann::json::object();
      for (auto s : vlsynth::kStages) j[std::string(s)] = vlsynth::to_string(pipeline->status(s));
      std::cout << j.dump(2) << "\n";
    } else if (command == "run-all") {
      if (!last_stage.empty() && !vlsynth::is_stage(last_stage)) {
        return report(kExitConfig, "UsageError", "unknown stage: " + last_stage, "");
      }
      for (auto s : vlsynth::kStages) {
        current = s;
        if (resume && pipeline->status(s) == vlsynth::StageStatus::Fresh) {
          std::cerr << "stage " << s << ": fresh, skipped\n";
        } else {
          pipeline->run_stage(s, opts);
        }
        if (s == last_stage) break;
      }
      const auto manifest = pipeline->config().export_dir / "manifest.json";
      if (last_stage.empty() || last_stage == "stats") {
        std::cout << nlohmann::json::parse(vlsynth::read_text_file(manifest)).at("counts").dump(2) << "\n";
      }
    } else {
      std::cout << pipeline->run_stage(command, opts).dump(2) << "\n";
    }
  } catch (const vlsynth::ConfigError& e) {
    return report(kExitConfig, e.kind(), e.what(), current);
  } catch (const vlsynth::Error& e) {
    return report(kExitStage, e.kind(), e.what(), current);
  } catch (const std::exception& e) {
    return report(kExitStage, "InternalError", e.what(), current);
  }
  return kExitOk;
}
