#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vlsynth/config.hpp"
#include "vlsynth/errors.hpp"
#include "vlsynth/pipeline.hpp"

using namespace vlsynth;
namespace fs = std::filesystem;

namespace {

PipelineConfig tiny_config(const fs::path& workdir) {
  auto cfg = load_pipeline_config(VLSYNTH_FIXTURES_DIR "/fixtures.toml");
  cfg.workdir = workdir;
  cfg.export_dir = workdir / "dataset";
  cfg.workers = 1;
  cfg.evolution.generations = 1;
  cfg.evolution.growth = 1.5;
  cfg.styles = {StyleId::MonochromeVector};
  cfg.render.panel_size = 64;
  return cfg;
}

}  // namespace

TEST_CASE("toml subset") {
  const auto doc = parse_toml(R"(# comment
top = 1
[a.b]
s = "x\ty"   # trailing comment
lit = 'c:\path'
"quoted key" = -2.5e1
flag = true
list = [1, 2,
        3]
dotted.key = "v"
)");
  CHECK(doc["top"] == 1);
  CHECK(doc["a"]["b"]["s"] == "x\ty");
  CHECK(doc["a"]["b"]["lit"] == "c:\\path");
  CHECK(doc["a"]["b"]["quoted key"] == -25.0);
  CHECK(doc["a"]["b"]["flag"] == true);
  CHECK(doc["a"]["b"]["list"] == nlohmann::json::array({1, 2, 3}));
  CHECK(doc["a"]["b"]["dotted"]["key"] == "v");
  CHECK_THROWS_AS(parse_toml("x = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("x = {a = 1}\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[unterminated\n"), ConfigError);
}

TEST_CASE("pipeline config loads the fixture and rejects unknown keys") {
  const auto cfg = load_pipeline_config(VLSYNTH_FIXTURES_DIR "/fixtures.toml");
  CHECK(cfg.evolution.generations == 10);
  CHECK(cfg.render.panel_size == 128);
  CHECK(cfg.styles.size() == 3);
  CHECK(cfg.seeds == fs::path(VLSYNTH_FIXTURES_DIR) / "seeds.jsonl");
  CHECK(cfg.stage_seed("evolve") != cfg.stage_seed("render"));

  auto doc = parse_toml("[paths]\nseeds = \"s.jsonl\"\nworkdir = \"w\"\n[render]\nbogus = 1\n");
  CHECK_THROWS_AS(pipeline_config_from_json(doc, "/tmp"), ConfigError);
  doc = parse_toml("[paths]\nseeds = \"s.jsonl\"\nworkdir = \"w\"\n[qc]\ndup = -1\n");
  CHECK_THROWS_AS(pipeline_config_from_json(doc, "/tmp").validate(), ConfigError);
}

TEST_CASE("stages track freshness and refuse stale upstreams") {
  const auto dir = fs::temp_directory_path() / "vlsynth_test_pipeline";
  fs::remove_all(dir);
  auto cfg = tiny_config(dir);
  {
    Pipeline p(cfg, make_providers(cfg));
    for (auto s : kStages) CHECK(p.status(s) == StageStatus::Missing);
    CHECK_THROWS_AS(p.run_stage("evolve"), StageError);
    p.run_all({}, "assemble");
    for (auto s : {"seed-import", "evolve", "filter", "render", "qc", "assemble"}) CHECK(p.status(s) == StageStatus::Fresh);
    CHECK(p.status("annotate") == StageStatus::Missing);
    CHECK(fs::exists(dir / "render" / "panels"));
  }
  {
    // A QC setting change invalidates qc and everything after it.
    auto changed = cfg;
    changed.qc.dup = 12;
    Pipeline p(changed, make_providers(changed));
    CHECK(p.status("render") == StageStatus::Fresh);
    CHECK(p.status("qc") == StageStatus::Stale);
    CHECK(p.status("assemble") == StageStatus::Stale);
    CHECK_THROWS_AS(p.run_stage("assemble"), StageError);
    p.run_stage("qc");
    CHECK(p.status("qc") == StageStatus::Fresh);
    CHECK(p.status("assemble") == StageStatus::Stale);
  }
  fs::remove_all(dir);
}
