#include <benchmark/benchmark.h>

#include "vlsynth/dedup.hpp"
#include "vlsynth/image_qc.hpp"
#include "vlsynth/renderer.hpp"
#include "vlsynth/rng.hpp"
#include "vlsynth/rule_dsl.hpp"

using namespace vlsynth;

namespace {

constexpr std::string_view kProgram =
    "layout grid3x3; entity triangle hollow small; progress count arithmetic 1 start 1;"
    "progress rotation_deg arithmetic 30 start 0; violate count_off; violate rotation_off; violate wrong_shape;";

ImageBuf sample_panel(int size) {
  return render_group(parse_rule_program(kProgram), StyleId::MonochromeVector, 1, RenderConfig{.panel_size = size})
      .panel(3);
}

void BM_RenderGroup(benchmark::State& state) {
  const auto program = parse_rule_program(kProgram);
  const RenderConfig cfg{.panel_size = static_cast<int>(state.range(0))};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(render_group(program, StyleId::MonochromeRaster, ++seed, cfg));
}
BENCHMARK(BM_RenderGroup)->Arg(128)->Arg(256);

void BM_Phash(benchmark::State& state) {
  const auto img = sample_panel(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(phash(img));
}
BENCHMARK(BM_Phash)->Arg(128)->Arg(256);

void BM_SsimVsWhite(benchmark::State& state) {
  const auto img = sample_panel(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ssim_vs_white(img));
}
BENCHMARK(BM_SsimVsWhite)->Arg(128)->Arg(256);

void BM_NnDistances(benchmark::State& state) {
  Rng rng(3);
  std::vector<EmbeddingVector> pool(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    pool[i].id = std::to_string(i);
    for (int k = 0; k < 64; ++k) pool[i].values.push_back(rng.uniform(-1.0, 1.0));
  }
  for (auto _ : state) benchmark::DoNotOptimize(nn_distances(pool));
}
BENCHMARK(BM_NnDistances)->Arg(600)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
