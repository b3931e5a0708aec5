#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "vlsynth/dedup.hpp"
#include "vlsynth/errors.hpp"
#include "vlsynth/pipeline.hpp"
#include "vlsynth/rng.hpp"

using namespace vlsynth;

namespace {

std::vector<EmbeddingVector> random_pool(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EmbeddingVector> pool(n);
  for (std::size_t i = 0; i < n; ++i) {
    pool[i].id = "v" + std::to_string(i);
    for (std::size_t k = 0; k < dim; ++k) pool[i].values.push_back(rng.uniform(-1.0, 1.0));
  }
  return pool;
}

}  // namespace

TEST_CASE("nn_distances agrees with brute force") {
  const auto pool = random_pool(200, 8, 5);
  const auto got = nn_distances(pool);
  const auto want = oracle::brute_nn(pool);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].id == pool[i].id);
    CHECK(std::abs(got[i].distance - want[i].second) <= 1e-12);
    CHECK(std::abs(oracle::euclid(pool[i].values, pool[got[i].neighbor].values) - want[i].second) <= 1e-12);
  }
}

TEST_CASE("nn_distances preconditions") {
  CHECK_THROWS_AS(nn_distances(random_pool(1, 4, 1)), PreconditionError);
  auto pool = random_pool(3, 4, 1);
  pool[2].values.pop_back();
  CHECK_THROWS_AS(nn_distances(pool), DimensionMismatch);
}

TEST_CASE("normalize scales to unit length and leaves zero alone") {
  std::vector<double> v = {3, 4};
  normalize(v);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  std::vector<double> z = {0, 0, 0};
  normalize(z);
  CHECK(z == std::vector<double>{0, 0, 0});
}

TEST_CASE("dedup keeps a pairwise-separated set and explains every removal") {
  // Clusters of near copies around a few centers.
  Rng rng(17);
  std::vector<EmbeddingVector> pool;
  const auto centers = random_pool(20, 6, 3);
  for (std::size_t i = 0; i < 200; ++i) {
    EmbeddingVector v{"c" + std::to_string(i), centers[i % centers.size()].values};
    for (auto& x : v.values) x += rng.uniform(-0.02, 0.02);
    pool.push_back(v);
  }
  const double threshold = 0.05;
  const auto rep = dedup(pool, threshold);
  CHECK(rep.kept.size() + rep.removed.size() == pool.size());
  CHECK(rep.threshold == threshold);
  CHECK(!rep.removed.empty());

  std::map<std::string, const EmbeddingVector*> by_id;
  for (const auto& v : pool) by_id[v.id] = &v;
  for (std::size_t i = 0; i < rep.kept.size(); ++i)
    for (std::size_t j = i + 1; j < rep.kept.size(); ++j)
      CHECK(oracle::euclid(by_id[rep.kept[i]]->values, by_id[rep.kept[j]]->values) >= threshold);
  const std::set<std::string> kept(rep.kept.begin(), rep.kept.end());
  for (const auto& r : rep.removed) {
    CHECK(kept.count(r.nearest) == 1);
    CHECK(r.distance < threshold);
    CHECK(std::abs(oracle::euclid(by_id[r.id]->values, by_id[r.nearest]->values) - r.distance) <= 1e-12);
  }
  CHECK(to_json(rep).at("removed").size() == rep.removed.size());
}

TEST_CASE("score filter keeps exactly total > 12 and feasibility >= 3") {
  std::vector<Rule> pool;
  for (int f = 1; f <= 5; ++f)
    for (int c = 1; c <= 5; ++c)
      for (int e = 1; e <= 5; ++e) {
        Rule r;
        r.id = std::to_string(f) + std::to_string(c) + std::to_string(e);
        r.scores = ScoreTriple{f, c, e};
        pool.push_back(r);
      }
  const auto kept = filter_by_score(pool);
  std::vector<std::string> want;
  for (const auto& r : pool) {
    if (r.scores->format + r.scores->content + r.scores->feasibility > 12 && r.scores->feasibility >= 3) {
      want.push_back(r.id);
    }
  }
  std::vector<std::string> got;
  for (const auto& r : kept) got.push_back(r.id);
  CHECK(got == want);

  pool.push_back(Rule{.id = "unscored"});
  CHECK_THROWS_AS(filter_by_score(pool), MissingScore);
}

TEST_CASE("rubric scores the fixture seeds above the filter bar") {
  for (const auto& r : load_seed_file(VLSYNTH_FIXTURES_DIR "/seeds.jsonl")) {
    CAPTURE(r.id);
    const auto s = rubric_score_dsl(r);
    CHECK(s.in_range());
    CHECK(s.feasibility == 5);
    CHECK(s.content == 5);
  }
  Rule broken;
  broken.cls = canonical_class(VisualPattern::Analogy, ReasoningStyle::Inductive);
  broken.bullets = {"a", "b", "c", "d", "e"};
  broken.program = "layout seq5;";
  const auto s = rubric_score_dsl(broken);
  CHECK(s.feasibility == 1);
  CHECK(s.total() <= 12);
}

TEST_CASE("stub embedder is deterministic and separates different rules") {
  const auto seeds = load_seed_file(VLSYNTH_FIXTURES_DIR "/seeds.jsonl");
  StubEmbedder emb(64);
  const auto a = emb.embed(seeds[0]);
  CHECK(a == emb.embed(seeds[0]));
  CHECK(a.size() == 64);
  double norm = 0;
  for (double x : a) norm += x * x;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0));
  for (std::size_t i = 1; i < seeds.size(); ++i) CHECK(oracle::euclid(a, emb.embed(seeds[i])) > 0.0);
}
