#include <doctest.h>

#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "vlsynth/dataset_ops.hpp"
#include "vlsynth/errors.hpp"
#include "vlsynth/rng.hpp"

using namespace vlsynth;

namespace {

AttributeRecord rec(int s, int n, int options = 4, int read = 4, int coh = 4, std::string id = "p") {
  return AttributeRecord{std::move(id), options, read, coh, s, n};
}

// Bins by exact rational comparison of s / n against the edges.
Difficulty expected_bin(int s, int n) {
  if (s == 0) return Difficulty::Hard;
  if (2 * s >= n && 4 * s <= 3 * n) return Difficulty::Easy;
  if (4 * s >= n && 2 * s < n) return Difficulty::Medium;
  return Difficulty::Unbinned;
}

}  // namespace

TEST_CASE("difficulty bins are closed at their stated boundaries") {
  CHECK(bin_difficulty(rec(0, 4)) == Difficulty::Hard);
  CHECK(bin_difficulty(rec(1, 4)) == Difficulty::Medium);
  CHECK(bin_difficulty(rec(2, 4)) == Difficulty::Easy);
  CHECK(bin_difficulty(rec(3, 4)) == Difficulty::Easy);
  CHECK(bin_difficulty(rec(4, 4)) == Difficulty::Unbinned);
  CHECK(bin_difficulty(rec(1, 5)) == Difficulty::Unbinned);
  CHECK(bin_difficulty(rec(249, 1000)) == Difficulty::Unbinned);
  CHECK(bin_difficulty(rec(250, 1000)) == Difficulty::Medium);
  CHECK(bin_difficulty(rec(499, 1000)) == Difficulty::Medium);
  CHECK(bin_difficulty(rec(751, 1000)) == Difficulty::Unbinned);
  for (int n = 1; n <= 24; ++n)
    for (int s = 0; s <= n; ++s) CHECK(bin_difficulty(rec(s, n)) == expected_bin(s, n));
  CHECK_THROWS_AS(bin_difficulty(rec(0, 0)), PreconditionError);
}

TEST_CASE("training sample meets the split and every per-element constraint") {
  Rng rng(4);
  std::vector<AttributeRecord> pool;
  for (int i = 0; i < 6000; ++i) {
    const int n = 8;
    pool.push_back(rec(static_cast<int>(rng.below(9)), n, rng.bernoulli(0.7) ? 4 : 10,
                       3 + static_cast<int>(rng.below(3)), 3 + static_cast<int>(rng.below(3)),
                       "p" + std::to_string(i)));
  }
  const auto ids = sample_training(pool, 1000, 8);
  CHECK(ids == sample_training(pool, 1000, 8));
  REQUIRE(ids.size() == 1000);
  std::map<std::string, const AttributeRecord*> by_id;
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    by_id[pool[i].puzzle_id] = &pool[i];
    order[pool[i].puzzle_id] = i;
  }
  int four = 0, ten = 0;
  std::set<std::string> unique(ids.begin(), ids.end());
  CHECK(unique.size() == ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& r = *by_id.at(ids[i]);
    CHECK(r.pass_rate() >= 0.375);
    CHECK(r.pass_rate() <= 0.875);
    CHECK(r.readability + r.coherence >= 8);
    (r.option_count == 4 ? four : ten)++;
    if (i > 0) CHECK(order.at(ids[i - 1]) < order.at(ids[i]));
  }
  CHECK(four == 800);
  CHECK(ten == 200);
  CHECK_THROWS_AS(sample_training(std::span(pool).first(100), 1000, 8), InsufficientPool);
}

TEST_CASE("pass rate counts solver hits over k seeded attempts") {
  SolveRequest req{"q", "prompt", {"A", "B", "C", "D"}, ""};
  RandomSolver random;
  const auto pr = pass_rate(req, 'C', random, 4000, 1);
  CHECK(pr.attempts == 4000);
  const double p = pr.successes / 4000.0;
  CHECK(std::abs(p - 0.25) <= 3 * std::sqrt(0.25 * 0.75 / 4000));
  CHECK(pass_rate(req, 'C', random, 200, 1).successes == pass_rate(req, 'C', random, 200, 1).successes);

  OracleSolver oracle(AnswerKey{{"q", "C"}});
  CHECK(pass_rate(req, 'C', oracle, 50, 1).successes == 50);
  AdversarialSolver adversary(AnswerKey{{"q", "C"}});
  CHECK(pass_rate(req, 'C', adversary, 50, 1).successes == 0);
}

TEST_CASE("manifest enforces the count identities") {
  ManifestInputs in;
  auto& c = in.counts;
  c.seeds = 4;
  c.generated = 100;
  c.deduplicated = 90;
  c.retained = 50;
  c.groups_per_style = {{"monochrome_vector", 50}};
  c.accepted_per_style = {{"monochrome_vector", 2}};
  c.default_puzzles = 2;
  c.shuffled_puzzles = 8;
  c.expanded_puzzles = 1;
  c.expanded_skipped = 1;
  for (int i = 0; i < 11; ++i) in.records.push_back(rec(i % 5, 4, 4, 1 + i % 5, 5, "p" + std::to_string(i)));
  in.files = {{"records/puzzles.jsonl", "00"}};

  const auto m = build_manifest(in);
  CHECK(m["counts"]["puzzles"]["total"] == 11);
  CHECK(m["counts"]["accepted_groups"] == 2);
  std::size_t binned = 0;
  for (const auto& [k, v] : m["difficulty"].items()) binned += v.get<std::size_t>();
  CHECK(binned == 11);
  CHECK(m["difficulty"]["unbinned"] == 2);  // 4 of 4 twice
  std::size_t passes = 0;
  for (const auto& v : m["histograms"]["pass_rate"]["counts"]) passes += v.get<std::size_t>();
  CHECK(passes == 11);
  CHECK(m["histograms"]["pass_rate"]["counts"][9] == 2);

  auto bad = in;
  bad.counts.shuffled_puzzles = 7;
  CHECK_THROWS_AS(build_manifest(bad), InconsistentState);
  bad = in;
  bad.counts.retained = 95;
  CHECK_THROWS_AS(build_manifest(bad), InconsistentState);
  bad = in;
  bad.records.pop_back();
  CHECK_THROWS_AS(build_manifest(bad), InconsistentState);
  bad = in;
  bad.files.push_back(bad.files.front());
  CHECK_THROWS_AS(build_manifest(bad), InconsistentState);
}
