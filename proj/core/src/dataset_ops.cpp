#include "vlsynth/dataset_ops.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "vlsynth/errors.hpp"
#include "vlsynth/rng.hpp"

namespace vlsynth {

nlohmann::json to_json(const AttributeRecord& r) {
  return {{"puzzle", r.puzzle_id},     {"options", r.option_count}, {"readability", r.readability},
          {"coherence", r.coherence}, {"successes", r.successes},  {"attempts", r.attempts},
          {"pass_rate", r.pass_rate()}};
}

AttributeRecord attribute_record_from_json(const nlohmann::json& j) {
  AttributeRecord r;
  r.puzzle_id = j.at("puzzle").get<std::string>();
  r.option_count = j.at("options").get<int>();
  r.readability = j.at("readability").get<int>();
  r.coherence = j.at("coherence").get<int>();
  r.successes = j.at("successes").get<int>();
  r.attempts = j.at("attempts").get<int>();
  if (r.successes < 0 || r.successes > r.attempts) throw DomainError("record " + r.puzzle_id + " has bad counts");
  return r;
}

std::string_view to_string(Difficulty d) noexcept {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Medium: return "medium";
    case Difficulty::Hard: return "hard";
    case Difficulty::Unbinned: return "unbinned";
  }
  return "unbinned";
}

Difficulty bin_difficulty(const AttributeRecord& rec) {
  if (rec.attempts <= 0) throw PreconditionError("record " + rec.puzzle_id + " has no solve attempts");
  // Compare on integer counts so boundaries are exact: p >= a/b iff s*b >= a*n.
  const long s = rec.successes;
  const long n = rec.attempts;
  if (s == 0) return Difficulty::Hard;
  if (2 * s >= n && 4 * s <= 3 * n) return Difficulty::Easy;
  if (4 * s >= n && 2 * s < n) return Difficulty::Medium;
  return Difficulty::Unbinned;
}

std::vector<std::string> sample_training(std::span<const AttributeRecord> records, std::size_t n,
                                         std::uint64_t seed, const SamplerConfig& cfg) {
  const auto four = static_cast<std::size_t>(std::llround(cfg.four_option_share * static_cast<double>(n)));
  const std::size_t ten = n - four;
  std::vector<std::size_t> pool4, pool10;
  std::size_t low = 0, high = 0, quality = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.attempts <= 0) continue;
    const double p = r.pass_rate();
    bool ok = true;
    if (p < cfg.min_pass) ++low, ok = false;
    if (p > cfg.max_pass) ++high, ok = false;
    if (r.readability + r.coherence < cfg.min_quality) ++quality, ok = false;
    if (!ok) continue;
    (r.option_count == 10 ? pool10 : pool4).push_back(i);
  }
  if (pool4.size() < four || pool10.size() < ten) {
    throw InsufficientPool("need " + std::to_string(four) + " four-option and " + std::to_string(ten) +
                           " ten-option puzzles, eligible " + std::to_string(pool4.size()) + " and " +
                           std::to_string(pool10.size()) + "; excluded: " + std::to_string(low) +
                           " below min pass rate, " + std::to_string(high) + " above max pass rate, " +
                           std::to_string(quality) + " below quality");
  }
  Rng rng(seed);
  auto draw = [&](std::vector<std::size_t>& pool, std::size_t k) {
    // Partial Fisher-Yates; the first k entries are the sample.
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    pool.resize(k);
  };
  draw(pool4, four);
  draw(pool10, ten);
  std::vector<std::size_t> picked = pool4;
  picked.insert(picked.end(), pool10.begin(), pool10.end());
  std::sort(picked.begin(), picked.end());
  std::vector<std::string> out;
  for (auto i : picked) out.push_back(records[i].puzzle_id);
  return out;
}

PassRate pass_rate(const SolveRequest& req, char answer, Solver& solver, int k, std::uint64_t seed) {
  if (k < 1) throw PreconditionError("pass rate needs at least one attempt");
  PassRate r;
  r.attempts = k;
  for (int i = 0; i < k; ++i) {
    const auto got = solver.solve(req, derive_seed(seed, static_cast<std::uint64_t>(i)));
    if (got.size() == 1 && got[0] == answer) ++r.successes;
  }
  return r;
}

SolveRequest solve_request(const Puzzle& p, std::string sheet_png) {
  SolveRequest req;
  req.puzzle_id = p.id;
  req.prompt = puzzle_prompt(p);
  for (const auto& o : p.options) req.labels.emplace_back(1, o.label);
  req.sheet_png = std::move(sheet_png);
  return req;
}

std::size_t StageCounts::rendered_groups() const {
  std::size_t n = 0;
  for (const auto& [_, v] : groups_per_style) n += v;
  return n;
}

std::size_t StageCounts::accepted_groups() const {
  std::size_t n = 0;
  for (const auto& [_, v] : accepted_per_style) n += v;
  return n;
}

nlohmann::json build_manifest(const ManifestInputs& in) {
  const auto& c = in.counts;
  auto require = [](bool ok, const std::string& identity) {
    if (!ok) throw InconsistentState("manifest identity violated: " + identity);
  };
  require(c.seeds <= c.generated, "seeds <= generated");
  require(c.deduplicated <= c.generated, "deduplicated <= generated");
  require(c.retained <= c.deduplicated, "retained <= deduplicated");
  require(c.accepted_groups() <= c.rendered_groups(), "accepted groups <= rendered groups");
  for (const auto& [style, n] : c.accepted_per_style) {
    auto it = c.groups_per_style.find(style);
    require(it != c.groups_per_style.end() && n <= it->second, "accepted <= rendered for style " + style);
  }
  require(c.default_puzzles == c.accepted_groups(), "default puzzles = accepted groups");
  require(c.shuffled_puzzles == 4 * c.default_puzzles, "shuffled = 4 x default");
  require(c.expanded_puzzles + c.expanded_skipped == c.default_puzzles, "expanded + skipped = default");

  std::array<std::size_t, 5> readability{}, coherence{};
  std::array<std::size_t, 10> pass{};
  std::map<std::string, std::size_t> bins = {{"easy", 0}, {"medium", 0}, {"hard", 0}, {"unbinned", 0}};
  std::set<std::string> seen;
  for (const auto& r : in.records) {
    require(seen.insert(r.puzzle_id).second, "one attribute record per puzzle (" + r.puzzle_id + ")");
    require(r.readability >= 1 && r.readability <= 5 && r.coherence >= 1 && r.coherence <= 5,
            "scores in [1,5] (" + r.puzzle_id + ")");
    ++readability[static_cast<std::size_t>(r.readability - 1)];
    ++coherence[static_cast<std::size_t>(r.coherence - 1)];
    if (r.attempts > 0) {
      // Bucket b holds [b/10, (b+1)/10); the last bucket also holds 1.
      const auto b = std::min<long>(9, (10L * r.successes) / r.attempts);
      ++pass[static_cast<std::size_t>(b)];
      ++bins[std::string(to_string(bin_difficulty(r)))];
    }
  }
  require(in.records.empty() || in.records.size() == c.total_puzzles(), "one attribute record per puzzle");

  nlohmann::json files = nlohmann::json::array();
  std::set<std::string> paths;
  for (const auto& [path, sha] : in.files) {
    require(paths.insert(path).second, "each file listed once (" + path + ")");
    files.push_back({{"path", path}, {"sha256", sha}});
  }

  nlohmann::json pass_edges = nlohmann::json::array();
  for (int b = 0; b <= 10; ++b) pass_edges.push_back(b / 10.0);
  return {
      {"counts",
       {{"seeds", c.seeds},
        {"generated", c.generated},
        {"deduplicated", c.deduplicated},
        {"retained", c.retained},
        {"groups_per_style", c.groups_per_style},
        {"rendered_groups", c.rendered_groups()},
        {"render_failures", c.render_failures},
        {"accepted_per_style", c.accepted_per_style},
        {"accepted_groups", c.accepted_groups()},
        {"puzzles",
         {{"default4", c.default_puzzles},
          {"shuffled4", c.shuffled_puzzles},
          {"expanded10", c.expanded_puzzles},
          {"expanded_skipped", c.expanded_skipped},
          {"total", c.total_puzzles()}}}}},
      {"histograms",
       {{"readability", {{"edges", {1, 2, 3, 4, 5}}, {"counts", readability}}},
        {"coherence", {{"edges", {1, 2, 3, 4, 5}}, {"counts", coherence}}},
        {"pass_rate", {{"edges", pass_edges}, {"counts", pass}}}}},
      {"difficulty", bins},
      {"files", files},
  };
}

}  // namespace vlsynth
