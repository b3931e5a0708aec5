#include "vlsynth/dedup.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "vlsynth/errors.hpp"
#include "vlsynth/providers.hpp"

namespace vlsynth {

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  if (n == 0.0) return;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
}

namespace {

// Squared distance, abandoning once it reaches `bound`.
double sq_distance(const std::vector<double>& a, const std::vector<double>& b, double bound) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
    if (acc >= bound) return acc;
  }
  return acc;
}

}  // namespace

std::vector<NeighborDistance> nn_distances(std::span<const EmbeddingVector> pool) {
  if (pool.size() < 2) throw PreconditionError("nearest-neighbor distances need at least 2 vectors");
  const auto dim = pool.front().values.size();
  for (const auto& v : pool) {
    if (v.values.size() != dim) {
      throw DimensionMismatch("vector " + v.id + " has dimension " + std::to_string(v.values.size()) + ", expected " +
                              std::to_string(dim));
    }
  }
  std::vector<NeighborDistance> out;
  out.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = i;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (j == i) continue;
      const double d = sq_distance(pool[i].values, pool[j].values, best);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    out.push_back({pool[i].id, arg, std::sqrt(best)});
  }
  return out;
}

DedupReport dedup(std::span<const EmbeddingVector> pool, double threshold) {
  if (threshold < 0) throw PreconditionError("dedup threshold must be >= 0");
  DedupReport r;
  r.threshold = threshold;
  std::vector<std::size_t> kept;
  const double bound = threshold * threshold;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k : kept) {
      if (pool[k].values.size() != pool[i].values.size()) throw DimensionMismatch("vector " + pool[i].id + " dimension differs");
      const double d = sq_distance(pool[i].values, pool[k].values, best);
      if (d < best) {
        best = d;
        arg = k;
      }
    }
    if (best < bound) {
      r.removed.push_back({pool[i].id, pool[arg].id, std::sqrt(best)});
    } else {
      kept.push_back(i);
      r.kept.push_back(pool[i].id);
    }
  }
  return r;
}

nlohmann::json to_json(const DedupReport& r) {
  nlohmann::json removed = nlohmann::json::array();
  for (const auto& x : r.removed) removed.push_back({{"id", x.id}, {"nearest", x.nearest}, {"distance", x.distance}});
  return {{"threshold", r.threshold}, {"kept", r.kept}, {"removed", removed}};
}

std::vector<Rule> filter_by_score(std::span<const Rule> pool, const ScoreFilter& f) {
  std::vector<Rule> out;
  for (const auto& r : pool) {
    if (!r.scores) throw MissingScore("rule " + r.id + " has no scores");
    if (r.scores->total() > f.min_total_exclusive && r.scores->feasibility >= f.min_feasibility) out.push_back(r);
  }
  return out;
}

bool bullets_mention(std::span<const std::string> bullets, Attribute a) {
  static const std::vector<std::string_view> kCount = {"number", "count", "more ", "fewer"};
  static const std::vector<std::string_view> kRotation = {"turn", "rotat", "degree", "clockwise"};
  static const std::vector<std::string_view> kPosition = {"slide", "move", "shift", "drift", "walk",
                                                          "fall", "position", "path"};
  static const std::vector<std::string_view> kShading = {"shad", "dark", "light", "fill", "blink"};
  static const std::vector<std::string_view> kLines = {"line group", "parallel"};
  const std::vector<std::string_view>* words = &kCount;
  switch (a) {
    case Attribute::Count: words = &kCount; break;
    case Attribute::RotationDeg: words = &kRotation; break;
    case Attribute::Position: words = &kPosition; break;
    case Attribute::Shading: words = &kShading; break;
    case Attribute::ParallelLineGroups: words = &kLines; break;
  }
  for (const auto& b : bullets) {
    std::string lower(b);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (auto w : *words) {
      if (lower.find(w) != std::string::npos) return true;
    }
  }
  return false;
}

ScoreTriple rubric_score_dsl(const Rule& rule) {
  ScoreTriple s;
  const auto report = validate_rule(rule);
  s.format = std::max(1, 5 - static_cast<int>(report.violations.size()));
  // The template asks for five points (six at most); anything else can
  // score no better than average on format.
  if (rule.bullets.size() < 5 || rule.bullets.size() > kMaxBullets) s.format = std::min(s.format, 3);

  const auto outcome = try_parse_rule_program(rule.program);
  if (!outcome.ok()) {
    s.feasibility = 1;
    s.content = 1;
    return s;
  }
  s.feasibility = outcome.warnings.empty() ? 5 : 3;

  const auto& prog = *outcome.program;
  int content = 5;
  for (const auto& p : prog.progressions) {
    const auto v = progression_values(p, 5);
    if (std::all_of(v.begin(), v.end(), [&](const AttributeValue& x) { return x == v.front(); })) --content;
    if (!bullets_mention(rule.bullets, p.attribute)) --content;
  }
  std::set<ViolationRecipe> seen;
  for (auto r : prog.violations) {
    if (!seen.insert(r).second) --content;
  }
  s.content = std::max(1, content);
  return s;
}

ScoreTriple StubScorer::score(const Rule& rule) { return rubric_score_dsl(rule); }

}  // namespace vlsynth
