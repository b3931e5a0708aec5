#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vlsynth/rule.hpp"
#include "vlsynth/rule_dsl.hpp"

namespace vlsynth {

struct EmbeddingVector {
  std::string id;
  std::vector<double> values;
};

/// Scale to unit Euclidean norm; a zero vector is left unchanged.
void normalize(std::vector<double>& v);

struct NeighborDistance {
  std::string id;
  std::size_t neighbor = 0;  // index of the nearest other member
  double distance = 0.0;
};

/// Exact nearest-neighbor Euclidean distance for every member. Requires at
/// least 2 members of equal dimension (DimensionMismatch otherwise).
std::vector<NeighborDistance> nn_distances(std::span<const EmbeddingVector> pool);

struct DedupReport {
  struct Removed {
    std::string id;
    std::string nearest;  // kept member that caused the removal
    double distance = 0.0;
  };
  std::vector<std::string> kept;
  std::vector<Removed> removed;
  double threshold = 0.0;
};

nlohmann::json to_json(const DedupReport& r);

/// Greedy pass in pool order: a member is removed iff it lies closer than
/// `threshold` to an already kept member.
DedupReport dedup(std::span<const EmbeddingVector> pool, double threshold);

inline constexpr double kDefaultDedupThreshold = 0.05;

struct ScoreFilter {
  int min_total_exclusive = 12;  // keep total > 12
  int min_feasibility = 3;
};

/// Rules whose total exceeds the bound and whose feasibility meets it.
/// Throws MissingScore for an unscored rule.
std::vector<Rule> filter_by_score(std::span<const Rule> pool, const ScoreFilter& f = {});

/// True when some bullet names the attribute (keyword match).
bool bullets_mention(std::span<const std::string> bullets, Attribute a);

/// Deterministic rubric: format from validate_rule, feasibility from the
/// program's parse outcome, content from progression and recipe checks.
ScoreTriple rubric_score_dsl(const Rule& rule);

}  // namespace vlsynth
