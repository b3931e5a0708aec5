#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vlsynth/providers.hpp"
#include "vlsynth/rule.hpp"

namespace vlsynth {

struct Island {
  RuleClass cls;
  std::vector<std::string> members;  // rule ids, no duplicates
  friend bool operator==(const Island&, const Island&) = default;
};

struct EvolutionConfig {
  int generations = 10;
  // Pool size after the last generation relative to the seed count. Each
  // generation grows the target by the same factor, growth^(1/generations).
  double growth = 25.0;
  int migration_period = 3;
  double migration_rate = 0.10;
  // Probability that an offspring slot uses mutation rather than crossover.
  double mutation_share = 0.5;
  // Extra attempts per offspring slot after a rejected child.
  int retry_budget = 3;
  // Mutation may change at most this many bullets.
  std::size_t max_bullet_changes = 2;
  std::uint64_t rng_seed = 0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  /// Pool-size target after generation t (t = 0 is the seed count).
  std::size_t target_pool(std::size_t seeds, int t) const;
};

nlohmann::json to_json(const EvolutionConfig& c);
EvolutionConfig evolution_config_from_json(const nlohmann::json& j);

/// Bullets changed between two lists: max length minus the longest common
/// subsequence.
std::size_t bullet_changes(std::span<const std::string> a, std::span<const std::string> b);

using ChildFilter = std::function<bool(const Rule&)>;

struct Offspring {
  std::optional<Rule> child;
  int attempts = 0;  // provider calls made
  std::string reason;  // why the last attempt was rejected
};

/// One mutation slot: the child keeps the parent's class, has lineage
/// [(parent, mutation)] and generation parent + 1. A child that fails
/// validate_rule, equals its parent, changes more than the allowed number of
/// bullets, or is refused by `accept` is discarded and the slot retried
/// with a fresh seed, up to cfg.retry_budget times.
Offspring mutate(const Rule& parent, Transformer& op, std::uint64_t seed, const EvolutionConfig& cfg = {},
                 const ChildFilter& accept = {}, int first_attempt = 0);

/// One crossover slot on `island`. Both parents must be island members
/// (PreconditionError otherwise). The child takes the island's class.
Offspring crossover(const Island& island, const Rule& a, const Rule& b, Transformer& op, std::uint64_t seed,
                    const EvolutionConfig& cfg = {}, const ChildFilter& accept = {}, int first_attempt = 0);

/// Move floor(rate * total) rules, chosen uniformly without replacement,
/// each to a uniformly chosen different island. Needs at least 2 islands.
std::vector<Island> migrate(std::vector<Island> islands, double rate, std::uint64_t seed);

struct EvolveOptions {
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints
  bool resume = false;
  int workers = 1;
};

struct EvolutionResult {
  std::vector<Rule> pool;  // seeds first, then children in commit order
  std::vector<Island> islands;
  std::size_t rejected_slots = 0;  // offspring slots that produced no child
  std::map<std::string, std::size_t> rejection_reasons;  // last reason per rejected slot
  int resumed_from = -1;           // checkpoint generation used, if any
};

/// Island-model evolution. Seeds are grouped into one island per class
/// present (canonical class order). Throws IslandEmptied if migration
/// leaves an island without members.
EvolutionResult evolve(std::span<const Rule> seeds, const EvolutionConfig& cfg, Transformer& op,
                       const EvolveOptions& opts = {});

}  // namespace vlsynth
