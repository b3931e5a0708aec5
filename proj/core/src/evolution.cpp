#include "vlsynth/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "vlsynth/errors.hpp"
#include "vlsynth/hash.hpp"
#include "vlsynth/io.hpp"
#include "vlsynth/parallel.hpp"
#include "vlsynth/rng.hpp"

namespace vlsynth {

void EvolutionConfig::validate() const {
  if (generations < 0) throw ConfigError("evolution.generations must be >= 0");
  if (!(growth >= 1.0)) throw ConfigError("evolution.growth must be >= 1");
  if (migration_period < 1) throw ConfigError("evolution.migration_period must be >= 1");
  if (!(migration_rate >= 0.0 && migration_rate <= 1.0)) throw ConfigError("evolution.migration_rate must be in [0,1]");
  if (!(mutation_share >= 0.0 && mutation_share <= 1.0)) throw ConfigError("evolution.mutation_share must be in [0,1]");
  if (retry_budget < 0) throw ConfigError("evolution.retry_budget must be >= 0");
  if (max_bullet_changes < 1) throw ConfigError("evolution.max_bullet_changes must be >= 1");
}

std::size_t EvolutionConfig::target_pool(std::size_t seeds, int t) const {
  if (generations == 0 || t <= 0) return seeds;
  const double g = std::pow(growth, 1.0 / generations);
  return static_cast<std::size_t>(std::llround(static_cast<double>(seeds) * std::pow(g, t)));
}

nlohmann::json to_json(const EvolutionConfig& c) {
  return {{"generations", c.generations},
          {"growth", c.growth},
          {"migration_period", c.migration_period},
          {"migration_rate", c.migration_rate},
          {"mutation_share", c.mutation_share},
          {"retry_budget", c.retry_budget},
          {"max_bullet_changes", c.max_bullet_changes},
          {"rng_seed", c.rng_seed}};
}

EvolutionConfig evolution_config_from_json(const nlohmann::json& j) {
  EvolutionConfig c;
  c.generations = j.value("generations", c.generations);
  c.growth = j.value("growth", c.growth);
  c.migration_period = j.value("migration_period", c.migration_period);
  c.migration_rate = j.value("migration_rate", c.migration_rate);
  c.mutation_share = j.value("mutation_share", c.mutation_share);
  c.retry_budget = j.value("retry_budget", c.retry_budget);
  c.max_bullet_changes = j.value("max_bullet_changes", c.max_bullet_changes);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  return c;
}

std::size_t bullet_changes(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return std::max(a.size(), b.size()) - prev[b.size()];
}

namespace {

// Shared retry loop for both operators. `draft` issues one provider call.
template <typename Draft, typename Check>
Offspring run_slot(Draft draft, Check check, std::uint64_t seed, const EvolutionConfig& cfg, const ChildFilter& accept,
                   int first_attempt) {
  Offspring out;
  for (int attempt = first_attempt; attempt <= cfg.retry_budget; ++attempt) {
    ++out.attempts;
    Rule child = draft(derive_seed(seed, attempt));
    const auto report = validate_rule(child);
    if (!report.ok()) {
      out.reason = report.violations.front().message;
      continue;
    }
    if (auto why = check(child); !why.empty()) {
      out.reason = why;
      continue;
    }
    if (accept && !accept(child)) {
      out.reason = "rejected by pool (duplicate id)";
      continue;
    }
    out.child = std::move(child);
    out.reason.clear();
    return out;
  }
  return out;
}

}  // namespace

Offspring mutate(const Rule& parent, Transformer& op, std::uint64_t seed, const EvolutionConfig& cfg,
                 const ChildFilter& accept, int first_attempt) {
  auto draft = [&](std::uint64_t s) {
    auto d = op.mutate(parent, s);
    Rule child;
    child.cls = parent.cls;
    child.bullets = std::move(d.bullets);
    child.program = std::move(d.program);
    child.generation = parent.generation + 1;
    child.lineage = {{parent.id, LineageOp::Mutation}};
    return with_content_id(std::move(child));
  };
  auto check = [&](const Rule& child) -> std::string {
    if (child.bullets == parent.bullets) return "identical to parent";
    if (bullet_changes(child.bullets, parent.bullets) > cfg.max_bullet_changes) return "too many bullets changed";
    return {};
  };
  return run_slot(draft, check, seed, cfg, accept, first_attempt);
}

Offspring crossover(const Island& island, const Rule& a, const Rule& b, Transformer& op, std::uint64_t seed,
                    const EvolutionConfig& cfg, const ChildFilter& accept, int first_attempt) {
  const auto on_island = [&](const Rule& r) {
    return std::find(island.members.begin(), island.members.end(), r.id) != island.members.end();
  };
  if (!on_island(a) || !on_island(b)) {
    throw PreconditionError("crossover parents " + a.id + " and " + b.id + " are not both on island " +
                            class_name(island.cls));
  }
  auto draft = [&](std::uint64_t s) {
    auto d = op.crossover(a, b, s);
    Rule child;
    child.cls = island.cls;
    child.bullets = std::move(d.bullets);
    child.program = std::move(d.program);
    child.generation = std::max(a.generation, b.generation) + 1;
    child.lineage = {{a.id, LineageOp::Crossover}, {b.id, LineageOp::Crossover}};
    return with_content_id(std::move(child));
  };
  auto check = [&](const Rule& child) -> std::string {
    if (child.bullets == a.bullets || child.bullets == b.bullets) return "identical to a parent";
    return {};
  };
  return run_slot(draft, check, seed, cfg, accept, first_attempt);
}

std::vector<Island> migrate(std::vector<Island> islands, double rate, std::uint64_t seed) {
  if (islands.size() < 2) throw PreconditionError("migration needs at least 2 islands");
  if (!(rate >= 0.0 && rate <= 1.0)) throw PreconditionError("migration rate must be in [0,1]");
  std::vector<std::pair<std::size_t, std::string>> all;
  for (std::size_t i = 0; i < islands.size(); ++i) {
    for (const auto& m : islands[i].members) all.emplace_back(i, m);
  }
  const auto moves = static_cast<std::size_t>(std::floor(rate * static_cast<double>(all.size()) + 1e-9));
  Rng rng(seed);
  // Partial Fisher-Yates: the first `moves` entries are the migrants.
  for (std::size_t k = 0; k < moves; ++k) {
    std::swap(all[k], all[k + rng.below(all.size() - k)]);
  }
  std::vector<std::pair<std::size_t, std::size_t>> dest;  // migrant index -> destination
  for (std::size_t k = 0; k < moves; ++k) {
    auto d = rng.below(islands.size() - 1);
    if (d >= all[k].first) ++d;
    dest.emplace_back(k, d);
  }
  for (std::size_t k = 0; k < moves; ++k) {
    auto& src = islands[all[k].first].members;
    src.erase(std::find(src.begin(), src.end(), all[k].second));
  }
  for (const auto& [k, d] : dest) islands[d].members.push_back(all[k].second);
  return islands;
}

namespace {

std::string checkpoint_name(int generation) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "gen_%02d.jsonl", generation);
  return buf;
}

struct State {
  std::vector<Rule> pool;
  std::unordered_map<std::string, std::size_t> index;  // id -> pool position
  std::vector<Island> islands;
};

void write_checkpoint(const std::filesystem::path& dir, int generation, const EvolutionConfig& cfg,
                      const State& st, std::span<const Rule> seeds) {
  std::vector<nlohmann::json> rows;
  nlohmann::json islands = nlohmann::json::array();
  for (const auto& isl : st.islands) islands.push_back({{"class", class_name(isl.cls)}, {"size", isl.members.size()}});
  std::vector<std::string> seed_ids;
  for (const auto& s : seeds) seed_ids.push_back(s.id);
  rows.push_back({{"kind", "header"},
                  {"generation", generation},
                  {"config", to_json(cfg)},
                  {"rng", hex64(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(generation + 1)))},
                  {"seeds", seed_ids},
                  {"islands", islands}});
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> where;
  for (std::size_t i = 0; i < st.islands.size(); ++i) {
    for (std::size_t k = 0; k < st.islands[i].members.size(); ++k) where[st.islands[i].members[k]] = {i, k};
  }
  for (const auto& r : st.pool) {
    auto j = to_json(r);
    const auto& [isl, slot] = where.at(r.id);
    j["island"] = isl;
    j["slot"] = slot;
    rows.push_back(std::move(j));
  }
  write_jsonl(dir / checkpoint_name(generation), rows);
}

// Latest checkpoint written with the same config and seeds, if any.
std::optional<std::pair<int, State>> load_checkpoint(const std::filesystem::path& dir, const EvolutionConfig& cfg,
                                                     std::span<const Rule> seeds) {
  std::vector<std::string> seed_ids;
  for (const auto& s : seeds) seed_ids.push_back(s.id);
  for (int g = cfg.generations; g >= 0; --g) {
    const auto path = dir / checkpoint_name(g);
    if (!std::filesystem::exists(path)) continue;
    const auto rows = read_jsonl(path);
    if (rows.empty() || rows[0].value("kind", "") != "header") continue;
    const auto& h = rows[0];
    if (h.at("config") != to_json(cfg) || h.at("seeds").get<std::vector<std::string>>() != seed_ids) continue;
    State st;
    for (const auto& isl : h.at("islands")) {
      Island island{parse_class_name(isl.at("class").get<std::string>()), {}};
      island.members.resize(isl.at("size").get<std::size_t>());
      st.islands.push_back(std::move(island));
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
      Rule r = rule_from_json(rows[i]);
      st.islands.at(rows[i].at("island").get<std::size_t>()).members.at(rows[i].at("slot").get<std::size_t>()) = r.id;
      st.index.emplace(r.id, st.pool.size());
      st.pool.push_back(std::move(r));
    }
    return std::make_pair(g, std::move(st));
  }
  return std::nullopt;
}

// Split `total` offspring across islands in proportion to their sizes
// (largest remainder, ties to the lower island index).
std::vector<std::size_t> apportion(std::size_t total, const std::vector<Island>& islands) {
  std::size_t members = 0;
  for (const auto& i : islands) members += i.members.size();
  std::vector<std::size_t> out(islands.size(), 0);
  if (members == 0 || total == 0) return out;
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t given = 0;
  for (std::size_t i = 0; i < islands.size(); ++i) {
    const double exact = static_cast<double>(total) * static_cast<double>(islands[i].members.size()) /
                         static_cast<double>(members);
    out[i] = static_cast<std::size_t>(std::floor(exact));
    given += out[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t k = 0; given < total; ++k, ++given) ++out[rem[k % rem.size()].second];
  return out;
}

struct Slot {
  std::size_t island = 0;
  std::uint64_t seed = 0;
  bool mutation = true;
  std::size_t a = 0;  // parent positions within the island snapshot
  std::size_t b = 0;
  Offspring result;
};

}  // namespace

EvolutionResult evolve(std::span<const Rule> seeds, const EvolutionConfig& cfg, Transformer& op,
                       const EvolveOptions& opts) {
  cfg.validate();
  State st;
  for (const auto& s : seeds) {
    if (const auto report = validate_rule(s); !report.ok()) {
      throw PreconditionError("seed " + s.id + " is invalid: " + report.violations.front().message);
    }
    if (!s.lineage.empty() || s.generation != 0) throw PreconditionError("seed " + s.id + " is not generation 0");
    if (!st.index.emplace(s.id, st.pool.size()).second) throw PreconditionError("duplicate seed id " + s.id);
    st.pool.push_back(s);
  }
  for (const auto& cls : canonical_classes()) {
    Island island{cls, {}};
    for (const auto& s : seeds) {
      if (s.cls == cls) island.members.push_back(s.id);
    }
    if (!island.members.empty()) st.islands.push_back(std::move(island));
  }

  EvolutionResult result;
  int start = 1;
  if (!opts.checkpoint_dir.empty()) {
    std::filesystem::create_directories(opts.checkpoint_dir);
    if (opts.resume) {
      if (auto cp = load_checkpoint(opts.checkpoint_dir, cfg, seeds)) {
        result.resumed_from = cp->first;
        start = cp->first + 1;
        st = std::move(cp->second);
      }
    }
    if (start == 1) write_checkpoint(opts.checkpoint_dir, 0, cfg, st, seeds);
  }

  for (int t = start; t <= cfg.generations; ++t) {
    const std::uint64_t gen_seed = derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(t));
    const std::size_t want = cfg.target_pool(seeds.size(), t) - cfg.target_pool(seeds.size(), t - 1);
    const auto per_island = apportion(want, st.islands);

    std::vector<Slot> slots;
    for (std::size_t i = 0; i < st.islands.size(); ++i) {
      const auto n = st.islands[i].members.size();
      for (std::size_t k = 0; k < per_island[i]; ++k) {
        Slot s;
        s.island = i;
        s.seed = derive_seed(gen_seed, i, k);
        Rng rng(s.seed);
        s.mutation = rng.bernoulli(cfg.mutation_share) || n < 2;
        s.a = rng.below(n);
        // Two distinct parents; a self-cross can only reproduce the parent.
        s.b = n < 2 ? s.a : (s.a + 1 + rng.below(n - 1)) % n;
        slots.push_back(s);
      }
    }

    const auto islands_snapshot = st.islands;
    auto rule_of = [&](std::size_t island, std::size_t pos) -> const Rule& {
      return st.pool[st.index.at(islands_snapshot[island].members[pos])];
    };
    auto run = [&](Slot& s, const ChildFilter& accept, int first_attempt) {
      const auto& isl = islands_snapshot[s.island];
      return s.mutation ? mutate(rule_of(s.island, s.a), op, s.seed, cfg, accept, first_attempt)
                        : crossover(isl, rule_of(s.island, s.a), rule_of(s.island, s.b), op, s.seed, cfg, accept,
                                    first_attempt);
    };

    // Provider calls run in parallel against the pool as it stood at the
    // start of the generation; commits happen in slot order.
    const ChildFilter not_in_pool = [&](const Rule& r) { return !st.index.contains(r.id); };
    parallel_for(slots.size(), opts.workers, [&](std::size_t i) { slots[i].result = run(slots[i], not_in_pool, 0); });

    std::unordered_set<std::string> committed;
    const ChildFilter fresh = [&](const Rule& r) { return !st.index.contains(r.id) && !committed.contains(r.id); };
    std::vector<std::vector<std::string>> added(st.islands.size());
    for (auto& s : slots) {
      auto& res = s.result;
      if (res.child && committed.contains(res.child->id)) {
        // Another slot of this generation produced the same rule first.
        const int used = res.attempts;
        res = run(s, fresh, used);
      }
      if (!res.child) {
        ++result.rejected_slots;
        ++result.rejection_reasons[res.reason];
        continue;
      }
      committed.insert(res.child->id);
      added[s.island].push_back(res.child->id);
      st.index.emplace(res.child->id, st.pool.size());
      st.pool.push_back(std::move(*res.child));
    }
    for (std::size_t i = 0; i < st.islands.size(); ++i) {
      auto& m = st.islands[i].members;
      m.insert(m.end(), added[i].begin(), added[i].end());
    }

    if (t % cfg.migration_period == 0 && st.islands.size() >= 2) {
      st.islands = migrate(std::move(st.islands), cfg.migration_rate, derive_seed(gen_seed, "migration"));
    }
    for (const auto& isl : st.islands) {
      if (isl.members.empty()) {
        throw IslandEmptied("island " + class_name(isl.cls) + " has no members after generation " + std::to_string(t));
      }
    }
    if (!opts.checkpoint_dir.empty()) write_checkpoint(opts.checkpoint_dir, t, cfg, st, seeds);
  }

  result.pool = std::move(st.pool);
  result.islands = std::move(st.islands);
  return result;
}

}  // namespace vlsynth
