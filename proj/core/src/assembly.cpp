#include "vlsynth/assembly.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <nlohmann/json.hpp>

#include "vlsynth/errors.hpp"
#include "vlsynth/parallel.hpp"
#include "vlsynth/raster.hpp"
#include "vlsynth/rng.hpp"

namespace vlsynth {

namespace {

constexpr int kAnswerSlot = kCorrectPanels - 1;
constexpr std::array<int, 3> kDistractorSlots = {5, 6, 7};
constexpr int kDonorPanels = 3;
// Donor pairs tried per source before moving on to the next source.
constexpr int kDonorPairs = 8;

int slot_from_name(const std::string& name) {
  for (int s = 0; s < kGroupPanels; ++s) {
    if (panel_name(s) == name) return s;
  }
  throw DomainError("unknown panel name: " + name);
}

void require_accepted(const GroupCard& g) {
  if (!g.accepted) throw RejectedGroup("group " + g.group_id + " did not pass QC");
}

Puzzle base_puzzle(const GroupCard& g) {
  Puzzle p;
  p.group_id = g.group_id;
  p.rule_id = g.rule_id;
  p.style = g.style;
  for (int i = 0; i < 4; ++i) p.stem[static_cast<std::size_t>(i)] = {g.group_id, i};
  return p;
}

void label_options(Puzzle& p, const std::vector<PanelRef>& order, const PanelRef& correct) {
  p.options.clear();
  for (std::size_t i = 0; i < order.size(); ++i) {
    const char label = static_cast<char>('A' + i);
    p.options.push_back({label, order[i]});
    if (order[i] == correct) p.answer = label;
  }
}

}  // namespace

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Default4: return "default4";
    case Variant::Shuffled4: return "shuffled4";
    case Variant::Expanded10: return "expanded10";
  }
  return "default4";
}

Variant parse_variant(std::string_view s) {
  if (s == "default4") return Variant::Default4;
  if (s == "shuffled4") return Variant::Shuffled4;
  if (s == "expanded10") return Variant::Expanded10;
  throw DomainError("unknown puzzle variant: " + std::string(s));
}

GroupCard card_of(const ImageGroup& group) {
  if (!group.qc) throw PreconditionError("group " + group.group_id + " has no QC verdict");
  return {group.group_id, group.rule_id, group.style, group.qc->accepted, group.qc->hashes};
}

const PanelRef& Puzzle::answer_panel() const {
  for (const auto& o : options) {
    if (o.label == answer) return o.panel;
  }
  throw DomainError(std::string("answer label ") + answer + " is not an option of " + id);
}

nlohmann::json to_json(const Puzzle& p) {
  auto ref = [](const PanelRef& r) { return nlohmann::json{{"group", r.group_id}, {"panel", panel_name(r.slot)}}; };
  nlohmann::json stem = nlohmann::json::array();
  for (const auto& s : p.stem) stem.push_back(ref(s));
  nlohmann::json options = nlohmann::json::array();
  for (const auto& o : p.options) {
    auto j = ref(o.panel);
    j["label"] = std::string(1, o.label);
    options.push_back(j);
  }
  nlohmann::json j = {{"id", p.id},
                      {"group", p.group_id},
                      {"variant", to_string(p.variant)},
                      {"stem", stem},
                      {"options", options},
                      {"answer", std::string(1, p.answer)},
                      {"provenance",
                       {{"rule", p.rule_id}, {"style", to_string(p.style)}, {"donors", p.donors}}},
                      {"rng_seed", p.rng_seed},
                      {"sheet", p.sheet}};
  if (p.variant == Variant::Shuffled4) j["position"] = p.position;
  if (!p.donor_source.empty()) j["provenance"]["donor_source"] = p.donor_source;
  return j;
}

Puzzle puzzle_from_json(const nlohmann::json& j) {
  auto ref = [](const nlohmann::json& r) {
    return PanelRef{r.at("group").get<std::string>(), slot_from_name(r.at("panel").get<std::string>())};
  };
  Puzzle p;
  p.id = j.at("id").get<std::string>();
  p.group_id = j.at("group").get<std::string>();
  p.variant = parse_variant(j.at("variant").get<std::string>());
  p.position = j.value("position", -1);
  const auto& stem = j.at("stem");
  if (stem.size() != 4) throw DomainError("puzzle " + p.id + " stem must have 4 panels");
  for (std::size_t i = 0; i < 4; ++i) p.stem[i] = ref(stem[i]);
  for (const auto& o : j.at("options")) {
    const auto label = o.at("label").get<std::string>();
    if (label.size() != 1) throw DomainError("bad option label in " + p.id);
    p.options.push_back({label[0], ref(o)});
  }
  const auto answer = j.at("answer").get<std::string>();
  if (answer.size() != 1) throw DomainError("bad answer label in " + p.id);
  p.answer = answer[0];
  const auto& prov = j.at("provenance");
  p.rule_id = prov.at("rule").get<std::string>();
  p.style = parse_style(prov.at("style").get<std::string>());
  p.donors = prov.value("donors", std::vector<std::string>{});
  p.donor_source = prov.value("donor_source", std::string{});
  p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  p.sheet = j.value("sheet", std::string{});
  return p;
}

Puzzle assemble_default(const GroupCard& group, std::uint64_t seed) {
  require_accepted(group);
  Puzzle p = base_puzzle(group);
  p.id = group.group_id + "-d";
  p.variant = Variant::Default4;
  p.rng_seed = seed;
  std::vector<PanelRef> order = {{group.group_id, kAnswerSlot}};
  for (int s : kDistractorSlots) order.push_back({group.group_id, s});
  Rng rng(seed);
  rng.shuffle(std::span<PanelRef>(order));
  label_options(p, order, {group.group_id, kAnswerSlot});
  return p;
}

std::array<Puzzle, 4> assemble_shuffled(const GroupCard& group) {
  require_accepted(group);
  const std::uint64_t seed = derive_seed(fnv1a64(group.group_id), "shuffled");
  std::vector<PanelRef> distractors;
  for (int s : kDistractorSlots) distractors.push_back({group.group_id, s});
  Rng rng(seed);
  rng.shuffle(std::span<PanelRef>(distractors));
  const PanelRef correct{group.group_id, kAnswerSlot};
  std::array<Puzzle, 4> out;
  for (int pos = 0; pos < 4; ++pos) {
    Puzzle p = base_puzzle(group);
    p.id = group.group_id + "-s" + static_cast<char>('A' + pos);
    p.variant = Variant::Shuffled4;
    p.position = pos;
    p.rng_seed = seed;
    auto order = distractors;
    order.insert(order.begin() + pos, correct);
    label_options(p, order, correct);
    out[static_cast<std::size_t>(pos)] = std::move(p);
  }
  return out;
}

LineageGraph::LineageGraph(std::span<const Rule> rules) {
  for (const auto& r : rules) rules_[r.id] = &r;
  for (const auto& r : rules) {
    for (const auto& e : r.lineage) {
      auto& ps = parents_[r.id];
      if (std::find(ps.begin(), ps.end(), e.parent) != ps.end()) continue;
      ps.push_back(e.parent);
      children_[e.parent].push_back(r.id);
    }
  }
}

const Rule* LineageGraph::find(const std::string& rule_id) const {
  auto it = rules_.find(rule_id);
  return it == rules_.end() ? nullptr : it->second;
}

std::vector<std::string> LineageGraph::relatives(const std::string& rule_id) const {
  std::set<std::string> seen = {rule_id};
  std::vector<std::string> out;
  auto walk = [&](const std::unordered_map<std::string, std::vector<std::string>>& edges) {
    std::vector<std::string> frontier = {rule_id};
    while (!frontier.empty()) {
      std::set<std::string> next;
      for (const auto& id : frontier) {
        auto it = edges.find(id);
        if (it == edges.end()) continue;
        for (const auto& n : it->second) {
          if (!seen.contains(n)) next.insert(n);
        }
      }
      for (const auto& n : next) {
        seen.insert(n);
        out.push_back(n);
      }
      frontier.assign(next.begin(), next.end());
    }
  };
  walk(parents_);
  walk(children_);
  return out;
}

GroupPool::GroupPool(std::vector<GroupCard> cards) : cards_(std::move(cards)) {
  for (std::size_t i = 0; i < cards_.size(); ++i) {
    if (!index_.emplace(cards_[i].group_id, i).second) {
      throw PreconditionError("duplicate group id " + cards_[i].group_id);
    }
  }
}

const GroupCard* GroupPool::find(const std::string& group_id) const {
  auto it = index_.find(group_id);
  return it == index_.end() ? nullptr : &cards_[it->second];
}

std::vector<const GroupCard*> related_groups(const GroupCard& group, const LineageGraph& lineage,
                                             const GroupPool& pool) {
  std::vector<const GroupCard*> out;
  for (const auto& rid : lineage.relatives(group.rule_id)) {
    const auto* g = pool.find(group_id_for(rid, group.style));
    if (g && g->accepted && g->group_id != group.group_id) out.push_back(g);
  }
  return out;
}

std::array<GroupCard, 2> find_related_groups(const GroupCard& group, const LineageGraph& lineage,
                                             const GroupPool& pool) {
  const auto rel = related_groups(group, lineage, pool);
  if (rel.size() < 2) {
    throw InsufficientRelatives("group " + group.group_id + " has " + std::to_string(rel.size()) +
                                " related accepted groups in its style");
  }
  return {*rel[0], *rel[1]};
}

Puzzle assemble_expanded(const GroupCard& group, const std::array<GroupCard, 2>& donors, std::uint64_t seed,
                         const ExpandOptions& opts) {
  require_accepted(group);
  for (const auto& d : donors) {
    require_accepted(d);
    if (d.group_id == group.group_id) throw PreconditionError("donor group equals the puzzle's own group");
  }
  if (donors[0].group_id == donors[1].group_id) throw PreconditionError("donor groups must be distinct");

  struct Pick {
    PanelRef ref;
    PHash hash;
  };
  std::vector<Pick> own = {{{group.group_id, kAnswerSlot}, group.hashes[kAnswerSlot]}};
  for (int s : kDistractorSlots) own.push_back({{group.group_id, s}, group.hashes[static_cast<std::size_t>(s)]});
  auto distinct = [&](const std::vector<Pick>& chosen, PHash h) {
    return std::all_of(chosen.begin(), chosen.end(),
                       [&](const Pick& c) { return hamming(c.hash, h) >= opts.dup_threshold; });
  };
  for (std::size_t i = 0; i < own.size(); ++i) {
    for (std::size_t j = i + 1; j < own.size(); ++j) {
      if (hamming(own[i].hash, own[j].hash) < opts.dup_threshold) {
        throw DuplicateOption("group " + group.group_id + " has near-duplicate answer options");
      }
    }
  }

  for (int attempt = 0; attempt <= opts.retry_budget; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    auto chosen = own;
    bool ok = true;
    for (const auto& d : donors) {
      std::array<int, kGroupPanels> slots{};
      for (int s = 0; s < kGroupPanels; ++s) slots[static_cast<std::size_t>(s)] = s;
      rng.shuffle(std::span<int>(slots));
      int taken = 0;
      for (int s : slots) {
        if (taken == kDonorPanels) break;
        const PHash h = d.hashes[static_cast<std::size_t>(s)];
        if (!distinct(chosen, h)) continue;
        chosen.push_back({{d.group_id, s}, h});
        ++taken;
      }
      if (taken < kDonorPanels) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    std::vector<PanelRef> order;
    for (const auto& c : chosen) order.push_back(c.ref);
    rng.shuffle(std::span<PanelRef>(order));
    Puzzle p = base_puzzle(group);
    p.id = group.group_id + "-x";
    p.variant = Variant::Expanded10;
    p.rng_seed = seed;
    p.donors = {donors[0].group_id, donors[1].group_id};
    label_options(p, order, {group.group_id, kAnswerSlot});
    return p;
  }
  throw DuplicateOption("no pHash-distinct draw from donors " + donors[0].group_id + " and " + donors[1].group_id +
                        " for group " + group.group_id);
}

std::string puzzle_prompt(const Puzzle& p) {
  const char* count = p.variant == Variant::Expanded10 ? "ten" : "four";
  return std::string("From the given ") + count +
         " options, select the most suitable one to fill in the question mark to present a certain regularity:\n\n"
         "Let's think step by step and output the final answer within \\boxed{}.";
}

namespace {

struct Geometry {
  int panel = 0;
  int gutter = 0;
  int pitch = 0;
  int width = 0;
  int label_scale = 1;
  int caption = 0;   // caption band under each option
  int options_y = 0;  // top of the first option row
  int row_pitch = 0;
  int rows = 1;
  int per_row = 4;
  int height = 0;
};

Geometry geometry(Variant v, int panel, const SheetLayout& l) {
  if (panel <= 0) throw DomainError("panel size must be positive");
  if (l.gutter < 2 * l.border || l.border < 0) throw DomainError("gutter must leave room for the cell borders");
  Geometry g;
  g.panel = panel;
  g.gutter = l.gutter;
  g.pitch = panel + l.gutter;
  g.width = l.gutter + 5 * g.pitch;
  g.label_scale = std::max(1, panel / 48);
  g.caption = kGlyphHeight * g.label_scale + l.gutter;
  g.options_y = l.gutter + panel + 2 * l.gutter;
  g.row_pitch = panel + g.caption + l.gutter;
  g.rows = v == Variant::Expanded10 ? 2 : 1;
  g.per_row = v == Variant::Expanded10 ? 5 : 4;
  g.height = g.options_y + g.rows * g.row_pitch;
  return g;
}

void frame(ImageBuf& img, int x, int y, int w, int h, int t, Rgb c) {
  for (int k = 1; k <= t; ++k) {
    for (int i = x - k; i < x + w + k; ++i) {
      img.set(i, y - k, c);
      img.set(i, y + h - 1 + k, c);
    }
    for (int j = y - k; j < y + h + k; ++j) {
      img.set(x - k, j, c);
      img.set(x + w - 1 + k, j, c);
    }
  }
}

}  // namespace

std::pair<int, int> sheet_size(Variant v, int panel_size, const SheetLayout& layout) {
  const auto g = geometry(v, panel_size, layout);
  return {g.width, g.height};
}

ImageBuf compose_sheet(const Puzzle& p, const PanelSource& panels, const SheetLayout& layout) {
  std::vector<ImageBuf> stem;
  for (const auto& r : p.stem) stem.push_back(panels(r));
  const int size = stem.front().width();
  auto check = [&](const ImageBuf& img, const PanelRef& r) {
    if (img.width() != size || img.height() != size) {
      throw DomainError("panel " + r.group_id + "/" + panel_name(r.slot) + " is not " + std::to_string(size) +
                        " px square");
    }
  };
  for (std::size_t i = 0; i < stem.size(); ++i) check(stem[i], p.stem[i]);
  const auto g = geometry(p.variant, size, layout);
  if (static_cast<int>(p.options.size()) != g.rows * g.per_row) {
    throw DomainError("puzzle " + p.id + " has " + std::to_string(p.options.size()) + " options");
  }

  ImageBuf sheet(g.width, g.height, kWhite);
  for (int i = 0; i < 4; ++i) {
    const int x = g.gutter + i * g.pitch;
    sheet.blit(stem[static_cast<std::size_t>(i)], x, g.gutter);
    frame(sheet, x, g.gutter, size, size, layout.border, layout.border_color);
  }
  {
    const int x = g.gutter + 4 * g.pitch;
    const int q = std::max(1, size / (2 * kGlyphHeight));
    draw_glyph(sheet, '?', x + (size - kGlyphWidth * q) / 2, g.gutter + (size - kGlyphHeight * q) / 2, q, kBlack);
    frame(sheet, x, g.gutter, size, size, layout.border, layout.border_color);
  }

  const int row_width = g.per_row * g.pitch - g.gutter;
  const int x0 = (g.width - row_width) / 2;
  for (std::size_t k = 0; k < p.options.size(); ++k) {
    const int row = static_cast<int>(k) / g.per_row;
    const int col = static_cast<int>(k) % g.per_row;
    const int x = x0 + col * g.pitch;
    const int y = g.options_y + row * g.row_pitch;
    const auto img = panels(p.options[k].panel);
    check(img, p.options[k].panel);
    sheet.blit(img, x, y);
    frame(sheet, x, y, size, size, layout.border, layout.border_color);
    draw_glyph(sheet, p.options[k].label, x + (size - kGlyphWidth * g.label_scale) / 2, y + size + g.gutter / 2,
               g.label_scale, kBlack);
  }
  return sheet;
}

AssemblyResult assemble_all(const GroupPool& pool, const LineageGraph& lineage, std::uint64_t seed,
                            const ExpandOptions& opts, int workers) {
  std::vector<const GroupCard*> accepted;
  for (const auto& c : pool.cards()) {
    if (c.accepted) accepted.push_back(&c);
  }

  struct Slot {
    std::vector<Puzzle> puzzles;
    std::string skip;
  };
  std::vector<Slot> slots(accepted.size());

  auto class_of = [&](const GroupCard& g) -> std::optional<RuleClass> {
    const Rule* r = lineage.find(g.rule_id);
    return r ? std::optional(r->cls) : std::nullopt;
  };

  parallel_for(accepted.size(), workers, [&](std::size_t i) {
    const GroupCard& g = *accepted[i];
    const std::uint64_t gseed = derive_seed(seed, g.group_id);
    auto& out = slots[i].puzzles;
    out.push_back(assemble_default(g, derive_seed(gseed, "default")));
    for (auto& p : assemble_shuffled(g)) out.push_back(std::move(p));

    const std::uint64_t xseed = derive_seed(gseed, "expanded");
    std::string last_error;
    auto try_pairs = [&](const std::vector<const GroupCard*>& cands, const char* source) -> bool {
      for (std::size_t k = 0; k + 1 < cands.size() && k / 2 < kDonorPairs; k += 2) {
        try {
          auto p = assemble_expanded(g, {*cands[k], *cands[k + 1]}, xseed, opts);
          p.donor_source = source;
          out.push_back(std::move(p));
          return true;
        } catch (const DuplicateOption& e) {
          last_error = e.what();
        }
      }
      return false;
    };

    auto related = related_groups(g, lineage, pool);
    if (try_pairs(related, "lineage")) return;

    // Uniform donor pairs from the same class, then from the whole style.
    const auto cls = class_of(g);
    for (int widen = 0; widen < 2; ++widen) {
      std::vector<const GroupCard*> cands;
      for (const auto* c : accepted) {
        if (c->group_id == g.group_id || c->style != g.style) continue;
        if (widen == 0 && (!cls || class_of(*c) != cls)) continue;
        cands.push_back(c);
      }
      Rng rng(derive_seed(xseed, static_cast<std::uint64_t>(widen)));
      rng.shuffle(std::span<const GroupCard*>(cands));
      if (try_pairs(cands, "fallback")) return;
    }
    slots[i].skip = last_error.empty() ? "no donor groups in style " + std::string(to_string(g.style)) : last_error;
  });

  AssemblyResult r;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (auto& p : slots[i].puzzles) r.puzzles.push_back(std::move(p));
    if (!slots[i].skip.empty()) r.skipped.push_back({accepted[i]->group_id, slots[i].skip});
  }
  return r;
}

}  // namespace vlsynth
