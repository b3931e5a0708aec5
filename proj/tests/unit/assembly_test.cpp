#include <doctest.h>

#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "oracles.hpp"
#include "vlsynth/assembly.hpp"
#include "vlsynth/errors.hpp"
#include "vlsynth/hash.hpp"
#include "vlsynth/rng.hpp"

using namespace vlsynth;

namespace {

GroupCard card(const std::string& rule_id, std::uint64_t seed, StyleId style = StyleId::MonochromeVector) {
  GroupCard c;
  c.rule_id = rule_id;
  c.group_id = group_id_for(rule_id, style);
  c.style = style;
  c.accepted = true;
  Rng rng(seed);
  for (auto& h : c.hashes) h = rng.next();
  return c;
}

// Deterministic noise panel per reference, so every cell is distinguishable.
ImageBuf synthetic_panel(const PanelRef& r, int size) {
  Rng rng(derive_seed(fnv1a64(r.group_id), static_cast<std::uint64_t>(r.slot)));
  ImageBuf img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const auto v = static_cast<std::uint8_t>(rng.below(256));
      img.set(x, y, Rgb{v, static_cast<std::uint8_t>(255 - v), static_cast<std::uint8_t>(v / 2)});
    }
  return img;
}

Rule rule(const std::string& id, std::vector<std::string> parents = {}) {
  Rule r;
  r.id = id;
  r.generation = parents.empty() ? 0 : 1;
  for (auto& p : parents) r.lineage.push_back({p, LineageOp::Mutation});
  return r;
}

}  // namespace

TEST_CASE("default puzzle holds the answer and the three distractors") {
  const auto g = card("r1", 1);
  const auto p = assemble_default(g, 5);
  CHECK(p == assemble_default(g, 5));
  CHECK(p.variant == Variant::Default4);
  REQUIRE(p.options.size() == 4);
  std::set<int> slots;
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(p.options[k].label == static_cast<char>('A' + k));
    CHECK(p.options[k].panel.group_id == g.group_id);
    slots.insert(p.options[k].panel.slot);
  }
  CHECK(slots == std::set<int>{4, 5, 6, 7});
  CHECK(p.answer_panel() == PanelRef{g.group_id, 4});
  for (int i = 0; i < 4; ++i) CHECK(p.stem[static_cast<std::size_t>(i)] == PanelRef{g.group_id, i});
  CHECK(puzzle_from_json(to_json(p)) == p);

  auto rejected = g;
  rejected.accepted = false;
  CHECK_THROWS_AS(assemble_default(rejected, 5), RejectedGroup);
}

TEST_CASE("shuffled puzzles place the answer at every label with a fixed distractor order") {
  const auto g = card("r2", 2);
  const auto ps = assemble_shuffled(g);
  std::set<char> answers;
  std::vector<PanelRef> distractors;
  for (int pos = 0; pos < 4; ++pos) {
    const auto& p = ps[static_cast<std::size_t>(pos)];
    CHECK(p.position == pos);
    CHECK(p.answer == static_cast<char>('A' + pos));
    CHECK(p.answer_panel() == PanelRef{g.group_id, 4});
    answers.insert(p.answer);
    std::vector<PanelRef> rest;
    for (const auto& o : p.options)
      if (o.panel.slot != 4) rest.push_back(o.panel);
    if (pos == 0) distractors = rest;
    CHECK(rest == distractors);
  }
  CHECK(answers == std::set<char>{'A', 'B', 'C', 'D'});
}

TEST_CASE("lineage relatives list ancestors before descendants, nearest first") {
  const std::vector<Rule> rules = {rule("a"), rule("b", {"a"}), rule("c", {"b"}), rule("d", {"c"}),
                                   rule("e", {"c"}), rule("f", {"d", "a"})};
  LineageGraph lin(rules);
  CHECK(lin.relatives("c") == std::vector<std::string>{"b", "a", "d", "e", "f"});
  CHECK(lin.relatives("a") == std::vector<std::string>{"b", "f", "c", "d", "e"});
  CHECK(lin.find("zz") == nullptr);

  std::vector<GroupCard> cards;
  for (const auto& r : rules) cards.push_back(card(r.id, fnv1a64(r.id)));
  cards.push_back(card("b", 99, StyleId::FreePalette));
  cards[0].accepted = false;  // "a" is rejected and must be skipped
  GroupPool pool(cards);
  const auto rel = related_groups(cards[2], lin, pool);
  std::vector<std::string> ids;
  for (const auto* g : rel) ids.push_back(g->rule_id);
  CHECK(ids == std::vector<std::string>{"b", "d", "e", "f"});
  const auto two = find_related_groups(cards[2], lin, pool);
  CHECK(two[0].rule_id == "b");
  CHECK(two[1].rule_id == "d");
  CHECK_THROWS_AS(find_related_groups(cards.back(), lin, pool), InsufficientRelatives);
  CHECK_THROWS_AS(GroupPool({cards[1], cards[1]}), PreconditionError);
}

TEST_CASE("expanded puzzles draw three distinct panels from each of two donors") {
  const auto g = card("own", 11);
  const std::array<GroupCard, 2> donors = {card("d1", 12), card("d2", 13)};
  const auto p = assemble_expanded(g, donors, 77);
  REQUIRE(p.options.size() == 10);
  CHECK(p.answer_panel() == PanelRef{g.group_id, 4});
  std::map<std::string, int> per_group;
  std::map<std::string, const GroupCard*> by_id = {{g.group_id, &g}, {donors[0].group_id, &donors[0]},
                                                   {donors[1].group_id, &donors[1]}};
  std::vector<PHash> hashes;
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(p.options[k].label == static_cast<char>('A' + k));
    ++per_group[p.options[k].panel.group_id];
    hashes.push_back(by_id.at(p.options[k].panel.group_id)->hashes[static_cast<std::size_t>(p.options[k].panel.slot)]);
  }
  CHECK(per_group == std::map<std::string, int>{{g.group_id, 4}, {donors[0].group_id, 3}, {donors[1].group_id, 3}});
  for (std::size_t i = 0; i < hashes.size(); ++i)
    for (std::size_t j = i + 1; j < hashes.size(); ++j) CHECK(oracle::hamming_bits(hashes[i], hashes[j]) >= 10);
  CHECK(p.donors == std::vector<std::string>{donors[0].group_id, donors[1].group_id});
  CHECK(p == assemble_expanded(g, donors, 77));

  // Donor panels all equal to the answer cannot be used.
  auto clone = donors;
  for (auto& d : clone) d.hashes.fill(g.hashes[4]);
  CHECK_THROWS_AS(assemble_expanded(g, clone, 77), DuplicateOption);
  CHECK_THROWS_AS(assemble_expanded(g, {donors[0], donors[0]}, 77), PreconditionError);
  CHECK_THROWS_AS(assemble_expanded(g, {g, donors[0]}, 77), PreconditionError);
}

TEST_CASE("sheets match their declared size and hold exact panel pixels") {
  const auto g = card("own", 11);
  const std::array<GroupCard, 2> donors = {card("d1", 12), card("d2", 13)};
  for (int size : {48, 100, 128}) {
    CAPTURE(size);
    const PanelSource src = [&](const PanelRef& r) { return synthetic_panel(r, size); };
    for (const auto& p : {assemble_default(g, 3), assemble_shuffled(g)[2], assemble_expanded(g, donors, 3)}) {
      const auto sheet = compose_sheet(p, src);
      const auto [w, h] = sheet_size(p.variant, size);
      CHECK(sheet.width() == w);
      CHECK(sheet.height() == h);
      for (int k = 0; k < static_cast<int>(p.options.size()); ++k) {
        CHECK(oracle::same_pixels(sheet, oracle::option_cell(p.variant, size, k),
                                  synthetic_panel(p.options[static_cast<std::size_t>(k)].panel, size)));
      }
      CHECK(oracle::same_pixels(sheet, {8, 8}, synthetic_panel(p.stem[0], size)));
    }
  }
  const PanelSource bad = [](const PanelRef& r) { return synthetic_panel(r, r.slot == 5 ? 40 : 48); };
  CHECK_THROWS_AS(compose_sheet(assemble_default(g, 3), bad), DomainError);
}

TEST_CASE("assemble_all yields six puzzles per accepted group") {
  std::vector<Rule> rules = {rule("a"), rule("b", {"a"}), rule("c", {"a"}), rule("d", {"b"})};
  std::vector<GroupCard> cards;
  for (const auto& r : rules) cards.push_back(card(r.id, fnv1a64(r.id)));
  cards.push_back(card("lonely", 5, StyleId::FreePalette));
  GroupPool pool(cards);
  LineageGraph lin(rules);
  const auto one = assemble_all(pool, lin, 9, {}, 1);
  const auto many = assemble_all(pool, lin, 9, {}, 3);
  CHECK(one.puzzles == many.puzzles);
  CHECK(one.puzzles.size() == 4 * 6 + 5);
  REQUIRE(one.skipped.size() == 1);
  CHECK(one.skipped[0].group_id == cards.back().group_id);
  int expanded = 0;
  for (const auto& p : one.puzzles) {
    if (p.variant != Variant::Expanded10) continue;
    ++expanded;
    CHECK(p.donors.size() == 2);
    CHECK((p.donor_source == "lineage" || p.donor_source == "fallback"));
  }
  CHECK(expanded == 4);
}
