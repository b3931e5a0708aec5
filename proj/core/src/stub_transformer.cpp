#include <algorithm>
#include <cmath>

#include "vlsynth/dedup.hpp"
#include "vlsynth/errors.hpp"
#include "vlsynth/providers.hpp"
#include "vlsynth/rng.hpp"
#include "vlsynth/rule_dsl.hpp"

namespace vlsynth {

namespace {

template <typename T, std::size_t N>
T pick(Rng& rng, const T (&options)[N]) {
  return options[rng.below(N)];
}

std::string noun(ShapeKind k, bool plural) {
  switch (k) {
    case ShapeKind::Circle: return plural ? "circles" : "circle";
    case ShapeKind::Square: return plural ? "squares" : "square";
    case ShapeKind::Triangle: return plural ? "triangles" : "triangle";
    case ShapeKind::LineGroup: return plural ? "line pairs" : "line pair";
    case ShapeKind::StickFigure: return plural ? "stick figures" : "stick figure";
    case ShapeKind::Composite: return plural ? "framed dots" : "framed dot";
  }
  return "shapes";
}

std::string num(double v) { return format_number(v); }

std::string describe(const AttributeProgression& p, ShapeKind kind) {
  const double start = std::holds_alternative<double>(p.start) ? scalar(p.start) : 0.0;
  const auto* ar = std::get_if<Arithmetic>(&p.schedule);
  switch (p.attribute) {
    case Attribute::Count:
      if (const auto* g = std::get_if<Geometric>(&p.schedule)) {
        return "The number of " + noun(kind, true) + " multiplies by " + num(g->factor) +
               (g->every_k == 1 ? " in each panel" : " every " + std::to_string(g->every_k) + " panels") +
               ", starting from " + num(start);
      }
      if (std::holds_alternative<Toggle>(p.schedule)) {
        return "The number of " + noun(kind, true) + " alternates between " + num(start) + " and " + num(1 - start);
      }
      if (ar->step == 0) return "The number of " + noun(kind, true) + " stays at " + num(start) + " in every panel";
      return "The number of " + noun(kind, true) + (ar->step > 0 ? " grows by " : " drops by ") +
             num(std::abs(ar->step)) + " in each panel, starting from " + num(start);
    case Attribute::RotationDeg:
      if (ar->step == 0) return "The " + noun(kind, false) + " keeps a fixed rotation of " + num(start) + " degrees";
      return "Each panel turns the " + noun(kind, false) + " " + num(std::abs(ar->step)) + " degrees " +
             (ar->step > 0 ? "clockwise" : "counterclockwise") + " from a start of " + num(start) + " degrees";
    case Attribute::Position: {
      const auto& s = std::get<Shift>(p.schedule);
      const auto o = offset(p.start);
      return "The " + noun(kind, false) + " slides " + num(std::abs(s.dx)) + (s.dx < 0 ? " px left and " : " px right and ") +
             num(std::abs(s.dy)) + (s.dy < 0 ? " px up" : " px down") + " per panel from offset (" + num(o.dx) + ", " +
             num(o.dy) + ")";
    }
    case Attribute::Shading:
      if (std::holds_alternative<Toggle>(p.schedule)) {
        return "The shading of the " + noun(kind, true) + " alternates between " + num(start) + " and " + num(1 - start);
      }
      return "The shading of the " + noun(kind, true) + (ar->step >= 0 ? " darkens by " : " lightens by ") +
             num(std::abs(ar->step)) + " per panel from " + num(start);
    case Attribute::ParallelLineGroups:
      return "The number of parallel line groups rises by " + num(ar->step) + " per panel from " + num(start);
  }
  return {};
}

std::string describe_entity(const EntitySpec& e) {
  return "Every element is a " + std::string(to_string(e.size)) + " " + std::string(to_string(e.fill)) + " " +
         noun(e.kind, false);
}

std::string recipe_phrase(ViolationRecipe r) {
  switch (r) {
    case ViolationRecipe::CountOff: return "miscount the elements";
    case ViolationRecipe::RotationOff: return "turn to an off-schedule angle";
    case ViolationRecipe::PositionOff: return "step off the path";
    case ViolationRecipe::ShadingOff: return "use the wrong shading";
    case ViolationRecipe::LinesOff: return "miscount the line groups";
    case ViolationRecipe::OrderSwap: return "repeat an earlier state";
    case ViolationRecipe::WrongFill: return "flip the fill";
    case ViolationRecipe::WrongShape: return "swap in another shape";
  }
  return {};
}

std::string describe_recipes(const std::vector<ViolationRecipe>& rs) {
  std::string out = "Wrong options";
  const std::size_t n = std::min(rs.size(), kDistractorCount);
  for (std::size_t i = 0; i < n; ++i) {
    out += i == 0 ? " " : (i + 1 == n ? " or " : ", ");
    out += recipe_phrase(rs[i]);
  }
  return out;
}

bool contains(const std::string& text, std::string_view needle) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower.find(needle) != std::string::npos;
}

std::optional<std::size_t> find_bullet(const std::vector<std::string>& bullets, Attribute a) {
  for (std::size_t i = 0; i < bullets.size(); ++i) {
    if (bullets_mention(std::span(&bullets[i], 1), a)) {
      // A line-group bullet also says "number of"; keep looking for count.
      if (a == Attribute::Count && contains(bullets[i], "line group")) continue;
      return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> find_bullet(const std::vector<std::string>& bullets, std::initializer_list<std::string_view> words) {
  for (std::size_t i = 0; i < bullets.size(); ++i) {
    for (auto w : words) {
      if (contains(bullets[i], w)) return i;
    }
  }
  return std::nullopt;
}

// Fresh progression for an attribute with parameters that keep every
// panel value in range.
AttributeProgression random_progression(Attribute a, Rng& rng) {
  AttributeProgression p;
  p.attribute = a;
  switch (a) {
    case Attribute::Count: {
      switch (rng.below(4)) {
        case 0: p.schedule = Arithmetic{1}; p.start = static_cast<double>(1 + rng.below(3)); break;
        case 1: p.schedule = Arithmetic{2}; p.start = 1.0; break;
        case 2: p.schedule = Arithmetic{-1}; p.start = static_cast<double>(5 + rng.below(2)); break;
        default: p.schedule = Geometric{2, 2}; p.start = 1.0; break;
      }
      break;
    }
    case Attribute::RotationDeg: {
      static constexpr double kSteps[] = {20, 30, 45, 60, -20, -30, -45, -60};
      static constexpr double kStarts[] = {0, 15, 30};
      p.schedule = Arithmetic{pick(rng, kSteps)};
      p.start = pick(rng, kStarts);
      break;
    }
    case Attribute::Position: {
      static constexpr double kSteps[] = {-20, -16, -12, 0, 12, 16, 20};
      Shift s{pick(rng, kSteps), pick(rng, kSteps)};
      if (s.dx == 0 && s.dy == 0) s.dx = 16;
      p.schedule = s;
      p.start = Offset{-2 * s.dx, -2 * s.dy};
      break;
    }
    case Attribute::Shading: {
      if (rng.below(3) == 0) {
        p.schedule = Toggle{};
        p.start = static_cast<double>(rng.below(2));
      } else {
        static constexpr double kSteps[] = {0.2, -0.2, 0.15, -0.15};
        const double step = pick(rng, kSteps);
        p.schedule = Arithmetic{step};
        p.start = step > 0 ? 0.2 : 1.0;
      }
      break;
    }
    case Attribute::ParallelLineGroups:
      p.schedule = Arithmetic{1};
      p.start = static_cast<double>(1 + rng.below(2));
      break;
  }
  return p;
}

ViolationRecipe off_recipe(Attribute a) {
  switch (a) {
    case Attribute::Count: return ViolationRecipe::CountOff;
    case Attribute::RotationDeg: return ViolationRecipe::RotationOff;
    case Attribute::Position: return ViolationRecipe::PositionOff;
    case Attribute::Shading: return ViolationRecipe::ShadingOff;
    case Attribute::ParallelLineGroups: return ViolationRecipe::LinesOff;
  }
  return ViolationRecipe::WrongShape;
}

// Recipes the program could use in its current shape.
std::vector<ViolationRecipe> usable_recipes(const RuleProgram& p) {
  std::vector<ViolationRecipe> out;
  for (const auto& prog : p.progressions) out.push_back(off_recipe(prog.attribute));
  out.push_back(ViolationRecipe::WrongShape);
  if (!p.governs(Attribute::Shading)) out.push_back(ViolationRecipe::WrongFill);
  if (order_swap_target(p)) out.push_back(ViolationRecipe::OrderSwap);
  return out;
}

// Replace recipes that no longer fit the program, avoiding repeats.
void repair_recipes(RuleProgram& p) {
  const auto usable = usable_recipes(p);
  auto fits = [&](ViolationRecipe r) { return std::find(usable.begin(), usable.end(), r) != usable.end(); };
  for (auto& r : p.violations) {
    if (fits(r)) continue;
    for (auto cand : usable) {
      if (std::find(p.violations.begin(), p.violations.end(), cand) == p.violations.end()) {
        r = cand;
        break;
      }
    }
    if (!fits(r)) r = ViolationRecipe::WrongShape;
  }
}

std::vector<Attribute> addable_attributes(const RuleProgram& p) {
  std::vector<Attribute> out;
  for (auto a : {Attribute::Count, Attribute::RotationDeg, Attribute::Position, Attribute::Shading,
                 Attribute::ParallelLineGroups}) {
    if (p.governs(a)) continue;
    if (a == Attribute::Count && p.governs(Attribute::ParallelLineGroups)) continue;
    if (a == Attribute::ParallelLineGroups &&
        (p.governs(Attribute::Count) || p.entity.kind != ShapeKind::LineGroup)) {
      continue;
    }
    out.push_back(a);
  }
  return out;
}

// Text-only edit for rules without a usable program: swap two neighbours.
RuleDraft swap_bullets(const Rule& parent, Rng& rng) {
  RuleDraft d{parent.bullets, parent.program};
  if (d.bullets.size() >= 2) {
    const auto i = rng.below(d.bullets.size() - 1);
    std::swap(d.bullets[i], d.bullets[i + 1]);
  }
  return d;
}

RuleDraft rewrite(const Rule& parent, RuleProgram prog, Rng& rng) {
  auto bullets = parent.bullets;
  const auto at_or_random = [&](std::optional<std::size_t> i) { return i ? *i : rng.below(bullets.size()); };
  const auto choice = rng.below(prog.progressions.size() + 2);
  if (choice < prog.progressions.size()) {
    auto& p = prog.progressions[choice];
    const auto old = p;
    for (int tries = 0; tries < 8 && p == old; ++tries) p = random_progression(old.attribute, rng);
    repair_recipes(prog);
    bullets[at_or_random(find_bullet(bullets, p.attribute))] = describe(p, prog.entity.kind);
  } else if (choice == prog.progressions.size()) {
    const auto old_kind = prog.entity.kind;
    switch (rng.below(3)) {
      case 0:
        if (!prog.governs(Attribute::ParallelLineGroups)) {
          static constexpr ShapeKind kKinds[] = {ShapeKind::Circle, ShapeKind::Square, ShapeKind::Triangle,
                                                 ShapeKind::StickFigure, ShapeKind::Composite, ShapeKind::LineGroup};
          do {
            prog.entity.kind = pick(rng, kKinds);
          } while (prog.entity.kind == old_kind);
          break;
        }
        [[fallthrough]];
      case 1:
        prog.entity.fill = prog.entity.fill == Fill::Solid ? Fill::Hollow : Fill::Solid;
        break;
      default: {
        static constexpr SizeClass kSizes[] = {SizeClass::Small, SizeClass::Medium, SizeClass::Large};
        const auto old = prog.entity.size;
        do {
          prog.entity.size = pick(rng, kSizes);
        } while (prog.entity.size == old);
        break;
      }
    }
    bullets[at_or_random(find_bullet(bullets, {"element", noun(old_kind, false)}))] = describe_entity(prog.entity);
  } else {
    const auto usable = usable_recipes(prog);
    const auto slot = rng.below(std::min(prog.violations.size(), kDistractorCount));
    prog.violations[slot] = usable[rng.below(usable.size())];
    bullets[at_or_random(find_bullet(bullets, {"wrong", "distractor", "incorrect"}))] =
        describe_recipes(prog.violations);
  }
  return {std::move(bullets), print_rule_program(prog)};
}

RuleDraft add(const Rule& parent, RuleProgram prog, Rng& rng) {
  const auto attrs = addable_attributes(prog);
  if (attrs.empty()) return rewrite(parent, std::move(prog), rng);
  auto p = random_progression(attrs[rng.below(attrs.size())], rng);
  prog.progressions.push_back(p);
  if (rng.bernoulli(0.5)) prog.violations[rng.below(kDistractorCount)] = off_recipe(p.attribute);
  repair_recipes(prog);
  auto bullets = parent.bullets;
  bullets.insert(bullets.begin() + static_cast<std::ptrdiff_t>(1 + rng.below(bullets.size())),
                 describe(p, prog.entity.kind));
  return {std::move(bullets), print_rule_program(prog)};
}

RuleDraft remove(const Rule& parent, RuleProgram prog, Rng& rng) {
  auto bullets = parent.bullets;
  const auto idx = rng.below(bullets.size());
  if (prog.progressions.size() > 1) {
    for (auto it = prog.progressions.begin(); it != prog.progressions.end(); ++it) {
      if (find_bullet(bullets, it->attribute) == idx) {
        prog.progressions.erase(it);
        repair_recipes(prog);
        break;
      }
    }
  }
  bullets.erase(bullets.begin() + static_cast<std::ptrdiff_t>(idx));
  return {std::move(bullets), print_rule_program(prog)};
}

}  // namespace

RuleDraft StubTransformer::mutate(const Rule& parent, std::uint64_t seed) {
  Rng rng(seed);
  if (parent.bullets.empty()) throw PreconditionError("cannot mutate a rule without bullets");
  auto parsed = try_parse_rule_program(parent.program);
  if (!parsed.ok()) return swap_bullets(parent, rng);
  const double u = rng.uniform();
  if (u < 0.6) return rewrite(parent, std::move(*parsed.program), rng);
  if (u < 0.8) return add(parent, std::move(*parsed.program), rng);
  return remove(parent, std::move(*parsed.program), rng);
}

RuleDraft StubTransformer::crossover(const Rule& a, const Rule& b, std::uint64_t seed) {
  RuleDraft d;
  d.bullets = a.bullets;
  // Half the seeds interleave a1, b2, a3, ...; the rest take a random subset
  // of positions from b, so retries can reach children not yet in the pool.
  const std::size_t shared = std::min(a.bullets.size(), b.bullets.size());
  Rng rng(derive_seed(seed, "crossover"));
  const bool interleave = rng.bernoulli(0.5);
  bool took = false;
  for (std::size_t i = 0; i < shared; ++i) {
    const bool from_b = interleave ? i % 2 == 1 : rng.bernoulli(0.5);
    if (from_b && b.bullets[i] != a.bullets[i]) {
      d.bullets[i] = b.bullets[i];
      took = true;
    }
  }
  if (!took) {
    std::vector<std::size_t> differ;
    for (std::size_t i = 0; i < shared; ++i) {
      if (b.bullets[i] != a.bullets[i]) differ.push_back(i);
    }
    if (!differ.empty()) {
      const auto i = differ[rng.below(differ.size())];
      d.bullets[i] = b.bullets[i];
    }
  }
  d.program = a.program;
  auto pa = try_parse_rule_program(a.program);
  auto pb = try_parse_rule_program(b.program);
  if (!pa.ok() || !pb.ok()) return d;
  RuleProgram child = *pa.program;
  for (const auto& q : pb.program->progressions) {
    if (child.governs(q.attribute)) continue;
    RuleProgram trial = child;
    trial.progressions.push_back(q);
    try {
      check_semantics(trial);
      child = std::move(trial);
    } catch (const Error&) {
      // incompatible with the first parent's program; leave it out
    }
  }
  d.program = print_rule_program(child);
  return d;
}

}  // namespace vlsynth
