#include "vlsynth/rule.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vlsynth/errors.hpp"
#include "vlsynth/hash.hpp"
#include "vlsynth/io.hpp"

namespace vlsynth {

namespace {

constexpr std::array<RuleClass, 8> kCanonical = {{
    {VisualPattern::HorizontalSquare, ReasoningStyle::Deductive},
    {VisualPattern::HorizontalSquare, ReasoningStyle::Inductive},
    {VisualPattern::NineSquareGrid, ReasoningStyle::Deductive},
    {VisualPattern::NineSquareGrid, ReasoningStyle::Inductive},
    {VisualPattern::Analogy, ReasoningStyle::Deductive},
    {VisualPattern::Analogy, ReasoningStyle::Inductive},
    {VisualPattern::TwoGroup, ReasoningStyle::Inductive},
    {VisualPattern::Others, ReasoningStyle::Others},
}};

constexpr std::array<std::pair<VisualPattern, std::string_view>, 5> kVisualNames = {{
    {VisualPattern::NineSquareGrid, "nine_square_grid"},
    {VisualPattern::HorizontalSquare, "horizontal_square"},
    {VisualPattern::Analogy, "analogy"},
    {VisualPattern::TwoGroup, "two_group"},
    {VisualPattern::Others, "others"},
}};

constexpr std::array<std::pair<ReasoningStyle, std::string_view>, 3> kReasoningNames = {{
    {ReasoningStyle::Deductive, "deductive"},
    {ReasoningStyle::Inductive, "inductive"},
    {ReasoningStyle::Others, "others"},
}};

bool is_punct_only(std::string_view tok) {
  return std::all_of(tok.begin(), tok.end(), [](unsigned char c) {
    return c < 0x80 && std::ispunct(c);
  });
}

}  // namespace

RuleClass canonical_class(VisualPattern visual, ReasoningStyle reasoning) {
  if (visual == VisualPattern::Others || reasoning == ReasoningStyle::Others) {
    return {VisualPattern::Others, ReasoningStyle::Others};
  }
  if (visual == VisualPattern::TwoGroup && reasoning == ReasoningStyle::Deductive) {
    throw InvalidCombination("two_group/deductive is not a rule class (two-group rules are inductive)");
  }
  return {visual, reasoning};
}

const std::array<RuleClass, 8>& canonical_classes() { return kCanonical; }

bool is_canonical(RuleClass c) {
  return std::find(kCanonical.begin(), kCanonical.end(), c) != kCanonical.end();
}

std::string_view to_string(VisualPattern v) {
  for (const auto& [k, name] : kVisualNames) {
    if (k == v) return name;
  }
  return "others";
}

std::string_view to_string(ReasoningStyle r) {
  for (const auto& [k, name] : kReasoningNames) {
    if (k == r) return name;
  }
  return "others";
}

std::string class_name(RuleClass c) {
  if (c.visual == VisualPattern::Others && c.reasoning == ReasoningStyle::Others) return "others";
  return std::string(to_string(c.visual)) + "/" + std::string(to_string(c.reasoning));
}

RuleClass parse_class_name(std::string_view name) {
  if (name == "others") return {VisualPattern::Others, ReasoningStyle::Others};
  const auto slash = name.find('/');
  if (slash == std::string_view::npos) {
    throw InvalidCombination("unknown rule class '" + std::string(name) + "'");
  }
  const auto vis = name.substr(0, slash);
  const auto rea = name.substr(slash + 1);
  std::optional<VisualPattern> v;
  std::optional<ReasoningStyle> r;
  for (const auto& [k, n] : kVisualNames) {
    if (n == vis) v = k;
  }
  for (const auto& [k, n] : kReasoningNames) {
    if (n == rea) r = k;
  }
  if (!v || !r) throw InvalidCombination("unknown rule class '" + std::string(name) + "'");
  return canonical_class(*v, *r);
}

std::string_view to_string(LineageOp op) {
  switch (op) {
    case LineageOp::Seed: return "seed";
    case LineageOp::Mutation: return "mutation";
    case LineageOp::Crossover: return "crossover";
    case LineageOp::Migration: return "migration";
  }
  return "seed";
}

LineageOp parse_lineage_op(std::string_view s) {
  if (s == "seed") return LineageOp::Seed;
  if (s == "mutation") return LineageOp::Mutation;
  if (s == "crossover") return LineageOp::Crossover;
  if (s == "migration") return LineageOp::Migration;
  throw IoError("unknown lineage operator '" + std::string(s) + "'");
}

bool ScoreTriple::in_range() const noexcept {
  auto ok = [](int v) { return v >= 1 && v <= 5; };
  return ok(format) && ok(content) && ok(feasibility);
}

std::string rule_id(RuleClass cls, std::span<const std::string> bullets) {
  std::uint64_t h = fnv1a64(class_name(cls));
  for (const auto& b : bullets) {
    h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(b, h);
  }
  return "r" + hex64(mix64(h));
}

Rule with_content_id(Rule r) {
  r.id = rule_id(r.cls, r.bullets);
  return r;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start && !is_punct_only(text.substr(start, i - start))) ++n;
  }
  return n;
}

bool ValidationReport::has(ViolationCode code) const noexcept {
  return std::any_of(violations.begin(), violations.end(),
                     [code](const Violation& v) { return v.code == code; });
}

ValidationReport validate_rule(const Rule& rule) {
  ValidationReport report;
  auto add = [&](ViolationCode code, std::string msg, std::optional<std::size_t> bullet = {}) {
    report.violations.push_back({code, std::move(msg), bullet});
  };

  if (rule.bullets.size() < kMinBullets) {
    add(ViolationCode::BulletCountLow, "bullet count below 4");
  } else if (rule.bullets.size() > kMaxBullets) {
    add(ViolationCode::BulletCountHigh, "bullet count above 6");
  }
  for (std::size_t i = 0; i < rule.bullets.size(); ++i) {
    const auto words = count_words(rule.bullets[i]);
    if (words == 0) {
      add(ViolationCode::EmptyBullet, "bullet is empty", i);
    } else if (words > kMaxBulletWords) {
      add(ViolationCode::BulletWordLimit,
          "bullet exceeds word limit (" + std::to_string(words) + " words)", i);
    }
  }
  if (!is_canonical(rule.cls)) {
    add(ViolationCode::InvalidClass, "class is not one of the 8 canonical classes");
  }

  const auto& lin = rule.lineage;
  const auto all_op = [&](LineageOp op) {
    return std::all_of(lin.begin(), lin.end(), [op](const LineageEdge& e) { return e.op == op; });
  };
  if (rule.generation < 0) {
    add(ViolationCode::LineageShape, "generation is negative");
  } else if (rule.generation == 0) {
    if (!lin.empty()) add(ViolationCode::LineageShape, "generation-0 rule has lineage");
  } else if (lin.empty()) {
    add(ViolationCode::LineageShape, "evolved rule has empty lineage");
  } else if (all_op(LineageOp::Mutation)) {
    if (lin.size() != 1) add(ViolationCode::LineageShape, "mutation rule must have exactly 1 parent");
  } else if (all_op(LineageOp::Crossover)) {
    if (lin.size() != 2) add(ViolationCode::LineageShape, "crossover rule must have exactly 2 parents");
  } else {
    add(ViolationCode::LineageShape, "lineage mixes operators or uses a non-breeding operator");
  }

  if (rule.scores && !rule.scores->in_range()) {
    add(ViolationCode::ScoreRange, "score component outside [1,5]");
  }
  return report;
}

nlohmann::json to_json(const Rule& r) {
  nlohmann::json lineage = nlohmann::json::array();
  for (const auto& e : r.lineage) {
    lineage.push_back({{"parent", e.parent}, {"op", to_string(e.op)}});
  }
  nlohmann::json j = {
      {"id", r.id},
      {"class", class_name(r.cls)},
      {"bullets", r.bullets},
      {"generation", r.generation},
      {"lineage", lineage},
      {"scores", nullptr},
      {"program", r.program},
  };
  if (r.scores) {
    j["scores"] = {{"format", r.scores->format},
                   {"content", r.scores->content},
                   {"feasibility", r.scores->feasibility}};
  }
  return j;
}

Rule rule_from_json(const nlohmann::json& j) {
  Rule r;
  r.cls = parse_class_name(j.at("class").get<std::string>());
  r.bullets = j.at("bullets").get<std::vector<std::string>>();
  r.generation = j.value("generation", 0);
  if (j.contains("lineage")) {
    for (const auto& e : j.at("lineage")) {
      r.lineage.push_back({e.at("parent").get<std::string>(),
                           parse_lineage_op(e.at("op").get<std::string>())});
    }
  }
  if (j.contains("scores") && !j.at("scores").is_null()) {
    const auto& s = j.at("scores");
    r.scores = ScoreTriple{s.at("format").get<int>(), s.at("content").get<int>(),
                           s.at("feasibility").get<int>()};
  }
  r.program = j.value("program", std::string{});
  r.id = j.contains("id") && !j.at("id").get<std::string>().empty()
             ? j.at("id").get<std::string>()
             : rule_id(r.cls, r.bullets);
  return r;
}

std::vector<Rule> read_rules_jsonl(const std::filesystem::path& path) {
  std::vector<Rule> out;
  for (const auto& row : read_jsonl(path)) out.push_back(rule_from_json(row));
  return out;
}

void write_rules_jsonl(const std::filesystem::path& path, std::span<const Rule> rules) {
  std::vector<nlohmann::json> rows;
  rows.reserve(rules.size());
  for (const auto& r : rules) rows.push_back(to_json(r));
  write_jsonl(path, rows);
}

}  // namespace vlsynth
