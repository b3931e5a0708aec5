#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace vlsynth {

enum class VisualPattern { NineSquareGrid, HorizontalSquare, Analogy, TwoGroup, Others };
enum class ReasoningStyle { Deductive, Inductive, Others };

// A (visual pattern, reasoning style) pair. Only the 8 canonical pairs
// returned by canonical_classes() are valid rule classes.
struct RuleClass {
  VisualPattern visual = VisualPattern::Others;
  ReasoningStyle reasoning = ReasoningStyle::Others;

  friend auto operator<=>(const RuleClass&, const RuleClass&) = default;
};

/// Collapse a tag pair onto one of the 8 island classes. Any Others tag maps
/// to the unified Others class. Throws InvalidCombination for
/// (TwoGroup, Deductive), which has no corresponding class.
RuleClass canonical_class(VisualPattern visual, ReasoningStyle reasoning);

/// The 8 canonical classes in island order.
const std::array<RuleClass, 8>& canonical_classes();

bool is_canonical(RuleClass c);

/// Stable text name, e.g. "horizontal_square/deductive" or "others".
std::string class_name(RuleClass c);
/// Inverse of class_name; also accepts any "visual/reasoning" pair and
/// canonicalizes it. Throws InvalidCombination on unknown names.
RuleClass parse_class_name(std::string_view name);

std::string_view to_string(VisualPattern v);
std::string_view to_string(ReasoningStyle r);

enum class LineageOp { Seed, Mutation, Crossover, Migration };

std::string_view to_string(LineageOp op);
LineageOp parse_lineage_op(std::string_view s);

struct LineageEdge {
  std::string parent;
  LineageOp op = LineageOp::Seed;

  friend bool operator==(const LineageEdge&, const LineageEdge&) = default;
};

struct ScoreTriple {
  int format = 1;
  int content = 1;
  int feasibility = 1;

  int total() const noexcept { return format + content + feasibility; }
  bool in_range() const noexcept;

  friend bool operator==(const ScoreTriple&, const ScoreTriple&) = default;
};

struct Rule {
  std::string id;
  RuleClass cls;
  std::vector<std::string> bullets;
  int generation = 0;
  std::vector<LineageEdge> lineage;
  std::optional<ScoreTriple> scores;
  // Rule-program source text (see rule_dsl.hpp); empty when the rule has no
  // executable counterpart.
  std::string program;

  friend bool operator==(const Rule&, const Rule&) = default;
};

inline constexpr std::size_t kMinBullets = 4;
inline constexpr std::size_t kMaxBullets = 6;
inline constexpr std::size_t kMaxBulletWords = 29;  // "fewer than 30 words"

/// Content-addressed id: hash of the class name and the bullet texts.
std::string rule_id(RuleClass cls, std::span<const std::string> bullets);

/// Rule with its id recomputed from content.
Rule with_content_id(Rule r);

/// Whitespace-token count, ignoring tokens made only of ASCII punctuation.
std::size_t count_words(std::string_view text);

enum class ViolationCode {
  BulletCountLow,
  BulletCountHigh,
  BulletWordLimit,
  EmptyBullet,
  InvalidClass,
  LineageShape,
  ScoreRange,
};

struct Violation {
  ViolationCode code;
  std::string message;
  std::optional<std::size_t> bullet;  // offending bullet index, if any
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationCode code) const noexcept;
};

/// Check every structural constraint on a rule. Never throws; an empty
/// report means the rule is valid.
ValidationReport validate_rule(const Rule& rule);

// JSON-lines serialization: id, class, bullets, generation, lineage, scores,
// program.
nlohmann::json to_json(const Rule& r);
Rule rule_from_json(const nlohmann::json& j);

std::vector<Rule> read_rules_jsonl(const std::filesystem::path& path);
void write_rules_jsonl(const std::filesystem::path& path, std::span<const Rule> rules);

}  // namespace vlsynth
