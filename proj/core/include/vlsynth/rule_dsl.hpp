#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vlsynth/errors.hpp"

// Rule programs: the machine-executable counterpart of a rule's bullets.
//
//   layout seq5;
//   entity circle solid;
//   progress count geometric x2 every 2 start 1;
//   violate count_off; violate wrong_fill; violate order_swap;
//
// The full grammar is in docs/rule_dsl.ebnf.

namespace vlsynth {

enum class Layout { Sequence5, Grid3x3, AnalogyPair, TwoGroupSplit };
enum class ShapeKind { Circle, Square, Triangle, LineGroup, StickFigure, Composite };
enum class SizeClass { Small, Medium, Large };
enum class Fill { Solid, Hollow };

struct EntitySpec {
  ShapeKind kind = ShapeKind::Circle;
  Fill fill = Fill::Solid;
  SizeClass size = SizeClass::Medium;

  friend bool operator==(const EntitySpec&, const EntitySpec&) = default;
};

enum class Attribute { Count, RotationDeg, Position, Shading, ParallelLineGroups };

// Position offsets are in pixels of a 256-pixel reference panel.
struct Offset {
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

using AttributeValue = std::variant<double, Offset>;

struct Arithmetic {
  double step = 0.0;
  friend bool operator==(const Arithmetic&, const Arithmetic&) = default;
};
struct Geometric {
  double factor = 1.0;
  int every_k = 1;
  friend bool operator==(const Geometric&, const Geometric&) = default;
};
struct Toggle {
  friend bool operator==(const Toggle&, const Toggle&) = default;
};
struct Shift {
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(const Shift&, const Shift&) = default;
};

using Schedule = std::variant<Arithmetic, Geometric, Toggle, Shift>;

struct AttributeProgression {
  Attribute attribute = Attribute::Count;
  Schedule schedule = Arithmetic{};
  AttributeValue start = 0.0;

  friend bool operator==(const AttributeProgression&, const AttributeProgression&) = default;
};

enum class ViolationRecipe {
  CountOff,
  RotationOff,
  PositionOff,
  ShadingOff,
  LinesOff,
  OrderSwap,
  WrongFill,
  WrongShape,
};

struct RuleProgram {
  Layout layout = Layout::Sequence5;
  EntitySpec entity;
  std::vector<AttributeProgression> progressions;
  std::vector<ViolationRecipe> violations;

  friend bool operator==(const RuleProgram&, const RuleProgram&) = default;

  const AttributeProgression* find(Attribute a) const noexcept;
  bool governs(Attribute a) const noexcept { return find(a) != nullptr; }
};

inline constexpr std::size_t kDistractorCount = 3;

class ParseError : public Error {
 public:
  ParseError(int line, int column, std::string expected);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  int line_;
  int column_;
  std::string expected_;
};

/// Parse and semantically check a program. Throws ParseError on the first
/// syntax violation and SemanticError when the AST breaks an invariant.
RuleProgram parse_rule_program(std::string_view text);

/// Canonical text form; parse_rule_program(print_rule_program(p)) == p.
std::string print_rule_program(const RuleProgram& program);

/// Throws SemanticError naming the first broken invariant.
void check_semantics(const RuleProgram& program);

/// Non-fatal issues (unused extra recipes, constant progressions, ...).
std::vector<std::string> program_warnings(const RuleProgram& program);

struct ParseOutcome {
  std::optional<RuleProgram> program;
  std::string error_kind;  // "ParseError" / "SemanticError" / empty
  std::string error;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return program.has_value(); }
};

ParseOutcome try_parse_rule_program(std::string_view text);

/// Values of a progression over panels 0..n-1. Throws DomainError when a
/// count-like value would be negative or fractional, or shading leaves [0,1].
std::vector<AttributeValue> progression_values(const AttributeProgression& p, int n);

/// Value at panel index i without domain checks (used for extrapolation).
AttributeValue progression_value_at(const AttributeProgression& p, int i);

/// Attribute a recipe perturbs; nullopt for entity-level recipes
/// (wrong_fill, wrong_shape) and for order_swap, which targets the first
/// non-constant progression.
std::optional<Attribute> recipe_attribute(ViolationRecipe r) noexcept;

/// Progression order_swap acts on: the first one whose panel-5 value differs
/// from an earlier panel. nullptr if none.
const AttributeProgression* order_swap_target(const RuleProgram& program);

bool is_count_like(Attribute a) noexcept;

std::string_view to_string(Layout v) noexcept;
std::string_view to_string(ShapeKind v) noexcept;
std::string_view to_string(SizeClass v) noexcept;
std::string_view to_string(Fill v) noexcept;
std::string_view to_string(Attribute v) noexcept;
std::string_view to_string(ViolationRecipe v) noexcept;

/// Shortest round-tripping decimal form, as the printer writes numbers.
std::string format_number(double v);

double scalar(const AttributeValue& v);
Offset offset(const AttributeValue& v);

}  // namespace vlsynth
