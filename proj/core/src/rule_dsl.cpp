#include "vlsynth/rule_dsl.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <utility>

namespace vlsynth {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), end);
}

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Layout, 4> kLayouts = {{
    {Layout::Sequence5, "seq5"},
    {Layout::Grid3x3, "grid3x3"},
    {Layout::AnalogyPair, "analogy"},
    {Layout::TwoGroupSplit, "twogroup"},
}};

constexpr NameTable<ShapeKind, 6> kKinds = {{
    {ShapeKind::Circle, "circle"},
    {ShapeKind::Square, "square"},
    {ShapeKind::Triangle, "triangle"},
    {ShapeKind::LineGroup, "line_group"},
    {ShapeKind::StickFigure, "stick_figure"},
    {ShapeKind::Composite, "composite"},
}};

constexpr NameTable<SizeClass, 3> kSizes = {{
    {SizeClass::Small, "small"},
    {SizeClass::Medium, "medium"},
    {SizeClass::Large, "large"},
}};

constexpr NameTable<Fill, 2> kFills = {{
    {Fill::Solid, "solid"},
    {Fill::Hollow, "hollow"},
}};

constexpr NameTable<Attribute, 5> kAttributes = {{
    {Attribute::Count, "count"},
    {Attribute::RotationDeg, "rotation_deg"},
    {Attribute::Position, "position"},
    {Attribute::Shading, "shading"},
    {Attribute::ParallelLineGroups, "parallel_line_groups"},
}};

constexpr NameTable<ViolationRecipe, 8> kRecipes = {{
    {ViolationRecipe::CountOff, "count_off"},
    {ViolationRecipe::RotationOff, "rotation_off"},
    {ViolationRecipe::PositionOff, "position_off"},
    {ViolationRecipe::ShadingOff, "shading_off"},
    {ViolationRecipe::LinesOff, "lines_off"},
    {ViolationRecipe::OrderSwap, "order_swap"},
    {ViolationRecipe::WrongFill, "wrong_fill"},
    {ViolationRecipe::WrongShape, "wrong_shape"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E v) {
  for (const auto& [k, n] : table) {
    if (k == v) return n;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> lookup(const NameTable<E, N>& table, std::string_view s) {
  for (const auto& [k, n] : table) {
    if (n == s) return k;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string alternatives(const NameTable<E, N>& table) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += i + 1 == N ? " or " : ", ";
    out += '\'';
    out += table[i].second;
    out += '\'';
  }
  return out;
}

enum class TokKind { Word, Number, Semicolon, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string_view text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) {
      t.kind = TokKind::End;
      return t;
    }
    const char c = src_[pos_];
    const std::size_t start = pos_;
    if (c == ';') {
      advance();
      t.kind = TokKind::Semicolon;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && is_word_char(src_[pos_])) advance();
      t.kind = TokKind::Word;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      advance();
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
        advance();
      }
      t.kind = TokKind::Number;
    } else {
      throw ParseError(line_, col_, "statement keyword, number or ';' (found '" + std::string(1, c) + "')");
    }
    t.text = src_.substr(start, pos_ - start);
    return t;
  }

 private:
  static bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { cur_ = lex_.next(); }

  RuleProgram parse() {
    if (cur_.kind == TokKind::End) {
      throw ParseError(cur_.line, cur_.column, "statement keyword ('layout', 'entity', 'progress' or 'violate')");
    }
    bool have_layout = false;
    bool have_entity = false;
    RuleProgram prog;
    while (cur_.kind != TokKind::End) {
      const Token kw = expect(TokKind::Word, "statement keyword ('layout', 'entity', 'progress' or 'violate')");
      if (kw.text == "layout") {
        if (have_layout) throw SemanticError("layout declared more than once");
        prog.layout = expect_enum(kLayouts, "layout");
        have_layout = true;
      } else if (kw.text == "entity") {
        if (have_entity) throw SemanticError("entity declared more than once");
        prog.entity.kind = expect_enum(kKinds, "shape kind");
        prog.entity.fill = expect_enum(kFills, "fill");
        if (cur_.kind == TokKind::Word) prog.entity.size = expect_enum(kSizes, "size class");
        have_entity = true;
      } else if (kw.text == "progress") {
        prog.progressions.push_back(parse_progression());
      } else if (kw.text == "violate") {
        prog.violations.push_back(expect_enum(kRecipes, "violation recipe"));
      } else {
        throw ParseError(kw.line, kw.column, "statement keyword ('layout', 'entity', 'progress' or 'violate')");
      }
      expect(TokKind::Semicolon, "';'");
    }
    if (!have_layout) throw SemanticError("missing layout statement");
    if (!have_entity) throw SemanticError("missing entity statement");
    return prog;
  }

 private:
  AttributeProgression parse_progression() {
    AttributeProgression p;
    p.attribute = expect_enum(kAttributes, "attribute");
    const Token sched = expect(TokKind::Word, "schedule ('arithmetic', 'geometric', 'toggle' or 'shift')");
    if (sched.text == "arithmetic") {
      p.schedule = Arithmetic{expect_number("arithmetic step")};
    } else if (sched.text == "geometric") {
      const Token f = expect(TokKind::Word, "geometric factor written as x<number>");
      std::optional<double> factor;
      if (f.text.size() > 1 && f.text.front() == 'x') factor = to_double(f.text.substr(1));
      if (!factor) throw ParseError(f.line, f.column, "geometric factor written as x<number>");
      expect_word("every");
      const Token k = cur_;
      const double every = expect_number("every-k period");
      if (every != std::floor(every)) throw ParseError(k.line, k.column, "integer every-k period");
      p.schedule = Geometric{*factor, static_cast<int>(every)};
    } else if (sched.text == "toggle") {
      p.schedule = Toggle{};
    } else if (sched.text == "shift") {
      const double dx = expect_number("shift dx");
      const double dy = expect_number("shift dy");
      p.schedule = Shift{dx, dy};
    } else {
      throw ParseError(sched.line, sched.column, "schedule ('arithmetic', 'geometric', 'toggle' or 'shift')");
    }
    expect_word("start");
    const double s0 = expect_number("start value");
    if (p.attribute == Attribute::Position) {
      const double s1 = expect_number("start dy (position starts take two numbers)");
      p.start = Offset{s0, s1};
    } else {
      p.start = s0;
    }
    return p;
  }

  Token expect(TokKind kind, const std::string& what) {
    if (cur_.kind != kind) throw ParseError(cur_.line, cur_.column, what);
    Token t = cur_;
    cur_ = lex_.next();
    return t;
  }

  void expect_word(std::string_view w) {
    if (cur_.kind != TokKind::Word || cur_.text != w) {
      throw ParseError(cur_.line, cur_.column, "'" + std::string(w) + "'");
    }
    cur_ = lex_.next();
  }

  double expect_number(const std::string& what) {
    if (cur_.kind != TokKind::Number) throw ParseError(cur_.line, cur_.column, what);
    auto v = to_double(cur_.text);
    if (!v) throw ParseError(cur_.line, cur_.column, what);
    cur_ = lex_.next();
    return *v;
  }

  template <typename E, std::size_t N>
  E expect_enum(const NameTable<E, N>& table, const std::string& what) {
    if (cur_.kind == TokKind::Word) {
      if (auto v = lookup(table, cur_.text)) {
        cur_ = lex_.next();
        return *v;
      }
    }
    throw ParseError(cur_.line, cur_.column, what + " (" + alternatives(table) + ")");
  }

  Lexer lex_;
  Token cur_;
};

bool is_constant(const AttributeProgression& p) {
  return std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Arithmetic>) return s.step == 0.0;
        if constexpr (std::is_same_v<S, Geometric>) return s.factor == 1.0;
        if constexpr (std::is_same_v<S, Shift>) return s.dx == 0.0 && s.dy == 0.0;
        return false;
      },
      p.schedule);
}

bool values_equal(const AttributeValue& a, const AttributeValue& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<double>(a)) return std::abs(std::get<double>(a) - std::get<double>(b)) < 1e-9;
  const auto& oa = std::get<Offset>(a);
  const auto& ob = std::get<Offset>(b);
  return std::abs(oa.dx - ob.dx) < 1e-9 && std::abs(oa.dy - ob.dy) < 1e-9;
}

}  // namespace

ParseError::ParseError(int line, int column, std::string expected)
    : Error("ParseError", std::to_string(line) + ":" + std::to_string(column) + ": expected " + expected),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

const AttributeProgression* RuleProgram::find(Attribute a) const noexcept {
  for (const auto& p : progressions) {
    if (p.attribute == a) return &p;
  }
  return nullptr;
}

std::string_view to_string(Layout v) noexcept { return name_of(kLayouts, v); }
std::string_view to_string(ShapeKind v) noexcept { return name_of(kKinds, v); }
std::string_view to_string(SizeClass v) noexcept { return name_of(kSizes, v); }
std::string_view to_string(Fill v) noexcept { return name_of(kFills, v); }
std::string_view to_string(Attribute v) noexcept { return name_of(kAttributes, v); }
std::string_view to_string(ViolationRecipe v) noexcept { return name_of(kRecipes, v); }

double scalar(const AttributeValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw DomainError("expected a scalar attribute value");
}

Offset offset(const AttributeValue& v) {
  if (const auto* o = std::get_if<Offset>(&v)) return *o;
  throw DomainError("expected a position offset");
}

bool is_count_like(Attribute a) noexcept {
  return a == Attribute::Count || a == Attribute::ParallelLineGroups;
}

std::optional<Attribute> recipe_attribute(ViolationRecipe r) noexcept {
  switch (r) {
    case ViolationRecipe::CountOff: return Attribute::Count;
    case ViolationRecipe::RotationOff: return Attribute::RotationDeg;
    case ViolationRecipe::PositionOff: return Attribute::Position;
    case ViolationRecipe::ShadingOff: return Attribute::Shading;
    case ViolationRecipe::LinesOff: return Attribute::ParallelLineGroups;
    default: return std::nullopt;
  }
}

AttributeValue progression_value_at(const AttributeProgression& p, int i) {
  return std::visit(
      [&](const auto& s) -> AttributeValue {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Shift>) {
          const Offset o = offset(p.start);
          return Offset{o.dx + i * s.dx, o.dy + i * s.dy};
        } else {
          const double start = scalar(p.start);
          if constexpr (std::is_same_v<S, Arithmetic>) {
            return start + i * s.step;
          } else if constexpr (std::is_same_v<S, Geometric>) {
            return start * std::pow(s.factor, i / s.every_k);
          } else {
            return (i % 2 == 0) ? start : 1.0 - start;
          }
        }
      },
      p.schedule);
}

std::vector<AttributeValue> progression_values(const AttributeProgression& p, int n) {
  if (n < 1) throw DomainError("panel count must be at least 1");
  if (const auto* g = std::get_if<Geometric>(&p.schedule); g && g->every_k < 1) {
    throw DomainError("geometric every_k must be >= 1");
  }
  std::vector<AttributeValue> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    AttributeValue v = progression_value_at(p, i);
    if (is_count_like(p.attribute)) {
      double c = scalar(v);
      if (c < -1e-9) {
        throw DomainError(std::string(to_string(p.attribute)) + " would be negative (" +
                          format_number(c) + ") at panel " + std::to_string(i));
      }
      const double r = std::round(c);
      if (std::abs(c - r) > 1e-9) {
        throw DomainError(std::string(to_string(p.attribute)) + " would be fractional (" +
                          format_number(c) + ") at panel " + std::to_string(i));
      }
      v = r == 0.0 ? 0.0 : r;
    } else if (p.attribute == Attribute::Shading) {
      const double s = scalar(v);
      if (s < -1e-9 || s > 1.0 + 1e-9) {
        throw DomainError("shading leaves [0,1] (" + format_number(s) + ") at panel " + std::to_string(i));
      }
    }
    out.push_back(v);
  }
  return out;
}

const AttributeProgression* order_swap_target(const RuleProgram& program) {
  for (const auto& p : program.progressions) {
    const auto last = progression_value_at(p, 4);
    for (int i = 3; i >= 0; --i) {
      if (!values_equal(progression_value_at(p, i), last)) return &p;
    }
  }
  return nullptr;
}

void check_semantics(const RuleProgram& prog) {
  if (prog.progressions.empty()) throw SemanticError("needs at least one progression");
  if (prog.violations.size() < kDistractorCount) {
    throw SemanticError("needs >= 3 distractor recipes (found " + std::to_string(prog.violations.size()) + ")");
  }
  std::set<Attribute> seen;
  for (const auto& p : prog.progressions) {
    const auto attr = std::string(to_string(p.attribute));
    if (!seen.insert(p.attribute).second) throw SemanticError("attribute " + attr + " governed twice");
    const bool is_shift = std::holds_alternative<Shift>(p.schedule);
    if ((p.attribute == Attribute::Position) != is_shift) {
      throw SemanticError("position progressions use the shift schedule, and shift applies only to position");
    }
    if (const auto* g = std::get_if<Geometric>(&p.schedule)) {
      if (!is_count_like(p.attribute)) throw SemanticError("geometric schedule applies only to count-like attributes");
      if (!(g->factor > 0.0)) throw SemanticError("geometric factor must be positive");
      if (g->every_k < 1) throw SemanticError("geometric every_k must be >= 1");
    }
    if (std::holds_alternative<Toggle>(p.schedule) && p.attribute != Attribute::Shading &&
        p.attribute != Attribute::Count) {
      throw SemanticError("toggle schedule applies only to shading or count");
    }
    try {
      (void)progression_values(p, 5);
    } catch (const DomainError& e) {
      throw SemanticError(e.what());
    }
  }
  if (prog.governs(Attribute::Count) && prog.governs(Attribute::ParallelLineGroups)) {
    throw SemanticError("count and parallel_line_groups cannot both be governed");
  }
  if (prog.governs(Attribute::ParallelLineGroups) && prog.entity.kind != ShapeKind::LineGroup) {
    throw SemanticError("parallel_line_groups requires entity line_group");
  }
  for (const auto r : prog.violations) {
    const auto name = std::string(to_string(r));
    if (auto attr = recipe_attribute(r)) {
      if (!prog.governs(*attr)) {
        throw SemanticError("recipe " + name + " perturbs " + std::string(to_string(*attr)) +
                            ", which no progression governs");
      }
    } else if (r == ViolationRecipe::OrderSwap) {
      if (!order_swap_target(prog)) throw SemanticError("order_swap needs a non-constant progression");
    } else if (r == ViolationRecipe::WrongFill) {
      if (prog.governs(Attribute::Shading)) throw SemanticError("wrong_fill conflicts with a shading progression");
    }
  }
}

std::vector<std::string> program_warnings(const RuleProgram& prog) {
  std::vector<std::string> out;
  if (prog.violations.size() > kDistractorCount) {
    out.push_back("only the first 3 violation recipes are rendered");
  }
  std::set<ViolationRecipe> recipes;
  for (auto r : prog.violations) {
    if (!recipes.insert(r).second) {
      out.push_back("duplicate violation recipe " + std::string(to_string(r)));
    }
  }
  for (const auto& p : prog.progressions) {
    if (is_constant(p)) out.push_back("progression on " + std::string(to_string(p.attribute)) + " is constant");
  }
  return out;
}

RuleProgram parse_rule_program(std::string_view text) {
  RuleProgram prog = Parser(text).parse();
  check_semantics(prog);
  return prog;
}

ParseOutcome try_parse_rule_program(std::string_view text) {
  ParseOutcome out;
  try {
    out.program = parse_rule_program(text);
    out.warnings = program_warnings(*out.program);
  } catch (const Error& e) {
    out.error_kind = e.kind();
    out.error = e.what();
  }
  return out;
}

std::string print_rule_program(const RuleProgram& prog) {
  std::string out;
  out += "layout ";
  out += to_string(prog.layout);
  out += ";\nentity ";
  out += to_string(prog.entity.kind);
  out += ' ';
  out += to_string(prog.entity.fill);
  out += ' ';
  out += to_string(prog.entity.size);
  out += ";\n";
  for (const auto& p : prog.progressions) {
    out += "progress ";
    out += to_string(p.attribute);
    out += ' ';
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Arithmetic>) {
            out += "arithmetic " + format_number(s.step);
          } else if constexpr (std::is_same_v<S, Geometric>) {
            out += "geometric x" + format_number(s.factor) + " every " + std::to_string(s.every_k);
          } else if constexpr (std::is_same_v<S, Toggle>) {
            out += "toggle";
          } else {
            out += "shift " + format_number(s.dx) + " " + format_number(s.dy);
          }
        },
        p.schedule);
    out += " start ";
    if (const auto* o = std::get_if<Offset>(&p.start)) {
      out += format_number(o->dx) + " " + format_number(o->dy);
    } else {
      out += format_number(std::get<double>(p.start));
    }
    out += ";\n";
  }
  for (auto r : prog.violations) {
    out += "violate ";
    out += to_string(r);
    out += ";\n";
  }
  return out;
}

}  // namespace vlsynth
