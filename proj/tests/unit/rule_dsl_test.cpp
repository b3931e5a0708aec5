#include <doctest.h>

#include "oracles.hpp"
#include "vlsynth/rule_dsl.hpp"

using namespace vlsynth;

namespace {

constexpr std::string_view kDoubling = R"(# count doubles every other panel
layout seq5;
entity square solid medium;
progress count geometric x2 every 2 start 1;
violate count_off; violate wrong_fill; violate order_swap;
)";

}  // namespace

TEST_CASE("parse builds the expected AST") {
  const auto p = parse_rule_program(kDoubling);
  CHECK(p.layout == Layout::Sequence5);
  CHECK(p.entity == EntitySpec{ShapeKind::Square, Fill::Solid, SizeClass::Medium});
  REQUIRE(p.progressions.size() == 1);
  CHECK(p.progressions[0].attribute == Attribute::Count);
  CHECK(p.progressions[0].schedule == Schedule{Geometric{2.0, 2}});
  CHECK(p.progressions[0].start == AttributeValue{1.0});
  CHECK(p.violations ==
        std::vector<ViolationRecipe>{ViolationRecipe::CountOff, ViolationRecipe::WrongFill, ViolationRecipe::OrderSwap});
}

TEST_CASE("print and parse round-trip on every fixture program") {
  for (const auto& [name, text] : oracle::program_files(VLSYNTH_FIXTURES_DIR "/programs")) {
    CAPTURE(name);
    const auto p = parse_rule_program(text);
    const auto printed = print_rule_program(p);
    CHECK(parse_rule_program(printed) == p);
    CHECK(print_rule_program(parse_rule_program(printed)) == printed);
  }
}

TEST_CASE("syntax errors carry the position of the offending token") {
  try {
    parse_rule_program("layout seq5;\nentity circle solid;\nprogress count wobble 1 start 1;\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 16);
    CHECK(e.expected().find("schedule") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_rule_program("layout seq5 entity circle;"), ParseError);
  CHECK_THROWS_AS(parse_rule_program("layout hexagon;"), ParseError);
  CHECK_THROWS_AS(parse_rule_program("layout seq5; entity circle solid; progress count geometric 2 start 1;"),
                  ParseError);
}

TEST_CASE("semantic invariants are enforced") {
  const std::string head = "layout seq5; entity circle solid;\n";
  auto sem = [&](const std::string& body) { return head + body; };
  CHECK_THROWS_AS(parse_rule_program(sem("violate count_off; violate wrong_fill; violate wrong_shape;")),
                  SemanticError);
  CHECK_THROWS_AS(parse_rule_program(sem("progress count arithmetic 1 start 1; violate count_off;")),
                  SemanticError);
  CHECK_THROWS_AS(parse_rule_program(sem("progress count arithmetic 1 start 1; progress count arithmetic 2 start 1;"
                                         "violate count_off; violate wrong_fill; violate wrong_shape;")),
                  SemanticError);
  CHECK_THROWS_AS(parse_rule_program(sem("progress rotation_deg arithmetic 45 start 0;"
                                         "violate count_off; violate wrong_fill; violate wrong_shape;")),
                  SemanticError);
  CHECK_THROWS_AS(parse_rule_program(sem("progress shading toggle start 1;"
                                         "violate shading_off; violate wrong_fill; violate wrong_shape;")),
                  SemanticError);
  CHECK_THROWS_AS(parse_rule_program(sem("progress parallel_line_groups arithmetic 1 start 1;"
                                         "violate lines_off; violate wrong_fill; violate wrong_shape;")),
                  SemanticError);
  CHECK_THROWS_AS(parse_rule_program(sem("progress count arithmetic 0 start 2;"
                                         "violate order_swap; violate wrong_fill; violate wrong_shape;")),
                  SemanticError);
  CHECK_THROWS_AS(parse_rule_program(sem("progress count arithmetic -1 start 2;"
                                         "violate count_off; violate wrong_fill; violate wrong_shape;")),
                  SemanticError);

  const auto outcome = try_parse_rule_program(sem("violate count_off;"));
  CHECK_FALSE(outcome.ok());
  CHECK(outcome.error_kind == "SemanticError");
  CHECK(try_parse_rule_program("nonsense").error_kind == "ParseError");
  CHECK(try_parse_rule_program(kDoubling).ok());
}

TEST_CASE("progression values match the schedule definitions") {
  AttributeProgression geo{Attribute::Count, Geometric{2.0, 2}, 1.0};
  const auto v = progression_values(geo, 6);
  const std::vector<double> want = {1, 1, 2, 2, 4, 4};
  for (int i = 0; i < 6; ++i) {
    CHECK(scalar(v[static_cast<std::size_t>(i)]) == want[static_cast<std::size_t>(i)]);
    CHECK(scalar(v[static_cast<std::size_t>(i)]) == oracle::scheduled_scalar(geo, i));
  }

  AttributeProgression toggle{Attribute::Shading, Toggle{}, 0.25};
  CHECK(scalar(progression_values(toggle, 3)[1]) == 0.75);

  AttributeProgression shift{Attribute::Position, Shift{3, -2}, Offset{-10, 4}};
  CHECK(offset(progression_values(shift, 5)[4]) == Offset{2, -4});

  AttributeProgression negative{Attribute::Count, Arithmetic{-1}, 2.0};
  CHECK_THROWS_AS(progression_values(negative, 5), DomainError);
  AttributeProgression fractional{Attribute::Count, Geometric{1.5, 1}, 1.0};
  CHECK_THROWS_AS(progression_values(fractional, 5), DomainError);
  AttributeProgression dark{Attribute::Shading, Arithmetic{0.3}, 0.5};
  CHECK_THROWS_AS(progression_values(dark, 5), DomainError);
}

TEST_CASE("recipe targets and order_swap selection") {
  CHECK(recipe_attribute(ViolationRecipe::CountOff) == Attribute::Count);
  CHECK(recipe_attribute(ViolationRecipe::LinesOff) == Attribute::ParallelLineGroups);
  CHECK_FALSE(recipe_attribute(ViolationRecipe::WrongFill).has_value());
  CHECK_FALSE(recipe_attribute(ViolationRecipe::OrderSwap).has_value());

  const auto p = parse_rule_program(
      "layout seq5; entity circle solid; progress shading toggle start 1; progress count arithmetic 1 start 1;"
      "violate order_swap; violate count_off; violate shading_off;");
  REQUIRE(order_swap_target(p) != nullptr);
  CHECK(order_swap_target(p)->attribute == Attribute::Shading);
}

TEST_CASE("numbers print in shortest round-trip form") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-0.2) == "-0.2");
  CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
}
