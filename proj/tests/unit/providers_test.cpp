#include <doctest.h>

#include <set>

#include "vlsynth/errors.hpp"
#include "vlsynth/providers.hpp"

using namespace vlsynth;

TEST_CASE("every request kind with a template renders once bound") {
  for (auto kind : {RequestKind::Mutate, RequestKind::Crossover, RequestKind::Abstract, RequestKind::Score,
                    RequestKind::Annotate, RequestKind::Solve}) {
    CAPTURE(to_string(kind));
    const auto text = prompt_template(template_for(kind));
    Bindings b;
    for (const auto& v : template_variables(text)) b[v] = "<" + v + ">";
    const auto out = render_prompt(kind, b);
    CHECK(template_variables(out).empty());
    if (!b.empty()) {
      b.erase(b.begin());
      CHECK_THROWS_AS(render_prompt(kind, b), UnboundVariable);
    }
  }
  CHECK_THROWS_AS(template_for(RequestKind::Embed), PreconditionError);
  CHECK_THROWS_AS(prompt_template("no-such-template"), PreconditionError);
  const auto ids = prompt_template_ids();
  CHECK(std::is_sorted(ids.begin(), ids.end()));
}

TEST_CASE("placeholders in all three forms are substituted in one pass") {
  const std::string t = "a {X} b {{Y}} c {{ z }} d {not closed e {1bad} {X}";
  CHECK(template_variables(t) == std::vector<std::string>{"X", "Y", "z"});
  CHECK(render_template(t, {{"X", "{Y}"}, {"Y", "2"}, {"z", "3"}}) == "a {Y} b 2 c 3 d {not closed e {1bad} {Y}");
  CHECK(format_bullets({"one", "two"}) == "- one\n- two");
}

TEST_CASE("tagged sections and bullets") {
  CHECK(parse_tagged("x <r> <r>\n inner </r> </r>", "r") == "inner");
  CHECK_THROWS_AS(parse_tagged("<r> open only", "r"), MissingTag);
  CHECK(parse_bullets("- first\n  continued\n\n- second\n-") ==
        std::vector<std::string>{"first continued", "second", ""});
  CHECK_THROWS_AS(parse_bullets("preamble\n- a"), MalformedBullets);
  CHECK_THROWS_AS(parse_bullets("  \n"), MalformedBullets);
}

TEST_CASE("score and annotation responses") {
  const auto s = parse_score_response(
      "<format_score>4</format_score> <content_quality> 5/5 </content_quality><feasibility>score: 3</feasibility>");
  CHECK(s == ScoreTriple{4, 5, 3});
  CHECK_THROWS_AS(parse_score_response("<format_score>4</format_score>"), MissingTag);
  CHECK_THROWS_AS(parse_score_response("<format_score>9</format_score><content_quality>5</content_quality>"
                                       "<feasibility>3</feasibility>"),
                  MissingScore);
  CHECK_THROWS_AS(parse_score_response("<format_score>n/a</format_score><content_quality>5</content_quality>"
                                       "<feasibility>3</feasibility>"),
                  MissingScore);

  CHECK(parse_final_scores("reasoning...\n<final_scores>\nReasonableness: 4\nReadability: 2\n</final_scores>") ==
        Annotation{4, 2});
  CHECK_THROWS_AS(parse_final_scores("<final_scores>Readability: 2</final_scores>"), MissingScore);
}

TEST_CASE("boxed answers take the last box") {
  CHECK(parse_boxed("first \\boxed{A} then \\boxed{ C }") == std::optional<std::string>("C"));
  CHECK_FALSE(parse_boxed("no box here").has_value());
  CHECK_FALSE(parse_boxed("\\boxed{unterminated").has_value());
}

TEST_CASE("stub solvers") {
  SolveRequest req{"q", "p", {"A", "B", "C", "D"}, ""};
  RandomSolver r;
  CHECK(r.solve(req, 3) == r.solve(req, 3));
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 64; ++s) seen.insert(r.solve(req, s));
  CHECK(seen == std::set<std::string>{"A", "B", "C", "D"});
  CHECK_THROWS_AS(r.solve(SolveRequest{"q", "p", {}, ""}, 1), PreconditionError);

  OracleSolver o(AnswerKey{{"q", "B"}});
  CHECK(o.solve(req, 0) == "B");
  CHECK_THROWS_AS(o.solve(SolveRequest{"other", "p", {"A"}, ""}, 0), ProviderError);
  AdversarialSolver a(AnswerKey{{"q", "A"}});
  CHECK(a.solve(req, 0) == "B");
}

TEST_CASE("base64 and stub scorer") {
  CHECK(base64_encode("") == "");
  CHECK(base64_encode("f") == "Zg==");
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
  StubAnnotator ann({3, 5});
  CHECK(ann.annotate({}) == Annotation{3, 5});
}
