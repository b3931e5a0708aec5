#include "vlsynth/providers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <nlohmann/json.hpp>

#include "prompt_assets.hpp"
#include "vlsynth/errors.hpp"
#include "vlsynth/hash.hpp"
#include "vlsynth/rng.hpp"

namespace vlsynth {

std::string_view to_string(RequestKind k) noexcept {
  switch (k) {
    case RequestKind::Mutate: return "mutate";
    case RequestKind::Crossover: return "crossover";
    case RequestKind::Abstract: return "abstract";
    case RequestKind::Score: return "score";
    case RequestKind::Annotate: return "annotate";
    case RequestKind::Solve: return "solve";
    case RequestKind::Embed: return "embed";
  }
  return "?";
}

std::string_view prompt_template(std::string_view id) {
  for (const auto& a : detail::prompt_assets()) {
    if (a.id == id) return a.text;
  }
  throw PreconditionError("unknown prompt template '" + std::string(id) + "'");
}

std::vector<std::string> prompt_template_ids() {
  std::vector<std::string> out;
  for (const auto& a : detail::prompt_assets()) out.emplace_back(a.id);
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view template_for(RequestKind kind) {
  switch (kind) {
    case RequestKind::Mutate: return "mutate";
    case RequestKind::Crossover: return "crossover";
    case RequestKind::Abstract: return "abstract";
    case RequestKind::Score: return "score";
    case RequestKind::Annotate: return "annotate";
    case RequestKind::Solve: return "verify";
    case RequestKind::Embed: break;
  }
  throw PreconditionError("request kind '" + std::string(to_string(kind)) + "' has no prompt template");
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  return !s.empty() && ident_start(s.front()) && std::all_of(s.begin(), s.end(), ident_char);
}

struct Placeholder {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the closing brace
  std::string_view name;
};

// Next placeholder at or after `from`; end == 0 when there is none.
Placeholder next_placeholder(std::string_view text, std::size_t from) {
  for (std::size_t i = text.find('{', from); i != std::string_view::npos; i = text.find('{', i + 1)) {
    if (i + 1 < text.size() && text[i + 1] == '{') {
      const auto close = text.find("}}", i + 2);
      if (close != std::string_view::npos) {
        const auto name = trim(text.substr(i + 2, close - i - 2));
        if (is_identifier(name)) return {i, close + 2, name};
      }
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && ident_char(text[j])) ++j;
    if (j < text.size() && text[j] == '}' && is_identifier(text.substr(i + 1, j - i - 1))) {
      return {i, j + 1, text.substr(i + 1, j - i - 1)};
    }
  }
  return {};
}

}  // namespace

std::vector<std::string> template_variables(std::string_view text) {
  std::vector<std::string> out;
  for (auto p = next_placeholder(text, 0); p.end != 0; p = next_placeholder(text, p.end)) {
    if (std::find(out.begin(), out.end(), p.name) == out.end()) out.emplace_back(p.name);
  }
  return out;
}

std::string render_template(std::string_view text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  for (auto p = next_placeholder(text, 0); p.end != 0; p = next_placeholder(text, p.end)) {
    const auto it = bindings.find(p.name);
    if (it == bindings.end()) throw UnboundVariable("template variable '" + std::string(p.name) + "' is unbound");
    out.append(text.substr(pos, p.begin - pos));
    out.append(it->second);
    pos = p.end;
  }
  out.append(text.substr(pos));
  return out;
}

std::string render_prompt(RequestKind kind, const Bindings& bindings) {
  return render_template(prompt_template(template_for(kind)), bindings);
}

std::string format_bullets(const std::vector<std::string>& bullets) {
  std::string out;
  for (const auto& b : bullets) {
    if (!out.empty()) out += '\n';
    out += "- " + b;
  }
  return out;
}

std::string parse_tagged(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto c = text.find(close);
  const auto o = c == std::string_view::npos ? c : text.rfind(open, c);
  if (c == std::string_view::npos || o == std::string_view::npos) {
    throw MissingTag("response has no <" + std::string(tag) + "> section");
  }
  return std::string(trim(text.substr(o + open.size(), c - o - open.size())));
}

std::vector<std::string> parse_bullets(std::string_view content) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    const auto line = trim(content.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    if (line.starts_with("- ") || line == "-") {
      out.emplace_back(trim(line.substr(1)));
    } else if (out.empty()) {
      throw MalformedBullets("text before the first bullet: '" + std::string(line) + "'");
    } else {
      out.back() += ' ';
      out.back() += line;
    }
  }
  if (out.empty()) throw MalformedBullets("no bullets found");
  return out;
}

namespace {

int parse_score_value(std::string_view text, std::string_view what) {
  const auto s = trim(text);
  const auto digit = std::find_if(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  int v = 0;
  if (digit == s.end() || std::from_chars(&*digit, s.data() + s.size(), v).ec != std::errc{}) {
    throw MissingScore("no numeric " + std::string(what) + " in '" + std::string(s) + "'");
  }
  return v;
}

int labelled_score(std::string_view block, std::string_view label) {
  const auto at = block.find(label);
  if (at == std::string_view::npos) throw MissingScore("missing '" + std::string(label) + "' score");
  auto rest = block.substr(at + label.size());
  const auto colon = rest.find(':');
  if (colon != std::string_view::npos) rest = rest.substr(colon + 1);
  const auto nl = rest.find('\n');
  return parse_score_value(rest.substr(0, nl), label);
}

}  // namespace

ScoreTriple parse_score_response(std::string_view text) {
  ScoreTriple s;
  s.format = parse_score_value(parse_tagged(text, "format_score"), "format score");
  s.content = parse_score_value(parse_tagged(text, "content_quality"), "content quality");
  s.feasibility = parse_score_value(parse_tagged(text, "feasibility"), "feasibility");
  if (!s.in_range()) throw MissingScore("score outside 1-5");
  return s;
}

Annotation parse_final_scores(std::string_view text) {
  const auto block = parse_tagged(text, "final_scores");
  Annotation a;
  a.reasonableness = labelled_score(block, "Reasonableness");
  a.readability = labelled_score(block, "Readability");
  if (a.reasonableness < 1 || a.reasonableness > 5 || a.readability < 1 || a.readability > 5) {
    throw MissingScore("annotation score outside 1-5");
  }
  return a;
}

std::optional<std::string> parse_boxed(std::string_view text) {
  const auto at = text.rfind("\\boxed{");
  if (at == std::string_view::npos) return std::nullopt;
  const auto start = at + 7;
  const auto end = text.find('}', start);
  if (end == std::string_view::npos) return std::nullopt;
  return std::string(trim(text.substr(start, end - start)));
}

// ---------------------------------------------------------------------------

std::vector<double> StubEmbedder::embed(const Rule& rule) {
  std::vector<double> v(dim_, 0.0);
  for (const auto& bullet : rule.bullets) {
    std::string word;
    auto flush = [&] {
      if (word.empty()) return;
      const auto h = mix64(fnv1a64(word));
      v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
      word.clear();
    };
    for (char c : bullet) {
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') {
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      } else {
        flush();
      }
    }
    flush();
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) {
    v[0] = 1.0;
    return v;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::string RandomSolver::solve(const SolveRequest& req, std::uint64_t seed) {
  if (req.labels.empty()) throw PreconditionError("puzzle " + req.puzzle_id + " has no options");
  Rng rng(seed);
  return req.labels[rng.below(req.labels.size())];
}

std::string OracleSolver::solve(const SolveRequest& req, std::uint64_t) {
  const auto it = key_.find(req.puzzle_id);
  if (it == key_.end()) throw ProviderError("oracle has no answer for " + req.puzzle_id);
  return it->second;
}

std::string AdversarialSolver::solve(const SolveRequest& req, std::uint64_t) {
  const auto it = key_.find(req.puzzle_id);
  if (it == key_.end()) throw ProviderError("adversary has no answer for " + req.puzzle_id);
  for (const auto& l : req.labels) {
    if (l != it->second) return l;
  }
  throw PreconditionError("puzzle " + req.puzzle_id + " has no wrong option");
}

}  // namespace vlsynth
