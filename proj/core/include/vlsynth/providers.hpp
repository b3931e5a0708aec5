#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vlsynth/rule.hpp"

namespace vlsynth {

enum class RequestKind { Mutate, Crossover, Abstract, Score, Annotate, Solve, Embed };
std::string_view to_string(RequestKind k) noexcept;

using Bindings = std::map<std::string, std::string, std::less<>>;

// ---------------------------------------------------------------------------
// Prompt templates

/// Stored template text by id ("mutate", "crossover", "score", "annotate",
/// "verify", ...). Throws PreconditionError for unknown ids.
std::string_view prompt_template(std::string_view id);
std::vector<std::string> prompt_template_ids();

/// Template id used for a request kind. Embed has none.
std::string_view template_for(RequestKind kind);

/// Placeholder names in order of first appearance. Recognized forms are
/// {NAME}, {{NAME}} and {{ name }}.
std::vector<std::string> template_variables(std::string_view text);

/// Substitute every placeholder in one pass; substituted values are not
/// rescanned. Throws UnboundVariable naming the first missing binding.
std::string render_template(std::string_view text, const Bindings& bindings);
std::string render_prompt(RequestKind kind, const Bindings& bindings);

/// Bullets as the templates expect them: one "- " line each.
std::string format_bullets(const std::vector<std::string>& bullets);

// ---------------------------------------------------------------------------
// Response parsing

/// Content between the first closing </tag> and the nearest <tag> before
/// it, trimmed. Throws MissingTag.
std::string parse_tagged(std::string_view text, std::string_view tag);

/// Split tagged content on leading "- ". Lines without the marker continue
/// the previous bullet. Throws MalformedBullets for text before the first
/// bullet or when no bullet is present.
std::vector<std::string> parse_bullets(std::string_view content);

/// Scores from <format_score>, <content_quality> and <feasibility>.
ScoreTriple parse_score_response(std::string_view text);

struct Annotation {
  int reasonableness = 0;  // logical coherence
  int readability = 0;
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// "Reasonableness: N" and "Readability: N" inside <final_scores>.
Annotation parse_final_scores(std::string_view text);

/// Content of the last \boxed{...} in the text, if any.
std::optional<std::string> parse_boxed(std::string_view text);

// ---------------------------------------------------------------------------
// Provider contracts. Implementations must tolerate concurrent calls.

struct RuleDraft {
  std::vector<std::string> bullets;
  std::string program;
};

class Transformer {
 public:
  virtual ~Transformer() = default;
  virtual RuleDraft mutate(const Rule& parent, std::uint64_t seed) = 0;
  virtual RuleDraft crossover(const Rule& a, const Rule& b, std::uint64_t seed) = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const Rule& rule) = 0;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ScoreTriple score(const Rule& rule) = 0;
};

struct AnnotationRequest {
  std::string puzzle_id;
  std::string question;
  std::string answer;
  std::string rules;      // bullet text of the source rule
  std::string sheet_png;  // encoded sheet
};

class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual Annotation annotate(const AnnotationRequest& req) = 0;
};

// What a solver sees: the sheet and the prompt. Never the answer.
struct SolveRequest {
  std::string puzzle_id;
  std::string prompt;
  std::vector<std::string> labels;
  std::string sheet_png;
};

class Solver {
 public:
  virtual ~Solver() = default;
  /// One attempt; returns the chosen option label.
  virtual std::string solve(const SolveRequest& req, std::uint64_t seed) = 0;
};

// ---------------------------------------------------------------------------
// Deterministic stubs

/// Rule-based bullet editing that keeps the program and the bullets in step:
/// a mutation rewrites, adds or deletes one bullet together with the program
/// aspect it describes; crossover swaps a seed-chosen set of b's bullets
/// into a (a1, b2, a3, ... for half the seeds)
class StubTransformer final : public Transformer {
 public:
  RuleDraft mutate(const Rule& parent, std::uint64_t seed) override;
  RuleDraft crossover(const Rule& a, const Rule& b, std::uint64_t seed) override;
};

/// Signed feature hashing of lower-cased word tokens, unit-normalized.
class StubEmbedder final : public Embedder {
 public:
  explicit StubEmbedder(std::size_t dimension = 64) : dim_(dimension) {}
  std::vector<double> embed(const Rule& rule) override;

 private:
  std::size_t dim_;
};

/// Scores with the deterministic rubric (rubric_score_dsl).
class StubScorer final : public Scorer {
 public:
  ScoreTriple score(const Rule& rule) override;
};

class StubAnnotator final : public Annotator {
 public:
  explicit StubAnnotator(Annotation fixed = {4, 4}) : fixed_(fixed) {}
  Annotation annotate(const AnnotationRequest&) override { return fixed_; }

 private:
  Annotation fixed_;
};

class RandomSolver final : public Solver {
 public:
  std::string solve(const SolveRequest& req, std::uint64_t seed) override;
};

/// Oracle and adversarial stubs hold an answer key keyed by puzzle id,
/// supplied out of band by whoever builds them.
using AnswerKey = std::unordered_map<std::string, std::string>;

class OracleSolver final : public Solver {
 public:
  explicit OracleSolver(AnswerKey key) : key_(std::move(key)) {}
  std::string solve(const SolveRequest& req, std::uint64_t seed) override;

 private:
  AnswerKey key_;
};

class AdversarialSolver final : public Solver {
 public:
  explicit AdversarialSolver(AnswerKey key) : key_(std::move(key)) {}
  std::string solve(const SolveRequest& req, std::uint64_t seed) override;

 private:
  AnswerKey key_;
};

// ---------------------------------------------------------------------------
// HTTP providers

struct HttpConfig {
  std::string endpoint;  // e.g. http://localhost:8080/v1/generate
  std::string model;
  std::string api_key;
  int retries = 3;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{120};
  double rate_per_second = 4.0;  // token bucket refill
  double burst = 4.0;
};

/// Fill endpoint and api key from VLSYNTH_ENDPOINT / VLSYNTH_API_KEY when set.
HttpConfig http_config_from_env(HttpConfig base);

class TokenBucket {
 public:
  TokenBucket(double rate_per_second, double burst);
  void acquire();

 private:
  std::mutex mu_;
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

/// JSON POST {model, kind, template, prompt, attachments[base64]}; the reply
/// is a JSON object whose fields `parse` interprets ("text", or "embedding"
/// for embed requests). Transport errors, non-2xx statuses and replies that
/// `parse` rejects are retried with exponential backoff; ProviderError after
/// the budget.
class HttpClient {
 public:
  explicit HttpClient(HttpConfig cfg);
  ~HttpClient();
  HttpClient(const HttpClient&) = delete;
  HttpClient& operator=(const HttpClient&) = delete;

  template <typename Parse>
  auto call(RequestKind kind, std::string_view template_id, const std::string& prompt,
            const std::vector<std::string>& attachments, Parse parse) {
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
      if (attempt > 0) backoff(attempt);
      try {
        return parse(post(kind, template_id, prompt, attachments));
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
    throw_exhausted(kind, last_error);
  }

 private:
  nlohmann::json post(RequestKind kind, std::string_view template_id, const std::string& prompt,
                   const std::vector<std::string>& attachments);
  void backoff(int attempt) const;
  [[noreturn]] void throw_exhausted(RequestKind kind, const std::string& last_error) const;

  HttpConfig cfg_;
  TokenBucket bucket_;
};

class HttpTransformer final : public Transformer {
 public:
  explicit HttpTransformer(HttpConfig cfg) : client_(std::move(cfg)) {}
  RuleDraft mutate(const Rule& parent, std::uint64_t seed) override;
  RuleDraft crossover(const Rule& a, const Rule& b, std::uint64_t seed) override;

 private:
  HttpClient client_;
};

class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(HttpConfig cfg) : client_(std::move(cfg)) {}
  std::vector<double> embed(const Rule& rule) override;

 private:
  HttpClient client_;
};

class HttpScorer final : public Scorer {
 public:
  explicit HttpScorer(HttpConfig cfg) : client_(std::move(cfg)) {}
  ScoreTriple score(const Rule& rule) override;

 private:
  HttpClient client_;
};

class HttpAnnotator final : public Annotator {
 public:
  explicit HttpAnnotator(HttpConfig cfg) : client_(std::move(cfg)) {}
  Annotation annotate(const AnnotationRequest& req) override;

 private:
  HttpClient client_;
};

class HttpSolver final : public Solver {
 public:
  explicit HttpSolver(HttpConfig cfg) : client_(std::move(cfg)) {}
  std::string solve(const SolveRequest& req, std::uint64_t seed) override;

 private:
  HttpClient client_;
};

std::string base64_encode(std::string_view bytes);

}  // namespace vlsynth
