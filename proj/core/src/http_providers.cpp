#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "vlsynth/errors.hpp"
#include "vlsynth/providers.hpp"

namespace vlsynth {

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

HttpConfig http_config_from_env(HttpConfig base) {
  if (const char* e = std::getenv("VLSYNTH_ENDPOINT"); e && *e) base.endpoint = e;
  if (const char* k = std::getenv("VLSYNTH_API_KEY"); k && *k) base.api_key = k;
  return base;
}

TokenBucket::TokenBucket(double rate_per_second, double burst)
    : rate_(rate_per_second), burst_(std::max(1.0, burst)), tokens_(burst_), last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    tokens_ = std::min(burst_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

HttpClient::HttpClient(HttpConfig cfg) : cfg_(std::move(cfg)), bucket_(cfg_.rate_per_second, cfg_.burst) {
  if (cfg_.endpoint.empty()) throw ConfigError("provider endpoint is not configured (set VLSYNTH_ENDPOINT)");
}

HttpClient::~HttpClient() = default;

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

nlohmann::json HttpClient::post(RequestKind kind, std::string_view template_id, const std::string& prompt,
                                const std::vector<std::string>& attachments) {
  bucket_.acquire();
  nlohmann::json body = {{"model", cfg_.model},
                         {"kind", std::string(to_string(kind))},
                         {"template", std::string(template_id)},
                         {"prompt", prompt},
                         {"attachments", nlohmann::json::array()}};
  for (const auto& a : attachments) body["attachments"].push_back(base64_encode(a));

  const auto ep = split_endpoint(cfg_.endpoint);
  httplib::Client cli(ep.base);
  cli.set_connection_timeout(std::chrono::seconds(10));
  cli.set_read_timeout(cfg_.timeout);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  auto res = cli.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) throw ProviderError("transport error: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw ProviderError("HTTP " + std::to_string(res->status) + " from provider");
  }
  return nlohmann::json::parse(res->body);
}

void HttpClient::backoff(int attempt) const {
  std::this_thread::sleep_for(cfg_.backoff * (1 << (attempt - 1)));
}

void HttpClient::throw_exhausted(RequestKind kind, const std::string& last_error) const {
  throw ProviderError(std::string(to_string(kind)) + " request failed after " + std::to_string(cfg_.retries + 1) +
                      " attempts: " + last_error);
}

namespace {

std::string reply_text(const nlohmann::json& reply) { return reply.at("text").get<std::string>(); }

// The provider may return an executable rule program next to the bullets;
// without one the child keeps its parent's program.
std::string program_or(const std::string& text, const std::string& fallback) {
  try {
    return parse_tagged(text, "rule_program");
  } catch (const MissingTag&) {
    return fallback;
  }
}

}  // namespace

RuleDraft HttpTransformer::mutate(const Rule& parent, std::uint64_t) {
  const auto prompt = render_prompt(RequestKind::Mutate, {{"RULE_SET", format_bullets(parent.bullets)}});
  return client_.call(RequestKind::Mutate, "mutate", prompt, {}, [&](const nlohmann::json& reply) {
    const auto text = reply_text(reply);
    return RuleDraft{parse_bullets(parse_tagged(text, "mutated_rules")), program_or(text, parent.program)};
  });
}

RuleDraft HttpTransformer::crossover(const Rule& a, const Rule& b, std::uint64_t) {
  const auto prompt = render_prompt(RequestKind::Crossover, {{"FIRST_RULE_SET", format_bullets(a.bullets)},
                                                             {"SECOND_RULE_SET", format_bullets(b.bullets)}});
  return client_.call(RequestKind::Crossover, "crossover", prompt, {}, [&](const nlohmann::json& reply) {
    const auto text = reply_text(reply);
    return RuleDraft{parse_bullets(parse_tagged(text, "crossover_rules")), program_or(text, a.program)};
  });
}

std::vector<double> HttpEmbedder::embed(const Rule& rule) {
  std::string text;
  for (const auto& b : rule.bullets) text += b + "\n";
  return client_.call(RequestKind::Embed, "", text, {}, [](const nlohmann::json& reply) {
    auto v = reply.at("embedding").get<std::vector<double>>();
    if (v.empty()) throw ProviderError("empty embedding");
    return v;
  });
}

ScoreTriple HttpScorer::score(const Rule& rule) {
  const auto prompt = render_prompt(RequestKind::Score, {{"RULE", format_bullets(rule.bullets)}});
  return client_.call(RequestKind::Score, "score", prompt, {},
                      [](const nlohmann::json& reply) { return parse_score_response(reply_text(reply)); });
}

Annotation HttpAnnotator::annotate(const AnnotationRequest& req) {
  const auto prompt = render_prompt(RequestKind::Annotate,
                                    {{"question", req.question}, {"answer", req.answer}, {"rules", req.rules}});
  return client_.call(RequestKind::Annotate, "annotate", prompt, {req.sheet_png},
                      [](const nlohmann::json& reply) { return parse_final_scores(reply_text(reply)); });
}

std::string HttpSolver::solve(const SolveRequest& req, std::uint64_t) {
  std::string options;
  for (const auto& l : req.labels) options += (options.empty() ? "" : ", ") + l;
  const auto prompt = render_prompt(RequestKind::Solve, {{"question", req.prompt}, {"options", options}, {"hint", ""}});
  return client_.call(RequestKind::Solve, "verify", prompt, {req.sheet_png}, [&](const nlohmann::json& reply) {
    const auto text = reply_text(reply);
    std::string answer;
    if (auto boxed = parse_boxed(text)) {
      answer = *boxed;
    } else {
      answer = parse_tagged(text, "answer");
    }
    // An unusable answer still counts as an attempt; it just never matches.
    return answer;
  });
}

}  // namespace vlsynth
