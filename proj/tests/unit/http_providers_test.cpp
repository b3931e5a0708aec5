// Must match the core library so both see the same httplib layout.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>

#include <atomic>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <thread>

#include "vlsynth/errors.hpp"
#include "vlsynth/providers.hpp"

using namespace vlsynth;

namespace {

// Local provider that fails the first `failures` requests with a 503.
struct FakeProvider {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> requests{0};
  int failures = 0;
  std::string reply;
  nlohmann::json last_body;
  std::string last_auth;

  FakeProvider(int fail, std::string text) : failures(fail), reply(std::move(text)) {
    server.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++requests;
      last_body = nlohmann::json::parse(req.body);
      last_auth = req.get_header_value("Authorization");
      if (n <= failures) {
        res.status = 503;
        return;
      }
      res.set_content(reply, "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeProvider() {
    server.stop();
    thread.join();
  }

  HttpConfig config() const {
    HttpConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/generate";
    cfg.model = "m";
    cfg.api_key = "k";
    cfg.retries = 2;
    cfg.backoff = std::chrono::milliseconds(1);
    cfg.rate_per_second = 0;
    return cfg;
  }
};

Rule sample_rule() {
  Rule r;
  r.bullets = {"one", "two", "three", "four"};
  return r;
}

}  // namespace

TEST_CASE("http scorer retries transient failures and sends the documented body") {
  const nlohmann::json reply = {
      {"text", "<format_score>5</format_score><content_quality>4</content_quality><feasibility>3</feasibility>"}};
  FakeProvider fake(2, reply.dump());
  HttpScorer scorer(fake.config());
  CHECK(scorer.score(sample_rule()) == ScoreTriple{5, 4, 3});
  CHECK(fake.requests == 3);
  CHECK(fake.last_body["model"] == "m");
  CHECK(fake.last_body["kind"] == "score");
  CHECK(fake.last_body["template"] == "score");
  CHECK(fake.last_body["prompt"].get<std::string>().find("- three") != std::string::npos);
  CHECK(fake.last_auth == "Bearer k");
}

TEST_CASE("http provider gives up after the retry budget") {
  FakeProvider fake(100, "{}");
  HttpScorer scorer(fake.config());
  CHECK_THROWS_AS(scorer.score(sample_rule()), ProviderError);
  CHECK(fake.requests == 3);
}

TEST_CASE("unparseable replies are retried like transport errors") {
  FakeProvider fake(0, nlohmann::json{{"text", "no tags here"}}.dump());
  HttpScorer scorer(fake.config());
  CHECK_THROWS_AS(scorer.score(sample_rule()), ProviderError);
  CHECK(fake.requests == 3);
}

TEST_CASE("http solver attaches the sheet and reads the boxed answer") {
  FakeProvider fake(0, nlohmann::json{{"text", "so \\boxed{C}"}}.dump());
  HttpSolver solver(fake.config());
  CHECK(solver.solve(SolveRequest{"q", "prompt", {"A", "B", "C", "D"}, "PNG"}, 1) == "C");
  CHECK(fake.last_body["attachments"] == nlohmann::json::array({base64_encode("PNG")}));
  CHECK(fake.last_body["template"] == "verify");
}

TEST_CASE("http embedder and missing endpoint") {
  FakeProvider fake(0, nlohmann::json{{"embedding", {0.5, -0.5}}}.dump());
  HttpEmbedder emb(fake.config());
  CHECK(emb.embed(sample_rule()) == std::vector<double>{0.5, -0.5});
  CHECK_THROWS_AS(HttpScorer(HttpConfig{}), ConfigError);
}
