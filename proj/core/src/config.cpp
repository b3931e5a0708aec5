#include "vlsynth/config.hpp"

#include <cctype>
#include <charconv>
#include <set>

#include "vlsynth/errors.hpp"
#include "vlsynth/io.hpp"
#include "vlsynth/rng.hpp"

namespace vlsynth {

namespace {

class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : s_(text) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    std::set<std::string> defined_tables;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (!eof() && peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        auto path = key_path();
        skip_ws();
        expect(']');
        end_of_line();
        std::string joined;
        table = &root;
        for (const auto& k : path) {
          joined += (joined.empty() ? "" : ".") + k;
          auto& next = (*table)[k];
          if (next.is_null()) next = nlohmann::json::object();
          if (!next.is_object()) fail("'" + joined + "' is already a value");
          table = &next;
        }
        if (!defined_tables.insert(joined).second) fail("table [" + joined + "] defined twice");
        continue;
      }
      auto path = key_path();
      skip_ws();
      expect('=');
      skip_ws();
      auto v = value();
      end_of_line();
      nlohmann::json* t = table;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        auto& next = (*t)[path[i]];
        if (next.is_null()) next = nlohmann::json::object();
        if (!next.is_object()) fail("'" + path[i] + "' is already a value");
        t = &next;
      }
      if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
      (*t)[path.back()] = std::move(v);
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + what);
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void newline() {
    if (!eof() && peek() == '\r') ++pos_;
    if (!eof() && peek() == '\n') {
      ++pos_;
      ++line_;
    }
  }

  void skip_blank_lines() {
    for (;;) {
      skip_ws();
      skip_comment();
      if (eof()) return;
      if (peek() == '\n' || peek() == '\r') {
        newline();
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n' && peek() != '\r') fail("unexpected text after value");
    newline();
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> out;
    for (;;) {
      skip_ws();
      if (eof()) fail("expected a key");
      if (peek() == '"') {
        out.push_back(basic_string());
      } else if (peek() == '\'') {
        out.push_back(literal_string());
      } else {
        const auto start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
        if (pos_ == start) fail("expected a key");
        out.emplace_back(s_.substr(start, pos_ - start));
      }
      skip_ws();
      if (!eof() && peek() == '.') {
        ++pos_;
        continue;
      }
      return out;
    }
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }

  std::string literal_string() {
    expect('\'');
    const auto start = pos_;
    while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
    if (eof() || peek() != '\'') fail("unterminated string");
    std::string out(s_.substr(start, pos_ - start));
    ++pos_;
    return out;
  }

  void skip_array_space() {
    for (;;) {
      skip_ws();
      skip_comment();
      if (!eof() && (peek() == '\n' || peek() == '\r')) {
        newline();
        continue;
      }
      return;
    }
  }

  nlohmann::json value() {
    if (eof()) fail("expected a value");
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') {
      ++pos_;
      nlohmann::json arr = nlohmann::json::array();
      for (;;) {
        skip_array_space();
        if (eof()) fail("unterminated array");
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(value());
        skip_array_space();
        if (!eof() && peek() == ',') {
          ++pos_;
          continue;
        }
        skip_array_space();
        expect(']');
        return arr;
      }
    }
    if (c == '{') fail("inline tables are not supported");
    const auto start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || std::string_view("+-._").find(peek()) !=
                                                                              std::string_view::npos)) {
      ++pos_;
    }
    const std::string tok(s_.substr(start, pos_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    return number(tok);
  }

  nlohmann::json number(const std::string& tok) {
    if (tok.empty()) fail("expected a value");
    std::string digits;
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (tok[i] == '_') {
        if (i == 0 || i + 1 == tok.size() || !std::isdigit(static_cast<unsigned char>(tok[i - 1])) ||
            !std::isdigit(static_cast<unsigned char>(tok[i + 1]))) {
          fail("misplaced '_' in number " + tok);
        }
        continue;
      }
      digits += tok[i];
    }
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" ||
                          digits == "+inf" || digits == "-inf" || digits == "nan";
    const char* b = digits.data();
    const char* e = digits.data() + digits.size();
    if (*b == '+') ++b;
    if (is_float) {
      double v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e) fail("bad number " + tok);
      return v;
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) fail("bad value " + tok);
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

// Reads keys out of one table and reports the ones nobody asked for.
class Section {
 public:
  Section(const nlohmann::json& doc, std::string name) : name_(std::move(name)) {
    if (name_.empty()) {
      j_ = doc;
    } else if (doc.contains(name_)) {
      j_ = doc.at(name_);
      if (!j_.is_object()) throw ConfigError("[" + name_ + "] must be a table");
    } else {
      j_ = nlohmann::json::object();
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      const auto& v = j_.at(key);
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.get<std::int64_t>() < 0) throw ConfigError("");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  const nlohmann::json* raw(const char* key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  void skip(const char* key) { used_.insert(key); }

  std::string where(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!used_.contains(k)) throw ConfigError("unknown config key " + where(k));
    }
  }

 private:
  std::string name_;
  nlohmann::json j_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

SolverKind parse_solver(const std::string& s) {
  if (s == "random") return SolverKind::Random;
  if (s == "oracle") return SolverKind::Oracle;
  if (s == "adversarial") return SolverKind::Adversarial;
  throw ConfigError("passrate.solver must be random, oracle or adversarial, got " + s);
}

std::string_view solver_name(SolverKind k) {
  switch (k) {
    case SolverKind::Random: return "random";
    case SolverKind::Oracle: return "oracle";
    case SolverKind::Adversarial: return "adversarial";
  }
  return "random";
}

BlankMode parse_blank_mode(const std::string& s) {
  if (s == "near_white") return BlankMode::NearWhite;
  if (s == "literal_below") return BlankMode::LiteralBelow;
  throw ConfigError("qc.blank_mode must be near_white or literal_below, got " + s);
}

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

std::uint64_t PipelineConfig::stage_seed(std::string_view stage) const { return derive_seed(rng_seed, stage); }

void PipelineConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  evolution.validate();
  require(workers >= 0, "workers must be >= 0");
  require(dedup_threshold >= 0.0 && dedup_threshold <= 2.0, "dedup.threshold must be in [0, 2]");
  require(embedding_dim >= 1, "dedup.embedding_dim must be >= 1");
  require(filter.min_total_exclusive >= 3 && filter.min_total_exclusive <= 15, "filter.min_total_exclusive must be in [3, 15]");
  require(filter.min_feasibility >= 1 && filter.min_feasibility <= 5, "filter.min_feasibility must be in [1, 5]");
  require(!styles.empty(), "render.styles must not be empty");
  require(render.panel_size >= 32 && render.panel_size <= 2048, "render.panel_size must be in [32, 2048]");
  require(render.margin >= 0.0 && render.margin < 0.4, "render.margin must be in [0, 0.4)");
  require(qc.dup >= 0 && qc.dup <= 64, "qc.dup must be in [0, 64]");
  require(qc.blank_ssim >= -1.0 && qc.blank_ssim <= 1.0, "qc.blank_ssim must be in [-1, 1]");
  require(qc.literal_ssim >= -1.0 && qc.literal_ssim <= 1.0, "qc.literal_ssim must be in [-1, 1]");
  require(qc.blank_ink >= 0.0 && qc.blank_ink <= 1.0, "qc.blank_ink must be in [0, 1]");
  require(qc.min_energy >= 0.0, "qc.min_energy must be >= 0");
  require(sheet.gutter >= 2 * sheet.border && sheet.border >= 0, "assembly.gutter must be >= 2 * assembly.border");
  require(expand.dup_threshold >= 0 && expand.dup_threshold <= 64, "assembly.dup_threshold must be in [0, 64]");
  require(expand.retry_budget >= 0, "assembly.retry_budget must be >= 0");
  require(stub_annotation.readability >= 1 && stub_annotation.readability <= 5 && stub_annotation.reasonableness >= 1 &&
              stub_annotation.reasonableness <= 5,
          "annotate scores must be in [1, 5]");
  require(passrate_attempts >= 1, "passrate.attempts must be >= 1");
  require(sampler.min_pass >= 0.0 && sampler.min_pass <= sampler.max_pass && sampler.max_pass <= 1.0,
          "sample pass bounds must satisfy 0 <= min_pass <= max_pass <= 1");
  require(sampler.four_option_share >= 0.0 && sampler.four_option_share <= 1.0,
          "sample.four_option_share must be in [0, 1]");
  require(sampler.min_quality >= 2 && sampler.min_quality <= 10, "sample.min_quality must be in [2, 10]");
  require(stub_providers || !http.endpoint.empty(), "providers.endpoint is required unless stub providers are used");
}

nlohmann::json PipelineConfig::stage_settings(std::string_view stage) const {
  nlohmann::json j = {{"seed", stage_seed(stage)}};
  auto providers = [&] {
    return nlohmann::json{{"stub", stub_providers}, {"endpoint", stub_providers ? "" : http.endpoint},
                          {"model", stub_providers ? "" : http.model}};
  };
  if (stage == "seed-import") {
    j["seeds"] = seeds.generic_string();
  } else if (stage == "evolve") {
    j["evolution"] = to_json(evolution);
    j["providers"] = providers();
  } else if (stage == "filter") {
    j["dedup"] = {{"threshold", dedup_threshold}, {"embedding_dim", embedding_dim}};
    j["filter"] = {{"min_total_exclusive", filter.min_total_exclusive}, {"min_feasibility", filter.min_feasibility}};
    j["providers"] = providers();
  } else if (stage == "render") {
    nlohmann::json names = nlohmann::json::array();
    for (auto s : styles) names.push_back(to_string(s));
    j["styles"] = names;
    j["panel_size"] = render.panel_size;
    j["margin"] = render.margin;
  } else if (stage == "qc") {
    j["qc"] = {{"dup", qc.dup},
               {"blank_mode", qc.blank_mode == BlankMode::NearWhite ? "near_white" : "literal_below"},
               {"blank_ssim", qc.blank_ssim},
               {"blank_ink", qc.blank_ink},
               {"literal_ssim", qc.literal_ssim},
               {"min_energy", qc.min_energy}};
  } else if (stage == "assemble") {
    j["assembly"] = {{"gutter", sheet.gutter},
                     {"border", sheet.border},
                     {"dup_threshold", expand.dup_threshold},
                     {"retry_budget", expand.retry_budget}};
  } else if (stage == "annotate") {
    j["annotate"] = {{"readability", stub_annotation.readability}, {"coherence", stub_annotation.reasonableness}};
    j["providers"] = providers();
  } else if (stage == "passrate") {
    j["passrate"] = {{"attempts", passrate_attempts}, {"solver", solver_name(solver)}};
    j["providers"] = providers();
  } else if (stage == "sample") {
    j["sample"] = {{"n", sample_n},
                   {"min_pass", sampler.min_pass},
                   {"max_pass", sampler.max_pass},
                   {"min_quality", sampler.min_quality},
                   {"four_option_share", sampler.four_option_share}};
  } else if (stage == "stats") {
    j["export"] = export_dir.generic_string();
  }
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& doc, const std::filesystem::path& config_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a table");
  PipelineConfig c;
  c.config_dir = config_dir;

  Section top(doc, "");
  for (const char* t : {"paths", "evolution", "dedup", "filter", "render", "qc", "assembly", "annotate", "passrate",
                        "sample", "providers"}) {
    top.skip(t);
  }
  top.get("rng_seed", c.rng_seed);
  top.get("workers", c.workers);
  top.finish();

  Section paths(doc, "paths");
  std::string seeds, workdir, exp;
  paths.get("seeds", seeds);
  paths.get("workdir", workdir);
  paths.get("export", exp);
  paths.finish();
  if (seeds.empty()) throw ConfigError("paths.seeds is required");
  if (workdir.empty()) throw ConfigError("paths.workdir is required");
  c.seeds = resolve(config_dir, seeds);
  c.workdir = resolve(config_dir, workdir);
  c.export_dir = exp.empty() ? c.workdir / "dataset" : resolve(config_dir, exp);

  Section evo(doc, "evolution");
  evo.get("generations", c.evolution.generations);
  evo.get("growth", c.evolution.growth);
  evo.get("migration_period", c.evolution.migration_period);
  evo.get("migration_rate", c.evolution.migration_rate);
  evo.get("mutation_share", c.evolution.mutation_share);
  evo.get("retry_budget", c.evolution.retry_budget);
  evo.get("max_bullet_changes", c.evolution.max_bullet_changes);
  evo.finish();

  Section dd(doc, "dedup");
  dd.get("threshold", c.dedup_threshold);
  dd.get("embedding_dim", c.embedding_dim);
  dd.finish();

  Section fl(doc, "filter");
  fl.get("min_total_exclusive", c.filter.min_total_exclusive);
  fl.get("min_feasibility", c.filter.min_feasibility);
  fl.finish();

  Section rd(doc, "render");
  if (const auto* st = rd.raw("styles")) {
    if (!st->is_array()) throw ConfigError("render.styles must be an array");
    c.styles.clear();
    for (const auto& s : *st) {
      if (!s.is_string()) throw ConfigError("render.styles entries must be strings");
      try {
        c.styles.push_back(parse_style(s.get<std::string>()));
      } catch (const Error& e) {
        throw ConfigError(std::string("render.styles: ") + e.what());
      }
    }
  }
  rd.get("panel_size", c.render.panel_size);
  rd.get("margin", c.render.margin);
  rd.finish();

  Section qc(doc, "qc");
  qc.get("dup", c.qc.dup);
  std::string mode;
  qc.get("blank_mode", mode);
  if (!mode.empty()) c.qc.blank_mode = parse_blank_mode(mode);
  qc.get("blank_ssim", c.qc.blank_ssim);
  qc.get("blank_ink", c.qc.blank_ink);
  qc.get("literal_ssim", c.qc.literal_ssim);
  qc.get("min_energy", c.qc.min_energy);
  qc.finish();

  Section as(doc, "assembly");
  as.get("gutter", c.sheet.gutter);
  as.get("border", c.sheet.border);
  c.expand.dup_threshold = c.qc.dup;
  as.get("dup_threshold", c.expand.dup_threshold);
  as.get("retry_budget", c.expand.retry_budget);
  as.finish();

  Section an(doc, "annotate");
  an.get("readability", c.stub_annotation.readability);
  an.get("coherence", c.stub_annotation.reasonableness);
  an.finish();

  Section pr(doc, "passrate");
  pr.get("attempts", c.passrate_attempts);
  std::string solver;
  pr.get("solver", solver);
  if (!solver.empty()) c.solver = parse_solver(solver);
  pr.finish();

  Section sm(doc, "sample");
  sm.get("n", c.sample_n);
  sm.get("min_pass", c.sampler.min_pass);
  sm.get("max_pass", c.sampler.max_pass);
  sm.get("min_quality", c.sampler.min_quality);
  sm.get("four_option_share", c.sampler.four_option_share);
  sm.finish();

  Section pv(doc, "providers");
  pv.get("stub", c.stub_providers);
  pv.get("endpoint", c.http.endpoint);
  pv.get("model", c.http.model);
  pv.get("retries", c.http.retries);
  int timeout = static_cast<int>(c.http.timeout.count());
  pv.get("timeout_s", timeout);
  c.http.timeout = std::chrono::seconds(timeout);
  pv.get("rate_per_second", c.http.rate_per_second);
  pv.get("burst", c.http.burst);
  pv.finish();
  c.http = http_config_from_env(c.http);

  c.evolution.rng_seed = c.stage_seed("evolve");
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  const auto dir = std::filesystem::absolute(path).parent_path();
  try {
    return pipeline_config_from_json(parse_toml(text), dir);
  } catch (const ConfigError& e) {
    throw ConfigError(path.generic_string() + ": " + e.what());
  }
}

}  // namespace vlsynth
