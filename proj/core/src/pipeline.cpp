#include "vlsynth/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "vlsynth/assembly.hpp"
#include "vlsynth/dataset_ops.hpp"
#include "vlsynth/dedup.hpp"
#include "vlsynth/errors.hpp"
#include "vlsynth/evolution.hpp"
#include "vlsynth/hash.hpp"
#include "vlsynth/image_qc.hpp"
#include "vlsynth/io.hpp"
#include "vlsynth/parallel.hpp"
#include "vlsynth/renderer.hpp"
#include "vlsynth/rng.hpp"
#include "vlsynth/rule_dsl.hpp"

namespace vlsynth {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDoneFile = "done.json";

struct GroupRecord {
  std::string group_id;
  std::string rule_id;
  StyleId style = StyleId::MonochromeVector;
  bool rendered = false;
  std::string error;
};

nlohmann::json to_json(const GroupRecord& g) {
  nlohmann::json j = {{"group", g.group_id}, {"rule", g.rule_id}, {"style", to_string(g.style)}, {"rendered", g.rendered}};
  if (!g.error.empty()) j["error"] = g.error;
  return j;
}

GroupRecord group_record_from_json(const nlohmann::json& j) {
  return {j.at("group").get<std::string>(), j.at("rule").get<std::string>(),
          parse_style(j.at("style").get<std::string>()), j.at("rendered").get<bool>(), j.value("error", std::string{})};
}

std::string file_sha(const fs::path& p) { return sha256_hex(read_text_file(p)); }

void reset_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (ec) throw IoError("cannot clear " + dir.generic_string() + ": " + ec.message());
  fs::create_directories(dir);
}

// Every regular file under `root`, sorted by relative path.
std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path panel_file(const fs::path& panels_root, const std::string& group_id, int slot) {
  return panels_root / group_id / (panel_name(slot) + ".png");
}

}  // namespace

std::vector<std::string_view> stage_dependencies(std::string_view stage) {
  if (stage == "seed-import") return {};
  if (stage == "evolve") return {"seed-import"};
  if (stage == "filter") return {"evolve"};
  if (stage == "render") return {"filter"};
  if (stage == "qc") return {"render"};
  if (stage == "assemble") return {"evolve", "qc"};
  if (stage == "annotate") return {"filter", "assemble"};
  if (stage == "passrate") return {"assemble"};
  if (stage == "sample") return {"annotate", "passrate"};
  if (stage == "stats") return {"seed-import", "evolve", "filter", "render", "qc", "assemble", "sample"};
  throw StageError("unknown stage: " + std::string(stage));
}

bool is_stage(std::string_view name) { return std::find(kStages.begin(), kStages.end(), name) != kStages.end(); }

std::vector<Rule> load_seed_file(const fs::path& path) {
  const auto dir = path.parent_path();
  std::vector<Rule> out;
  std::set<std::string> ids;
  std::size_t line = 0;
  for (auto j : read_jsonl(path)) {
    ++line;
    const std::string where = path.generic_string() + " line " + std::to_string(line);
    if (j.contains("program_file")) {
      if (j.contains("program")) throw PreconditionError(where + ": give program or program_file, not both");
      j["program"] = read_text_file(dir / j.at("program_file").get<std::string>());
      j.erase("program_file");
    }
    Rule r;
    try {
      j.erase("id");
      r = with_content_id(rule_from_json(j));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw PreconditionError(where + ": " + e.what());
    }
    if (r.generation != 0 || !r.lineage.empty()) throw PreconditionError(where + ": seeds need generation 0 and no lineage");
    if (const auto report = validate_rule(r); !report.ok()) {
      throw PreconditionError(where + ": " + report.violations.front().message);
    }
    if (!ids.insert(r.id).second) throw PreconditionError(where + ": duplicate seed " + r.id);
    out.push_back(std::move(r));
  }
  if (out.empty()) throw PreconditionError(path.generic_string() + " holds no seed rules");
  return out;
}

ProviderSet make_providers(const PipelineConfig& cfg) {
  ProviderSet p;
  if (cfg.stub_providers) {
    p.transformer = std::make_unique<StubTransformer>();
    p.embedder = std::make_unique<StubEmbedder>(cfg.embedding_dim);
    p.scorer = std::make_unique<StubScorer>();
    p.annotator = std::make_unique<StubAnnotator>(cfg.stub_annotation);
  } else {
    p.transformer = std::make_unique<HttpTransformer>(cfg.http);
    p.embedder = std::make_unique<HttpEmbedder>(cfg.http);
    p.scorer = std::make_unique<HttpScorer>(cfg.http);
    p.annotator = std::make_unique<HttpAnnotator>(cfg.http);
  }
  return p;
}

std::string_view to_string(StageStatus s) noexcept {
  switch (s) {
    case StageStatus::Missing: return "missing";
    case StageStatus::Stale: return "stale";
    case StageStatus::Fresh: return "fresh";
  }
  return "missing";
}

Pipeline::Pipeline(PipelineConfig cfg, ProviderSet providers, Logger log)
    : cfg_(std::move(cfg)), providers_(std::move(providers)), log_(std::move(log)) {
  if (!log_) log_ = [](const std::string&) {};
}

fs::path Pipeline::stage_dir(std::string_view stage) const { return cfg_.workdir / std::string(stage); }
fs::path Pipeline::done_path(std::string_view stage) const { return stage_dir(stage) / kDoneFile; }

nlohmann::json Pipeline::current_settings(std::string_view stage) const {
  auto s = cfg_.stage_settings(stage);
  if (stage == "seed-import") {
    // Seed content, so editing a seed or its program invalidates the import.
    std::string lines;
    try {
      for (const auto& r : load_seed_file(cfg_.seeds)) lines += dump_line(to_json(r)) + "\n";
    } catch (const std::exception& e) {
      lines = std::string("unreadable: ") + e.what();
    }
    s["seeds_sha256"] = sha256_hex(lines);
  }
  return s;
}

std::string Pipeline::marker_digest(std::string_view stage) const {
  const auto p = done_path(stage);
  if (!fs::exists(p)) return {};
  return nlohmann::json::parse(read_text_file(p)).at("digest").get<std::string>();
}

StageStatus Pipeline::status(std::string_view stage) const {
  const auto p = done_path(stage);
  if (!fs::exists(p)) return StageStatus::Missing;
  nlohmann::json marker;
  try {
    marker = nlohmann::json::parse(read_text_file(p));
  } catch (const std::exception&) {
    return StageStatus::Stale;
  }
  if (marker.value("settings", nlohmann::json()) != current_settings(stage)) return StageStatus::Stale;
  for (const auto& o : marker.value("outputs", nlohmann::json::array())) {
    if (!fs::exists(cfg_.workdir / o.at("path").get<std::string>())) return StageStatus::Stale;
  }
  for (auto dep : stage_dependencies(stage)) {
    if (status(dep) != StageStatus::Fresh) return StageStatus::Stale;
    const auto recorded = marker.value("upstream", nlohmann::json::object()).value(std::string(dep), std::string{});
    if (recorded != marker_digest(dep)) return StageStatus::Stale;
  }
  return StageStatus::Fresh;
}

nlohmann::json Pipeline::run_stage(std::string_view stage, const RunOptions& opts) {
  if (!is_stage(stage)) throw StageError("unknown stage: " + std::string(stage));
  nlohmann::json upstream = nlohmann::json::object();
  for (auto dep : stage_dependencies(stage)) {
    const auto st = status(dep);
    if (st != StageStatus::Fresh) {
      throw StageError("stage " + std::string(stage) + " needs stage " + std::string(dep) + ", which is " +
                       std::string(to_string(st)));
    }
    upstream[std::string(dep)] = marker_digest(dep);
  }
  // Drop the old marker first so a failed run is never mistaken for done.
  fs::create_directories(stage_dir(stage));
  fs::remove(done_path(stage));

  std::vector<fs::path> outputs;
  auto summary = execute(stage, opts, outputs);

  nlohmann::json files = nlohmann::json::array();
  for (const auto& o : outputs) {
    files.push_back({{"path", o.lexically_relative(cfg_.workdir).generic_string()}, {"sha256", file_sha(o)}});
  }
  nlohmann::json marker = {
      {"stage", stage}, {"settings", current_settings(stage)}, {"upstream", upstream}, {"outputs", files}};
  marker["digest"] = sha256_hex(dump_line(marker));
  marker["summary"] = summary;
  write_file_atomic(done_path(stage), marker.dump(2) + "\n");
  log_("stage " + std::string(stage) + ": " + dump_line(summary));
  return summary;
}

void Pipeline::run_all(const RunOptions& opts, std::string_view last) {
  if (!last.empty() && !is_stage(last)) throw StageError("unknown stage: " + std::string(last));
  for (auto stage : kStages) {
    if (opts.resume && status(stage) == StageStatus::Fresh) {
      log_("stage " + std::string(stage) + ": fresh, skipped");
    } else {
      run_stage(stage, opts);
    }
    if (stage == last) break;
  }
}

nlohmann::json Pipeline::execute(std::string_view stage, const RunOptions& opts, std::vector<fs::path>& out) {
  if (stage == "seed-import") return seed_import(out);
  if (stage == "evolve") return evolve_stage(opts, out);
  if (stage == "filter") return filter_stage(out);
  if (stage == "render") return render_stage(out);
  if (stage == "qc") return qc_stage(out);
  if (stage == "assemble") return assemble_stage(out);
  if (stage == "annotate") return annotate_stage(out);
  if (stage == "passrate") return passrate_stage(out);
  if (stage == "sample") return sample_stage(out);
  return stats_stage(out);
}

nlohmann::json Pipeline::seed_import(std::vector<fs::path>& out) {
  const auto seeds = load_seed_file(cfg_.seeds);
  const auto path = stage_dir("seed-import") / "seeds.jsonl";
  write_rules_jsonl(path, seeds);
  out.push_back(path);
  return {{"seeds", seeds.size()}};
}

nlohmann::json Pipeline::evolve_stage(const RunOptions& opts, std::vector<fs::path>& out) {
  const auto seeds = read_rules_jsonl(stage_dir("seed-import") / "seeds.jsonl");
  const auto dir = stage_dir("evolve");
  EvolveOptions eo;
  eo.checkpoint_dir = dir / "checkpoints";
  eo.resume = opts.resume;
  eo.workers = cfg_.workers;
  if (!opts.resume) reset_dir(eo.checkpoint_dir);
  const auto result = evolve(seeds, cfg_.evolution, *providers_.transformer, eo);

  write_rules_jsonl(dir / "pool.jsonl", result.pool);
  nlohmann::json islands = nlohmann::json::array();
  for (const auto& i : result.islands) islands.push_back({{"class", class_name(i.cls)}, {"size", i.members.size()}});
  nlohmann::json summary = {{"seeds", seeds.size()},
                            {"pool", result.pool.size()},
                            {"target", cfg_.evolution.target_pool(seeds.size(), cfg_.evolution.generations)},
                            {"rejected_slots", result.rejected_slots},
                            {"rejection_reasons", result.rejection_reasons},
                            {"islands", islands}};
  write_file_atomic(dir / "report.json", summary.dump(2) + "\n");
  out.push_back(dir / "pool.jsonl");
  out.push_back(dir / "report.json");
  for (const auto& f : files_under(eo.checkpoint_dir)) out.push_back(f);
  summary.erase("rejection_reasons");
  summary.erase("islands");
  return summary;
}

nlohmann::json Pipeline::filter_stage(std::vector<fs::path>& out) {
  auto pool = read_rules_jsonl(stage_dir("evolve") / "pool.jsonl");
  // Greedy dedup keeps the first of near-duplicates in rule-id order.
  std::sort(pool.begin(), pool.end(), [](const Rule& a, const Rule& b) { return a.id < b.id; });

  std::vector<EmbeddingVector> vecs(pool.size());
  parallel_for(pool.size(), cfg_.workers, [&](std::size_t i) {
    auto v = providers_.embedder->embed(pool[i]);
    normalize(v);
    vecs[i] = {pool[i].id, std::move(v)};
  });
  const auto report = dedup(vecs, cfg_.dedup_threshold);

  const std::set<std::string> kept(report.kept.begin(), report.kept.end());
  std::vector<Rule> scored;
  for (const auto& r : pool) {
    if (kept.contains(r.id)) scored.push_back(r);
  }
  parallel_for(scored.size(), cfg_.workers, [&](std::size_t i) { scored[i].scores = providers_.scorer->score(scored[i]); });
  const auto retained = filter_by_score(scored, cfg_.filter);

  const auto dir = stage_dir("filter");
  std::vector<nlohmann::json> dedup_rows;
  dedup_rows.push_back({{"threshold", report.threshold}, {"kept", report.kept.size()}, {"removed", report.removed.size()}});
  for (const auto& r : report.removed) dedup_rows.push_back({{"id", r.id}, {"nearest", r.nearest}, {"distance", r.distance}});
  write_jsonl(dir / "dedup.jsonl", dedup_rows);
  write_rules_jsonl(dir / "scored.jsonl", scored);
  write_rules_jsonl(dir / "retained.jsonl", retained);
  for (const char* f : {"dedup.jsonl", "scored.jsonl", "retained.jsonl"}) out.push_back(dir / f);
  return {{"pool", pool.size()}, {"deduplicated", scored.size()}, {"retained", retained.size()}};
}

nlohmann::json Pipeline::render_stage(std::vector<fs::path>& out) {
  const auto rules = read_rules_jsonl(stage_dir("filter") / "retained.jsonl");
  const auto dir = stage_dir("render");
  const auto panels = dir / "panels";
  reset_dir(panels);
  const auto seed = cfg_.stage_seed("render");

  struct Job {
    const Rule* rule;
    StyleId style;
  };
  std::vector<Job> jobs;
  for (const auto& r : rules) {
    for (auto s : cfg_.styles) jobs.push_back({&r, s});
  }
  std::vector<GroupRecord> records(jobs.size());
  parallel_for(jobs.size(), cfg_.workers, [&](std::size_t i) {
    const auto& job = jobs[i];
    auto& rec = records[i];
    rec.rule_id = job.rule->id;
    rec.style = job.style;
    rec.group_id = group_id_for(job.rule->id, job.style);
    const auto parsed = try_parse_rule_program(job.rule->program);
    if (!parsed.ok()) {
      rec.error = parsed.error_kind + ": " + parsed.error;
      return;
    }
    try {
      const auto group = render_group(*parsed.program, job.style, derive_seed(seed, job.rule->id), cfg_.render);
      fs::create_directories(panels / rec.group_id);
      for (int s = 0; s < kGroupPanels; ++s) write_png(panel_file(panels, rec.group_id, s), group.panel(s));
      rec.rendered = true;
    } catch (const RenderError& e) {
      rec.error = std::string("RenderError: ") + e.what();
    } catch (const DomainError& e) {
      rec.error = std::string("DomainError: ") + e.what();
    }
  });

  std::vector<nlohmann::json> rows;
  std::size_t ok = 0;
  for (const auto& r : records) {
    rows.push_back(to_json(r));
    ok += r.rendered ? 1 : 0;
  }
  write_jsonl(dir / "groups.jsonl", rows);
  out.push_back(dir / "groups.jsonl");
  for (const auto& f : files_under(panels)) out.push_back(f);
  return {{"jobs", jobs.size()}, {"rendered", ok}, {"failed", jobs.size() - ok}};
}

nlohmann::json Pipeline::qc_stage(std::vector<fs::path>& out) {
  std::vector<GroupRecord> groups;
  for (const auto& j : read_jsonl(stage_dir("render") / "groups.jsonl")) {
    auto g = group_record_from_json(j);
    if (g.rendered) groups.push_back(std::move(g));
  }
  const auto panels = stage_dir("render") / "panels";
  std::vector<QcVerdict> verdicts(groups.size());
  parallel_for(groups.size(), cfg_.workers, [&](std::size_t i) {
    ImageGroup g;
    g.group_id = groups[i].group_id;
    g.rule_id = groups[i].rule_id;
    g.style = groups[i].style;
    for (int s = 0; s < kGroupPanels; ++s) g.panel(s) = read_png(panel_file(panels, g.group_id, s));
    verdicts[i] = qc_group(g, cfg_.qc);
  });
  std::vector<nlohmann::json> rows;
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    rows.push_back({{"group", groups[i].group_id},
                    {"rule", groups[i].rule_id},
                    {"style", to_string(groups[i].style)},
                    {"verdict", to_json(verdicts[i])}});
    accepted += verdicts[i].accepted ? 1 : 0;
  }
  const auto path = stage_dir("qc") / "verdicts.jsonl";
  write_jsonl(path, rows);
  out.push_back(path);
  return {{"groups", groups.size()}, {"accepted", accepted}, {"rejected", groups.size() - accepted}};
}

nlohmann::json Pipeline::assemble_stage(std::vector<fs::path>& out) {
  std::vector<GroupCard> cards;
  for (const auto& j : read_jsonl(stage_dir("qc") / "verdicts.jsonl")) {
    const auto v = verdict_from_json(j.at("verdict"));
    cards.push_back({j.at("group").get<std::string>(), j.at("rule").get<std::string>(),
                     parse_style(j.at("style").get<std::string>()), v.accepted, v.hashes});
  }
  const auto rules = read_rules_jsonl(stage_dir("evolve") / "pool.jsonl");
  const LineageGraph lineage(rules);
  const GroupPool pool(std::move(cards));
  auto result = assemble_all(pool, lineage, cfg_.stage_seed("assemble"), cfg_.expand, cfg_.workers);

  const auto sheets = cfg_.export_dir / "sheets";
  reset_dir(sheets);
  const auto panels = stage_dir("render") / "panels";
  // Puzzles of one group are contiguous; compose them together so each
  // group's panels are decoded once.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < result.puzzles.size();) {
    std::size_t j = i;
    while (j < result.puzzles.size() && result.puzzles[j].group_id == result.puzzles[i].group_id) ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  parallel_for(runs.size(), cfg_.workers, [&](std::size_t r) {
    std::map<std::pair<std::string, int>, ImageBuf> cache;
    const PanelSource source = [&](const PanelRef& ref) -> ImageBuf {
      auto key = std::make_pair(ref.group_id, ref.slot);
      if (auto it = cache.find(key); it != cache.end()) return it->second;
      const auto file = panel_file(panels, ref.group_id, ref.slot);
      if (!fs::exists(file)) throw MissingPanel("no panel " + file.generic_string());
      return cache.emplace(key, read_png(file)).first->second;
    };
    for (std::size_t k = runs[r].first; k < runs[r].second; ++k) {
      auto& p = result.puzzles[k];
      p.sheet = "sheets/" + p.id + ".png";
      write_png(cfg_.export_dir / p.sheet, compose_sheet(p, source, cfg_.sheet));
    }
  });

  std::vector<nlohmann::json> rows;
  std::map<std::string, std::size_t> per_variant;
  for (const auto& p : result.puzzles) {
    rows.push_back(to_json(p));
    ++per_variant[std::string(to_string(p.variant))];
  }
  const auto records = cfg_.export_dir / "records" / "puzzles.jsonl";
  write_jsonl(records, rows);
  std::vector<nlohmann::json> skipped;
  for (const auto& s : result.skipped) skipped.push_back({{"group", s.group_id}, {"reason", s.reason}});
  write_jsonl(stage_dir("assemble") / "skipped.jsonl", skipped);

  out.push_back(records);
  out.push_back(stage_dir("assemble") / "skipped.jsonl");
  for (const auto& f : files_under(sheets)) out.push_back(f);
  nlohmann::json summary = per_variant;
  summary["total"] = result.puzzles.size();
  summary["expanded_skipped"] = result.skipped.size();
  return summary;
}

namespace {

std::vector<Puzzle> read_puzzles(const fs::path& export_dir) {
  std::vector<Puzzle> out;
  for (const auto& j : read_jsonl(export_dir / "records" / "puzzles.jsonl")) out.push_back(puzzle_from_json(j));
  return out;
}

}  // namespace

nlohmann::json Pipeline::annotate_stage(std::vector<fs::path>& out) {
  const auto puzzles = read_puzzles(cfg_.export_dir);
  std::map<std::string, Rule> rules;
  for (auto& r : read_rules_jsonl(stage_dir("filter") / "retained.jsonl")) rules.emplace(r.id, std::move(r));
  std::vector<Annotation> notes(puzzles.size());
  parallel_for(puzzles.size(), cfg_.workers, [&](std::size_t i) {
    const auto& p = puzzles[i];
    AnnotationRequest req;
    req.puzzle_id = p.id;
    req.question = puzzle_prompt(p);
    req.answer = std::string(1, p.answer);
    if (auto it = rules.find(p.rule_id); it != rules.end()) req.rules = format_bullets(it->second.bullets);
    req.sheet_png = read_text_file(cfg_.export_dir / p.sheet);
    notes[i] = providers_.annotator->annotate(req);
  });
  std::vector<nlohmann::json> rows;
  for (std::size_t i = 0; i < puzzles.size(); ++i) {
    rows.push_back({{"puzzle", puzzles[i].id}, {"readability", notes[i].readability}, {"coherence", notes[i].reasonableness}});
  }
  const auto path = stage_dir("annotate") / "annotations.jsonl";
  write_jsonl(path, rows);
  out.push_back(path);
  return {{"annotated", puzzles.size()}};
}

nlohmann::json Pipeline::passrate_stage(std::vector<fs::path>& out) {
  const auto puzzles = read_puzzles(cfg_.export_dir);
  std::unique_ptr<Solver> solver;
  if (!cfg_.stub_providers) {
    solver = std::make_unique<HttpSolver>(cfg_.http);
  } else if (cfg_.solver == SolverKind::Random) {
    solver = std::make_unique<RandomSolver>();
  } else {
    // The answer key goes to the stub directly; requests never carry it.
    AnswerKey key;
    for (const auto& p : puzzles) key.emplace(p.id, std::string(1, p.answer));
    if (cfg_.solver == SolverKind::Oracle) {
      solver = std::make_unique<OracleSolver>(std::move(key));
    } else {
      solver = std::make_unique<AdversarialSolver>(std::move(key));
    }
  }
  const auto seed = cfg_.stage_seed("passrate");
  std::vector<PassRate> rates(puzzles.size());
  parallel_for(puzzles.size(), cfg_.workers, [&](std::size_t i) {
    const auto& p = puzzles[i];
    const auto req = solve_request(p, read_text_file(cfg_.export_dir / p.sheet));
    rates[i] = pass_rate(req, p.answer, *solver, cfg_.passrate_attempts, derive_seed(seed, p.id));
  });
  std::vector<nlohmann::json> rows;
  for (std::size_t i = 0; i < puzzles.size(); ++i) {
    rows.push_back({{"puzzle", puzzles[i].id}, {"successes", rates[i].successes}, {"attempts", rates[i].attempts}});
  }
  const auto path = stage_dir("passrate") / "passrates.jsonl";
  write_jsonl(path, rows);
  out.push_back(path);
  return {{"puzzles", puzzles.size()}, {"attempts", cfg_.passrate_attempts}};
}

namespace {

std::vector<AttributeRecord> join_records(const std::vector<Puzzle>& puzzles, const fs::path& annotations,
                                          const fs::path& passrates) {
  std::map<std::string, AttributeRecord> by_id;
  for (const auto& p : puzzles) {
    AttributeRecord r;
    r.puzzle_id = p.id;
    r.option_count = static_cast<int>(p.options.size());
    by_id.emplace(p.id, r);
  }
  auto find = [&](const nlohmann::json& j) -> AttributeRecord& {
    auto it = by_id.find(j.at("puzzle").get<std::string>());
    if (it == by_id.end()) throw InconsistentState("record for unknown puzzle " + j.at("puzzle").get<std::string>());
    return it->second;
  };
  for (const auto& j : read_jsonl(annotations)) {
    auto& r = find(j);
    r.readability = j.at("readability").get<int>();
    r.coherence = j.at("coherence").get<int>();
  }
  for (const auto& j : read_jsonl(passrates)) {
    auto& r = find(j);
    r.successes = j.at("successes").get<int>();
    r.attempts = j.at("attempts").get<int>();
  }
  std::vector<AttributeRecord> out;
  for (const auto& p : puzzles) out.push_back(by_id.at(p.id));
  return out;
}

}  // namespace

nlohmann::json Pipeline::sample_stage(std::vector<fs::path>& out) {
  const auto puzzles = read_puzzles(cfg_.export_dir);
  const auto records = join_records(puzzles, stage_dir("annotate") / "annotations.jsonl",
                                    stage_dir("passrate") / "passrates.jsonl");
  const auto ids = sample_training(records, cfg_.sample_n, cfg_.stage_seed("sample"), cfg_.sampler);
  std::size_t ten = 0;
  std::map<std::string, int> options;
  for (const auto& r : records) options[r.puzzle_id] = r.option_count;
  for (const auto& id : ids) ten += options.at(id) == 10 ? 1 : 0;
  const nlohmann::json doc = {{"n", ids.size()}, {"four_option", ids.size() - ten}, {"ten_option", ten}, {"ids", ids}};
  const auto path = stage_dir("sample") / "sample.json";
  write_file_atomic(path, doc.dump(2) + "\n");
  out.push_back(path);
  return {{"n", ids.size()}, {"four_option", ids.size() - ten}, {"ten_option", ten}};
}

nlohmann::json Pipeline::stats_stage(std::vector<fs::path>& out) {
  const auto& ex = cfg_.export_dir;
  StageCounts c;
  c.seeds = read_jsonl(stage_dir("seed-import") / "seeds.jsonl").size();
  c.generated = read_jsonl(stage_dir("evolve") / "pool.jsonl").size();
  c.deduplicated = read_jsonl(stage_dir("filter") / "scored.jsonl").size();
  const auto retained = read_rules_jsonl(stage_dir("filter") / "retained.jsonl");
  c.retained = retained.size();
  for (const auto& j : read_jsonl(stage_dir("render") / "groups.jsonl")) {
    const auto g = group_record_from_json(j);
    if (g.rendered) {
      ++c.groups_per_style[std::string(to_string(g.style))];
    } else {
      ++c.render_failures;
    }
  }
  const auto verdicts = read_jsonl(stage_dir("qc") / "verdicts.jsonl");
  std::vector<std::string> accepted;
  for (const auto& j : verdicts) {
    auto& n = c.accepted_per_style[j.at("style").get<std::string>()];
    if (j.at("verdict").at("accepted").get<bool>()) {
      ++n;
      accepted.push_back(j.at("group").get<std::string>());
    }
  }
  const auto puzzles = read_puzzles(ex);
  for (const auto& p : puzzles) {
    switch (p.variant) {
      case Variant::Default4: ++c.default_puzzles; break;
      case Variant::Shuffled4: ++c.shuffled_puzzles; break;
      case Variant::Expanded10: ++c.expanded_puzzles; break;
    }
  }
  c.expanded_skipped = read_jsonl(stage_dir("assemble") / "skipped.jsonl").size();
  const auto records = join_records(puzzles, stage_dir("annotate") / "annotations.jsonl",
                                    stage_dir("passrate") / "passrates.jsonl");

  // Export: accepted panels, records, then the manifest indexing them.
  const auto panels_out = ex / "panels";
  reset_dir(panels_out);
  const auto panels_in = stage_dir("render") / "panels";
  for (const auto& gid : accepted) {
    fs::create_directories(panels_out / gid);
    for (int s = 0; s < kGroupPanels; ++s) {
      fs::copy_file(panel_file(panels_in, gid, s), panel_file(panels_out, gid, s), fs::copy_options::overwrite_existing);
    }
  }
  const auto rec_dir = ex / "records";
  write_rules_jsonl(rec_dir / "rules.jsonl", retained);
  write_jsonl(rec_dir / "groups.jsonl", verdicts);
  std::vector<nlohmann::json> attr;
  for (const auto& r : records) attr.push_back(to_json(r));
  write_jsonl(rec_dir / "attributes.jsonl", attr);
  fs::copy_file(stage_dir("sample") / "sample.json", rec_dir / "sample.json", fs::copy_options::overwrite_existing);

  ManifestInputs in;
  in.counts = c;
  in.records = records;
  const auto manifest_path = ex / "manifest.json";
  fs::remove(manifest_path);
  for (const auto& f : files_under(ex)) {
    in.files.emplace_back(f.lexically_relative(ex).generic_string(), file_sha(f));
  }
  const auto manifest = build_manifest(in);
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  for (const char* f : {"rules.jsonl", "groups.jsonl", "attributes.jsonl", "sample.json"}) out.push_back(rec_dir / f);
  for (const auto& f : files_under(panels_out)) out.push_back(f);
  out.push_back(manifest_path);
  return manifest.at("counts").at("puzzles");
}

}  // namespace vlsynth
