#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vlsynth/assembly.hpp"
#include "vlsynth/providers.hpp"

namespace vlsynth {

struct AttributeRecord {
  std::string puzzle_id;
  int option_count = 4;  // 4 or 10
  int readability = 0;   // 1-5
  int coherence = 0;     // 1-5
  int successes = 0;
  int attempts = 0;

  double pass_rate() const noexcept { return attempts > 0 ? static_cast<double>(successes) / attempts : 0.0; }
  friend bool operator==(const AttributeRecord&, const AttributeRecord&) = default;
};

nlohmann::json to_json(const AttributeRecord& r);
AttributeRecord attribute_record_from_json(const nlohmann::json& j);

enum class Difficulty { Easy, Medium, Hard, Unbinned };

std::string_view to_string(Difficulty d) noexcept;

/// Easy: 0.5 <= p <= 0.75; Medium: 0.25 <= p < 0.5; Hard: p == 0.
/// PreconditionError when the record has no attempts.
Difficulty bin_difficulty(const AttributeRecord& rec);

struct SamplerConfig {
  double min_pass = 0.375;
  double max_pass = 0.875;
  int min_quality = 8;  // readability + coherence
  double four_option_share = 0.8;
};

/// n eligible puzzle ids: round(share * n) four-option and the rest
/// ten-option, each drawn uniformly without replacement. Output keeps the
/// records' order. Throws InsufficientPool naming the shortfalls.
std::vector<std::string> sample_training(std::span<const AttributeRecord> records, std::size_t n,
                                         std::uint64_t seed, const SamplerConfig& cfg = {});

struct PassRate {
  int successes = 0;
  int attempts = 0;
};

/// k independent solve attempts; attempt i uses seed derive_seed(seed, i).
/// The solver only sees the request, never the answer.
PassRate pass_rate(const SolveRequest& req, char answer, Solver& solver, int k, std::uint64_t seed);

/// Solve request for a puzzle: prompt, option labels and the encoded sheet.
SolveRequest solve_request(const Puzzle& p, std::string sheet_png);

struct StageCounts {
  std::size_t seeds = 0;
  std::size_t generated = 0;  // pool after evolution, seeds included
  std::size_t deduplicated = 0;
  std::size_t retained = 0;  // after the score filter
  std::map<std::string, std::size_t> groups_per_style;  // rendered successfully
  std::size_t render_failures = 0;
  std::map<std::string, std::size_t> accepted_per_style;
  std::size_t default_puzzles = 0;
  std::size_t shuffled_puzzles = 0;
  std::size_t expanded_puzzles = 0;
  std::size_t expanded_skipped = 0;

  std::size_t rendered_groups() const;
  std::size_t accepted_groups() const;
  std::size_t total_puzzles() const { return default_puzzles + shuffled_puzzles + expanded_puzzles; }
};

struct ManifestInputs {
  StageCounts counts;
  std::vector<AttributeRecord> records;
  // Output files relative to the export root, with their SHA-256.
  std::vector<std::pair<std::string, std::string>> files;
};

/// Manifest document: stage counts, histograms of readability, coherence
/// and pass rate (10 buckets of width 0.1, the last closed), difficulty bin
/// counts and the file index. Throws InconsistentState when a count
/// identity does not hold.
nlohmann::json build_manifest(const ManifestInputs& in);

}  // namespace vlsynth
