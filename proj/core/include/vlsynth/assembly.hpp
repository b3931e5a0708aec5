#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vlsynth/group.hpp"
#include "vlsynth/image.hpp"
#include "vlsynth/image_qc.hpp"
#include "vlsynth/rule.hpp"

namespace vlsynth {

enum class Variant { Default4, Shuffled4, Expanded10 };

std::string_view to_string(Variant v) noexcept;
Variant parse_variant(std::string_view s);

// What assembly needs to know about a rendered group. Pixels stay on disk;
// only compose_sheet loads them.
struct GroupCard {
  std::string group_id;
  std::string rule_id;
  StyleId style = StyleId::MonochromeVector;
  bool accepted = false;
  std::array<PHash, kGroupPanels> hashes{};
};

/// Card for a group that has been through QC (PreconditionError otherwise).
GroupCard card_of(const ImageGroup& group);

struct PanelRef {
  std::string group_id;
  int slot = 0;  // 0-4 correct, 5-7 incorrect
  friend bool operator==(const PanelRef&, const PanelRef&) = default;
};

struct PuzzleOption {
  char label = 'A';
  PanelRef panel;
  friend bool operator==(const PuzzleOption&, const PuzzleOption&) = default;
};

struct Puzzle {
  std::string id;
  std::string group_id;
  Variant variant = Variant::Default4;
  int position = -1;  // Shuffled4 only: index of the correct option
  std::array<PanelRef, 4> stem;
  std::vector<PuzzleOption> options;
  char answer = 'A';
  std::string rule_id;
  StyleId style = StyleId::MonochromeVector;
  std::vector<std::string> donors;  // Expanded10 only
  std::string donor_source;          // "lineage" or "fallback"
  std::uint64_t rng_seed = 0;
  std::string sheet;  // sheet path relative to the export root

  /// The option the answer label points at. Throws DomainError when the
  /// label is not among the options.
  const PanelRef& answer_panel() const;
  friend bool operator==(const Puzzle&, const Puzzle&) = default;
};

nlohmann::json to_json(const Puzzle& p);
Puzzle puzzle_from_json(const nlohmann::json& j);

/// Four options (correct 5th panel plus the 3 distractors) in seeded order.
/// Throws RejectedGroup for a group that did not pass QC.
Puzzle assemble_default(const GroupCard& group, std::uint64_t seed);

/// Four puzzles placing the correct panel at A, B, C and D. The distractor
/// order comes from the group id alone.
std::array<Puzzle, 4> assemble_shuffled(const GroupCard& group);

class LineageGraph {
 public:
  explicit LineageGraph(std::span<const Rule> rules);

  const Rule* find(const std::string& rule_id) const;
  /// Ancestors by increasing distance, then descendants by increasing
  /// distance; ties broken by rule id. The rule itself is excluded.
  std::vector<std::string> relatives(const std::string& rule_id) const;

 private:
  std::unordered_map<std::string, const Rule*> rules_;
  std::unordered_map<std::string, std::vector<std::string>> parents_;
  std::unordered_map<std::string, std::vector<std::string>> children_;
};

/// Accepted groups indexed by id.
class GroupPool {
 public:
  explicit GroupPool(std::vector<GroupCard> cards);

  const GroupCard* find(const std::string& group_id) const;
  const std::vector<GroupCard>& cards() const noexcept { return cards_; }

 private:
  std::vector<GroupCard> cards_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Accepted groups of related rules in the group's style, nearest first.
std::vector<const GroupCard*> related_groups(const GroupCard& group, const LineageGraph& lineage,
                                             const GroupPool& pool);

/// The two nearest related groups. Throws InsufficientRelatives when fewer
/// than two exist.
std::array<GroupCard, 2> find_related_groups(const GroupCard& group, const LineageGraph& lineage,
                                             const GroupPool& pool);

struct ExpandOptions {
  int dup_threshold = 10;
  int retry_budget = 8;
};

/// Ten options: the correct panel, the group's 3 distractors and 3 panels
/// from each donor, pairwise at pHash distance >= dup_threshold. Throws
/// DuplicateOption when no such draw is found within the retry budget.
Puzzle assemble_expanded(const GroupCard& group, const std::array<GroupCard, 2>& donors, std::uint64_t seed,
                         const ExpandOptions& opts = {});

/// Text prompt handed to solvers along with the sheet.
std::string puzzle_prompt(const Puzzle& p);

struct SheetLayout {
  int gutter = 8;
  int border = 1;
  Rgb border_color{150, 150, 150};
};

using PanelSource = std::function<ImageBuf(const PanelRef&)>;

/// Stem strip (4 panels and a question-mark cell) above the captioned
/// options (one row of 4, or two rows of 5). The source should throw
/// MissingPanel for unknown refs.
ImageBuf compose_sheet(const Puzzle& p, const PanelSource& panels, const SheetLayout& layout = {});

/// Sheet size for a given panel size; compose_sheet output always matches.
std::pair<int, int> sheet_size(Variant v, int panel_size, const SheetLayout& layout = {});

struct ExpandedSkip {
  std::string group_id;
  std::string reason;
};

struct AssemblyResult {
  std::vector<Puzzle> puzzles;  // per group: default, 4 shuffled, expanded
  std::vector<ExpandedSkip> skipped;
};

/// Every accepted group in `pool` yields 1 default, 4 shuffled and, when
/// donors are found, 1 expanded puzzle. Donors come from lineage relatives
/// first, then from same-class groups in the same style, then from any
/// group in the same style.
AssemblyResult assemble_all(const GroupPool& pool, const LineageGraph& lineage, std::uint64_t seed,
                            const ExpandOptions& opts = {}, int workers = 1);

}  // namespace vlsynth
