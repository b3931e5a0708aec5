#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vlsynth/image.hpp"

namespace vlsynth {

enum class StyleId { MonochromeVector, MonochromeRaster, FreePalette };

inline constexpr std::array<StyleId, 3> kAllStyles = {StyleId::MonochromeVector, StyleId::MonochromeRaster,
                                                      StyleId::FreePalette};

std::string_view to_string(StyleId s) noexcept;
// Short tag used in group ids: s1, s2, s3.
std::string_view style_tag(StyleId s) noexcept;
StyleId parse_style(std::string_view name);

inline constexpr int kCorrectPanels = 5;
inline constexpr int kIncorrectPanels = 3;
inline constexpr int kGroupPanels = kCorrectPanels + kIncorrectPanels;

// Panel slot within a group: 0-4 are the rule-conforming panels c0..c4,
// 5-7 the rule-violating panels x0..x2.
std::string panel_name(int slot);

struct DuplicatePair {
  int i = 0;
  int j = 0;
  int distance = 0;
  friend bool operator==(const DuplicatePair&, const DuplicatePair&) = default;
};
struct Blank {
  int panel = 0;
  double score = 0.0;
  friend bool operator==(const Blank&, const Blank&) = default;
};
struct LowDetail {
  int panel = 0;
  double energy = 0.0;
  friend bool operator==(const LowDetail&, const LowDetail&) = default;
};

using QcReason = std::variant<DuplicatePair, Blank, LowDetail>;

struct QcVerdict {
  bool accepted = true;
  std::vector<QcReason> reasons;
  std::array<std::uint64_t, kGroupPanels> hashes{};

  friend bool operator==(const QcVerdict&, const QcVerdict&) = default;
};

nlohmann::json to_json(const QcVerdict& v);
QcVerdict verdict_from_json(const nlohmann::json& j);

struct ImageGroup {
  std::string group_id;
  std::string rule_id;
  StyleId style = StyleId::MonochromeVector;
  std::array<ImageBuf, kCorrectPanels> correct;
  std::array<ImageBuf, kIncorrectPanels> incorrect;
  std::optional<QcVerdict> qc;

  const ImageBuf& panel(int slot) const;
  ImageBuf& panel(int slot);
};

std::string group_id_for(std::string_view rule_id, StyleId style);

}  // namespace vlsynth
