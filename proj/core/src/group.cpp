#include "vlsynth/group.hpp"

#include <nlohmann/json.hpp>

#include "vlsynth/errors.hpp"
#include "vlsynth/hash.hpp"

namespace vlsynth {

std::string_view to_string(StyleId s) noexcept {
  switch (s) {
    case StyleId::MonochromeVector: return "monochrome_vector";
    case StyleId::MonochromeRaster: return "monochrome_raster";
    case StyleId::FreePalette: return "free_palette";
  }
  return "monochrome_vector";
}

std::string_view style_tag(StyleId s) noexcept {
  switch (s) {
    case StyleId::MonochromeVector: return "s1";
    case StyleId::MonochromeRaster: return "s2";
    case StyleId::FreePalette: return "s3";
  }
  return "s1";
}

StyleId parse_style(std::string_view name) {
  for (auto s : kAllStyles) {
    if (name == to_string(s) || name == style_tag(s)) return s;
  }
  throw ConfigError("unknown style '" + std::string(name) + "'");
}

std::string panel_name(int slot) {
  if (slot < 0 || slot >= kGroupPanels) throw DomainError("panel slot out of range");
  return slot < kCorrectPanels ? "c" + std::to_string(slot) : "x" + std::to_string(slot - kCorrectPanels);
}

const ImageBuf& ImageGroup::panel(int slot) const {
  if (slot < 0 || slot >= kGroupPanels) throw DomainError("panel slot out of range");
  return slot < kCorrectPanels ? correct[static_cast<std::size_t>(slot)]
                               : incorrect[static_cast<std::size_t>(slot - kCorrectPanels)];
}

ImageBuf& ImageGroup::panel(int slot) {
  return const_cast<ImageBuf&>(static_cast<const ImageGroup&>(*this).panel(slot));
}

std::string group_id_for(std::string_view rule_id, StyleId style) {
  return std::string(rule_id) + "-" + std::string(style_tag(style));
}

nlohmann::json to_json(const QcVerdict& v) {
  nlohmann::json reasons = nlohmann::json::array();
  for (const auto& r : v.reasons) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, DuplicatePair>) {
            reasons.push_back({{"kind", "duplicate_pair"}, {"i", x.i}, {"j", x.j}, {"distance", x.distance}});
          } else if constexpr (std::is_same_v<T, Blank>) {
            reasons.push_back({{"kind", "blank"}, {"panel", x.panel}, {"score", x.score}});
          } else {
            reasons.push_back({{"kind", "low_detail"}, {"panel", x.panel}, {"energy", x.energy}});
          }
        },
        r);
  }
  nlohmann::json hashes = nlohmann::json::array();
  for (auto h : v.hashes) hashes.push_back(hex64(h));
  return {{"accepted", v.accepted}, {"reasons", reasons}, {"phash", hashes}};
}

QcVerdict verdict_from_json(const nlohmann::json& j) {
  QcVerdict v;
  v.accepted = j.at("accepted").get<bool>();
  for (const auto& r : j.at("reasons")) {
    const auto kind = r.at("kind").get<std::string>();
    if (kind == "duplicate_pair") {
      v.reasons.emplace_back(DuplicatePair{r.at("i").get<int>(), r.at("j").get<int>(), r.at("distance").get<int>()});
    } else if (kind == "blank") {
      v.reasons.emplace_back(Blank{r.at("panel").get<int>(), r.at("score").get<double>()});
    } else {
      v.reasons.emplace_back(LowDetail{r.at("panel").get<int>(), r.at("energy").get<double>()});
    }
  }
  if (j.contains("phash")) {
    const auto& hs = j.at("phash");
    for (std::size_t i = 0; i < v.hashes.size() && i < hs.size(); ++i) {
      v.hashes[i] = std::stoull(hs[i].get<std::string>(), nullptr, 16);
    }
  }
  return v;
}

}  // namespace vlsynth
