#pragma once

#include <span>
#include <string_view>

namespace vlsynth::detail {

struct PromptAsset {
  std::string_view id;
  std::string_view text;
};

// Generated at build time from core/assets/prompts/*.txt.
std::span<const PromptAsset> prompt_assets();

}  // namespace vlsynth::detail
