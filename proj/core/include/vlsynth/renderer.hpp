#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlsynth/group.hpp"
#include "vlsynth/rule_dsl.hpp"

namespace vlsynth {

struct RenderConfig {
  int panel_size = 256;
  // Fraction of the panel kept clear on every side.
  double margin = 0.1;
};

// Concrete attribute values one panel realizes.
struct PanelState {
  EntitySpec entity;
  int count = 1;
  double rotation_deg = 0.0;
  Offset position;
  double shading = 1.0;
  int line_groups = 0;
};

/// States for the 8 panels of a group: 5 scheduled panels, then one state per
/// violation recipe applied to the panel-5 state. Throws RenderError when no
/// violating value can be found.
std::array<PanelState, kGroupPanels> plan_group(const RuleProgram& program, const RenderConfig& cfg = {});

/// Number of entity slots the layout offers for count-driven placement.
int layout_capacity(const RuleProgram& program);

/// Connected ink components one entity of this kind produces.
int components_per_entity(ShapeKind kind) noexcept;

/// Render 5 rule-conforming and 3 rule-violating panels. Deterministic in
/// (program, style, seed, cfg). Throws RenderError when geometry does not fit
/// the panel.
ImageGroup render_group(const RuleProgram& program, StyleId style, std::uint64_t seed, const RenderConfig& cfg = {});

struct StyleRender {
  StyleId style;
  std::optional<ImageGroup> group;
  std::string error;  // set when rendering this style failed
};

/// One group per style; a failure in one style does not stop the others.
std::array<StyleRender, 3> render_all_styles(const RuleProgram& program, std::uint64_t seed,
                                             const RenderConfig& cfg = {});

}  // namespace vlsynth
