#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlsynth/group.hpp"
#include "vlsynth/renderer.hpp"
#include "vlsynth/rule_dsl.hpp"

namespace oracle {

struct FidelityTolerance {
  double rotation_deg = 2.0;
  double shift_px = 2.0;
  double shade = 0.02;
};

// Render the program in one style and measure every panel. Correct panels
// must show the scheduled count (exact), heading (within tolerance) and
// position (centroid shift within tolerance); each distractor must differ
// from the fifth panel in the attribute its recipe targets. Returns one
// message per mismatch.
std::vector<std::string> check_fidelity(const vlsynth::RuleProgram& program, vlsynth::StyleId style,
                                        std::uint64_t seed, const vlsynth::RenderConfig& cfg,
                                        const FidelityTolerance& tol = {});

}  // namespace oracle
