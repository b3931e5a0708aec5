#include "fidelity.hpp"

#include <cmath>
#include <sstream>

#include "oracles.hpp"

namespace oracle {

using namespace vlsynth;

namespace {

bool nose_shape(ShapeKind k) {
  return k == ShapeKind::Circle || k == ShapeKind::Square || k == ShapeKind::Triangle || k == ShapeKind::Composite;
}

bool headings_measurable(const RuleProgram& p) {
  return nose_shape(p.entity.kind) || p.entity.kind == ShapeKind::StickFigure;
}

// First progression whose fifth value differs from an earlier one.
const AttributeProgression* swap_target(const RuleProgram& p) {
  for (const auto& prog : p.progressions) {
    for (int i = 0; i < 4; ++i) {
      if (prog.attribute == Attribute::Position) {
        const auto a = scheduled_offset(prog, i), b = scheduled_offset(prog, 4);
        if (a.dx != b.dx || a.dy != b.dy) return &prog;
      } else if (scheduled_scalar(prog, i) != scheduled_scalar(prog, 4)) {
        return &prog;
      }
    }
  }
  return nullptr;
}

std::string where(StyleId style, int slot) {
  return std::string(to_string(style)) + " " + panel_name(slot) + ": ";
}

}  // namespace

std::vector<std::string> check_fidelity(const RuleProgram& program, StyleId style, std::uint64_t seed,
                                        const RenderConfig& cfg, const FidelityTolerance& tol) {
  std::vector<std::string> errors;
  auto fail = [&](int slot, const std::string& msg) { errors.push_back(where(style, slot) + msg); };

  const ImageGroup group = render_group(program, style, seed, cfg);
  const double scale = cfg.panel_size / 256.0;
  const bool mono = style != StyleId::FreePalette;

  std::optional<ImageGroup> reference;
  const auto* position = program.find(Attribute::Position);
  if (position) {
    RuleProgram still = program;
    std::erase_if(still.progressions, [](const auto& p) { return p.attribute == Attribute::Position; });
    still.violations.assign(3, ViolationRecipe::WrongShape);
    reference = render_group(still, style, seed, cfg);
  }

  const auto* count = program.find(Attribute::Count);
  const auto* lines = program.find(Attribute::ParallelLineGroups);
  const auto* rotation = program.find(Attribute::RotationDeg);
  const auto* shading = program.find(Attribute::Shading);
  const ShapeKind kind = program.entity.kind;

  auto expected_count = [&](int i) -> int {
    if (count) return static_cast<int>(std::lround(scheduled_scalar(*count, i)));
    if (lines) return static_cast<int>(std::lround(scheduled_scalar(*lines, i)));
    return 1;
  };
  auto shift_of = [&](int slot) {
    const auto [x, y] = ink_centroid(group.panel(slot));
    const auto [rx, ry] = ink_centroid(reference->panel(slot < kCorrectPanels ? slot : kCorrectPanels - 1));
    return std::pair{x - rx, y - ry};
  };

  // Correct panels.
  for (int i = 0; i < kCorrectPanels; ++i) {
    const auto& img = group.panel(i);
    const auto n = measure_count(img, kind);
    if (!n || *n != expected_count(i)) {
      fail(i, "count " + (n ? std::to_string(*n) : std::string("?")) + " != " + std::to_string(expected_count(i)));
    }
    if (rotation && headings_measurable(program)) {
      const double want = scheduled_scalar(*rotation, i);
      for (double h : measure_headings(img, heading_cue(kind))) {
        if (angle_diff(h, want) > tol.rotation_deg) {
          std::ostringstream ss;
          ss << "heading " << h << " vs " << want;
          fail(i, ss.str());
        }
      }
    }
    if (position) {
      const auto [dx, dy] = shift_of(i);
      const auto off = scheduled_offset(*position, i);
      const double err = std::hypot(dx - off.dx * scale, dy - off.dy * scale);
      if (err > tol.shift_px) {
        std::ostringstream ss;
        ss << "centroid shift (" << dx << "," << dy << ") vs (" << off.dx * scale << "," << off.dy * scale << ")";
        fail(i, ss.str());
      }
    }
    if (shading && mono) {
      const double s = measure_center_shade(img);
      const double want = scheduled_scalar(*shading, i);
      if (std::abs(s - want) > tol.shade) fail(i, "shade " + std::to_string(s) + " vs " + std::to_string(want));
    }
  }

  // Distractors: each must move the attribute its recipe names.
  const auto& answer = group.panel(kCorrectPanels - 1);
  auto differs = [&](int slot, Attribute a) -> bool {
    const auto& img = group.panel(slot);
    switch (a) {
      case Attribute::Count:
      case Attribute::ParallelLineGroups: {
        const auto n = measure_count(img, kind);
        return n && *n != expected_count(kCorrectPanels - 1);
      }
      case Attribute::RotationDeg: {
        const double want = scheduled_scalar(*rotation, kCorrectPanels - 1);
        const auto hs = measure_headings(img, heading_cue(kind));
        if (hs.empty()) return false;
        for (double h : hs) {
          if (angle_diff(h, want) <= tol.rotation_deg) return false;
        }
        return true;
      }
      case Attribute::Position: {
        const auto [x, y] = ink_centroid(img);
        const auto [ax, ay] = ink_centroid(answer);
        return std::hypot(x - ax, y - ay) > tol.shift_px;
      }
      case Attribute::Shading: {
        if (mono) return std::abs(measure_center_shade(img) - scheduled_scalar(*shading, kCorrectPanels - 1)) > tol.shade;
        return std::abs(measure_center_shade(img) - measure_center_shade(answer)) > tol.shade;
      }
    }
    return false;
  };

  for (int k = 0; k < kIncorrectPanels; ++k) {
    const int slot = kCorrectPanels + k;
    const auto recipe = program.violations[static_cast<std::size_t>(k)];
    bool ok = false;
    switch (recipe) {
      case ViolationRecipe::CountOff: ok = differs(slot, Attribute::Count); break;
      case ViolationRecipe::LinesOff: ok = differs(slot, Attribute::ParallelLineGroups); break;
      case ViolationRecipe::RotationOff: ok = differs(slot, Attribute::RotationDeg); break;
      case ViolationRecipe::PositionOff: ok = differs(slot, Attribute::Position); break;
      case ViolationRecipe::ShadingOff: ok = differs(slot, Attribute::Shading); break;
      case ViolationRecipe::OrderSwap: {
        const auto* t = swap_target(program);
        ok = t && differs(slot, t->attribute);
        break;
      }
      case ViolationRecipe::WrongFill: {
        const double a = static_cast<double>(enclosed_white(answer));
        const double b = static_cast<double>(enclosed_white(group.panel(slot)));
        ok = std::abs(a - b) > 0.1 * std::max(a, b);
        break;
      }
      case ViolationRecipe::WrongShape:
        ok = std::abs(shape_signature(group.panel(slot)) - shape_signature(answer)) > 0.1;
        break;
    }
    if (!ok) fail(slot, std::string("does not violate ") + std::string(to_string(recipe)));
  }
  return errors;
}

}  // namespace oracle
