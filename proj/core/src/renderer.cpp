#include "vlsynth/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vlsynth/raster.hpp"
#include "vlsynth/rng.hpp"

namespace vlsynth {

namespace {

constexpr double kReferencePanel = 256.0;
// Smallest sideways step of a position distractor, in reference pixels.
constexpr double kMinPositionOff = 40.0;

struct Lattice {
  int cols = 3;
  int rows = 3;
  bool split = false;  // two clusters separated by a gutter (two-group layout)
};

Lattice lattice_for(const RuleProgram& p) {
  switch (p.layout) {
    case Layout::Sequence5:
      switch (p.entity.size) {
        case SizeClass::Small: return {4, 4, false};
        case SizeClass::Medium: return {3, 3, false};
        case SizeClass::Large: return {2, 2, false};
      }
      break;
    case Layout::Grid3x3: return {3, 3, false};
    case Layout::AnalogyPair: return {3, 2, false};
    case Layout::TwoGroupSplit: return {4, 2, true};
  }
  return {3, 3, false};
}

double multi_size_factor(SizeClass s) {
  switch (s) {
    case SizeClass::Small: return 0.55;
    case SizeClass::Medium: return 0.7;
    case SizeClass::Large: return 0.8;
  }
  return 0.7;
}

double single_size_factor(SizeClass s) {
  switch (s) {
    case SizeClass::Small: return 0.3;
    case SizeClass::Medium: return 0.45;
    case SizeClass::Large: return 0.6;
  }
  return 0.45;
}

bool uses_slots(const RuleProgram& p) {
  return p.governs(Attribute::Count) || p.governs(Attribute::ParallelLineGroups);
}

bool has_nose(const RuleProgram& p, ShapeKind kind) {
  return p.governs(Attribute::RotationDeg) &&
         (kind == ShapeKind::Circle || kind == ShapeKind::Square || kind == ShapeKind::Triangle ||
          kind == ShapeKind::Composite);
}

struct StylePaint {
  int supersample = 4;
  double stroke = 2.0;
  Rgb ink = kBlack;
  Rgb fill = kBlack;
};

struct PalettePair {
  Rgb ink;
  Rgb fill;
};

constexpr std::array<PalettePair, 6> kPalette = {{
    {{38, 70, 83}, {42, 157, 143}},
    {{29, 53, 87}, {230, 57, 70}},
    {{61, 64, 91}, {244, 162, 97}},
    {{40, 54, 24}, {96, 108, 56}},
    {{72, 52, 112}, {255, 183, 3}},
    {{20, 33, 61}, {252, 163, 17}},
}};

StylePaint paint_for(StyleId style, int panel, std::uint64_t seed) {
  const double p = panel;
  switch (style) {
    case StyleId::MonochromeVector: return {4, std::max(1.5, p / 85.0), kBlack, kBlack};
    case StyleId::MonochromeRaster: return {1, std::max(2.0, std::round(p / 50.0)), kBlack, kBlack};
    case StyleId::FreePalette: {
      const auto& pair = kPalette[derive_seed(seed, "palette") % kPalette.size()];
      return {4, std::max(1.5, p / 70.0), pair.ink, pair.fill};
    }
  }
  return {};
}

Rgb shade_color(Rgb fill, double shade) {
  auto ch = [&](std::uint8_t f) {
    return static_cast<std::uint8_t>(std::lround(255.0 + (static_cast<double>(f) - 255.0) * shade));
  };
  return {ch(fill.r), ch(fill.g), ch(fill.b)};
}

ShapeKind wrong_kind(ShapeKind k) {
  switch (k) {
    case ShapeKind::Circle: return ShapeKind::Square;
    case ShapeKind::Square: return ShapeKind::Triangle;
    case ShapeKind::Triangle: return ShapeKind::Circle;
    case ShapeKind::LineGroup: return ShapeKind::Square;
    case ShapeKind::StickFigure: return ShapeKind::Circle;
    case ShapeKind::Composite: return ShapeKind::Triangle;
  }
  return ShapeKind::Square;
}

double mod360(double a) {
  double m = std::fmod(a, 360.0);
  if (m < 0) m += 360.0;
  return m;
}

bool same_angle(double a, double b) {
  const double d = mod360(a - b);
  return d < 1e-6 || d > 360.0 - 1e-6;
}

void set_attribute(PanelState& st, Attribute a, const AttributeValue& v) {
  switch (a) {
    case Attribute::Count: st.count = static_cast<int>(std::lround(scalar(v))); break;
    case Attribute::RotationDeg: st.rotation_deg = scalar(v); break;
    case Attribute::Position: st.position = offset(v); break;
    case Attribute::Shading: st.shading = scalar(v); break;
    case Attribute::ParallelLineGroups: st.line_groups = static_cast<int>(std::lround(scalar(v))); break;
  }
}

int count_off_value(const AttributeProgression& p, int base, int capacity) {
  std::vector<int> exclude;
  for (int i = 0; i <= kCorrectPanels; ++i) {
    const double v = scalar(progression_value_at(p, i));
    if (v >= 0 && v == std::round(v)) exclude.push_back(static_cast<int>(v));
  }
  for (int delta = 1; delta <= capacity + base; ++delta) {
    for (int sign : {1, -1}) {
      const int c = base + sign * delta;
      if (c < 1 || c > capacity) continue;
      if (std::find(exclude.begin(), exclude.end(), c) == exclude.end()) return c;
    }
  }
  throw RenderError("no rule-violating count fits the layout");
}

double rotation_off_value(const AttributeProgression& p) {
  const double base = scalar(progression_value_at(p, kCorrectPanels - 1));
  for (double delta : {90.0, -90.0, 45.0, -45.0, 135.0, -135.0, 180.0}) {
    const double cand = base + delta;
    bool clash = false;
    for (int i = 0; i <= kCorrectPanels; ++i) {
      if (same_angle(cand, scalar(progression_value_at(p, i)))) clash = true;
    }
    if (!clash) return cand;
  }
  throw RenderError("no rule-violating rotation found");
}

Offset position_off_value(const AttributeProgression& p) {
  const auto& shift = std::get<Shift>(p.schedule);
  const Offset base = offset(progression_value_at(p, kCorrectPanels - 1));
  const double mag = std::hypot(shift.dx, shift.dy);
  if (mag == 0.0) return {base.dx + kMinPositionOff, base.dy};
  // Step sideways to the motion, towards the panel center so the entity
  // stays inside the frame.
  const double amount = std::max(2.0 * mag, kMinPositionOff);
  Offset perp{-shift.dy / mag, shift.dx / mag};
  if (perp.dx * base.dx + perp.dy * base.dy > 0) perp = {-perp.dx, -perp.dy};
  return {base.dx + perp.dx * amount, base.dy + perp.dy * amount};
}

double shading_off_value(const AttributeProgression& p) {
  const double base = scalar(progression_value_at(p, kCorrectPanels - 1));
  const double next = scalar(progression_value_at(p, kCorrectPanels));
  for (double cand : {1.0 - base, 0.0, 1.0, 0.5}) {
    if (std::abs(cand - base) >= 0.3 && std::abs(cand - next) >= 0.1) return cand;
  }
  throw RenderError("no rule-violating shading found");
}

struct Geometry {
  double panel = 256;
  double drawable = 0;
  double slot = 0;
  double x0 = 0;
  double y0 = 0;
  double gap = 0;
  Lattice lattice;
};

Geometry geometry_for(const RuleProgram& prog, const RenderConfig& cfg) {
  Geometry g;
  g.panel = cfg.panel_size;
  g.drawable = g.panel * (1.0 - 2.0 * cfg.margin);
  g.lattice = lattice_for(prog);
  const double cols = g.lattice.cols + (g.lattice.split ? 0.5 : 0.0);
  g.slot = std::min(g.drawable / cols, g.drawable / g.lattice.rows);
  g.gap = g.lattice.split ? 0.5 * g.slot : 0.0;
  g.x0 = g.panel / 2.0 - cols * g.slot / 2.0;
  g.y0 = g.panel / 2.0 - g.lattice.rows * g.slot / 2.0;
  return g;
}

Vec2 slot_center(const Geometry& g, int index) {
  const int c = index % g.lattice.cols;
  const int r = index / g.lattice.cols;
  double x = g.x0 + (c + 0.5) * g.slot;
  if (g.lattice.split && c >= g.lattice.cols / 2) x += g.gap;
  return {x, g.y0 + (r + 0.5) * g.slot};
}

// Nose tip distance from the entity center, in units of the radius.
double nose_reach(double r, double stroke) { return 1.45 + 1.5 * stroke / r; }

void draw_entity(Canvas& cv, ShapeKind kind, Vec2 c, double r, double rot_deg, double shade, bool nose,
                 const StylePaint& paint) {
  const Rotation rot(rot_deg);
  auto at = [&](double x, double y) { return c + rot.apply({x * r, y * r}); };
  const double w = paint.stroke;
  const Rgb fill = shade_color(paint.fill, shade);
  const bool filled = shade > 0.0;

  switch (kind) {
    case ShapeKind::Circle:
      if (filled) cv.fill_disk(c, r - w / 2.0, fill);
      cv.fill_ring(c, r, r - w, paint.ink);
      break;
    case ShapeKind::Square: {
      const double h = 0.82;
      const std::array<Vec2, 4> pts = {at(-h, -h), at(h, -h), at(h, h), at(-h, h)};
      if (filled) cv.fill_polygon(pts, fill);
      cv.stroke_polygon(pts, w, paint.ink);
      break;
    }
    case ShapeKind::Triangle: {
      const std::array<Vec2, 3> pts = {at(0.0, -1.0), at(0.8660254037844386, 0.5), at(-0.8660254037844386, 0.5)};
      if (filled) cv.fill_polygon(pts, fill);
      cv.stroke_polygon(pts, w, paint.ink);
      break;
    }
    case ShapeKind::LineGroup: {
      // Keep at least one stroke width of paper between the two lines.
      const double y = std::min(0.6, std::max(0.35, 1.5 * w / r));
      cv.stroke_segment(at(-0.8, -y), at(0.8, -y), w * 1.5, paint.ink);
      cv.stroke_segment(at(-0.8, y), at(0.8, y), w * 1.5, paint.ink);
      break;
    }
    case ShapeKind::StickFigure: {
      const Vec2 head = at(0.0, -0.62);
      if (filled) cv.fill_disk(head, 0.3 * r - w / 2.0, fill);
      cv.fill_ring(head, 0.3 * r, 0.3 * r - w, paint.ink);
      cv.stroke_segment(at(0.0, -0.32), at(0.0, 0.3), w, paint.ink);
      cv.stroke_segment(at(-0.5, -0.05), at(0.5, -0.05), w, paint.ink);
      cv.stroke_segment(at(0.0, 0.3), at(-0.4, 0.95), w, paint.ink);
      cv.stroke_segment(at(0.0, 0.3), at(0.4, 0.95), w, paint.ink);
      break;
    }
    case ShapeKind::Composite: {
      const double h = 0.85;
      const std::array<Vec2, 4> pts = {at(-h, -h), at(h, -h), at(h, h), at(-h, h)};
      cv.stroke_polygon(pts, w, paint.ink);
      if (filled) cv.fill_disk(c, 0.4 * r - w / 2.0, fill);
      cv.fill_ring(c, 0.4 * r, 0.4 * r - w, paint.ink);
      break;
    }
  }

  if (nose) {
    double base = -0.9;
    if (kind == ShapeKind::Square || kind == ShapeKind::Composite) base = -0.75;
    if (kind == ShapeKind::Triangle) base = -0.8;
    // Thick strokes swallow a nose sized by the radius alone, so it also
    // grows with the stroke.
    const double half = std::max(0.25, 0.75 * w / r);
    const std::array<Vec2, 3> tip = {at(-half, base), at(half, base), at(0.0, -nose_reach(r, w))};
    cv.fill_polygon(tip, paint.ink);
  }
}

ImageBuf draw_panel(const RuleProgram& prog, const PanelState& st, const Geometry& g, const StylePaint& paint,
                    std::uint64_t panel_seed) {
  Canvas cv(static_cast<int>(g.panel), static_cast<int>(g.panel), kWhite, paint.supersample);
  const bool slots = uses_slots(prog);
  const bool lines = prog.governs(Attribute::ParallelLineGroups);
  const bool nose = has_nose(prog, st.entity.kind);
  const double scale = g.panel / kReferencePanel;
  const Vec2 shift{st.position.dx * scale, st.position.dy * scale};

  double radius = slots ? 0.5 * g.slot * multi_size_factor(st.entity.size)
                        : 0.5 * g.drawable * single_size_factor(st.entity.size);
  if (prog.governs(Attribute::RotationDeg)) radius *= 0.7;
  const double extent = radius * (nose ? nose_reach(radius, paint.stroke) : 1.0) + paint.stroke;

  std::vector<Vec2> centers;
  if (slots) {
    const int n = lines ? st.line_groups : st.count;
    const int capacity = g.lattice.cols * g.lattice.rows;
    if (n > capacity) {
      throw RenderError("count " + std::to_string(n) + " exceeds layout capacity " + std::to_string(capacity));
    }
    std::vector<int> order(static_cast<std::size_t>(capacity));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(panel_seed);
    rng.shuffle(std::span<int>(order));
    order.resize(static_cast<std::size_t>(n));
    std::sort(order.begin(), order.end());
    const double jitter = 0.06 * g.slot;
    for (int idx : order) {
      Vec2 c = slot_center(g, idx);
      c.x += rng.uniform(-jitter, jitter);
      c.y += rng.uniform(-jitter, jitter);
      centers.push_back(c + shift);
    }
  } else {
    centers.push_back(Vec2{g.panel / 2.0, g.panel / 2.0} + shift);
  }

  for (const auto& c : centers) {
    if (c.x - extent < 0 || c.y - extent < 0 || c.x + extent > g.panel || c.y + extent > g.panel) {
      throw RenderError("geometry exceeds panel bounds");
    }
  }

  for (std::size_t j = 0; j < centers.size(); ++j) {
    double rot = st.rotation_deg;
    if (lines) rot += static_cast<double>(j % 4) * 45.0 + static_cast<double>(j / 4) * 22.5;
    draw_entity(cv, st.entity.kind, centers[j], radius, rot, st.shading, nose, paint);
  }
  return cv.take();
}

}  // namespace

int layout_capacity(const RuleProgram& program) {
  const auto l = lattice_for(program);
  return l.cols * l.rows;
}

int components_per_entity(ShapeKind kind) noexcept {
  switch (kind) {
    case ShapeKind::LineGroup:
    case ShapeKind::Composite:
      return 2;
    default:
      return 1;
  }
}

std::array<PanelState, kGroupPanels> plan_group(const RuleProgram& prog, const RenderConfig&) {
  std::array<PanelState, kGroupPanels> out{};
  for (int i = 0; i < kCorrectPanels; ++i) {
    PanelState st;
    st.entity = prog.entity;
    st.shading = prog.entity.fill == Fill::Solid ? 1.0 : 0.0;
    for (const auto& p : prog.progressions) {
      const auto values = progression_values(p, kCorrectPanels);
      set_attribute(st, p.attribute, values[static_cast<std::size_t>(i)]);
    }
    out[static_cast<std::size_t>(i)] = st;
  }

  const PanelState& answer = out[kCorrectPanels - 1];
  const int capacity = uses_slots(prog) ? layout_capacity(prog) : 1;
  for (int k = 0; k < kIncorrectPanels; ++k) {
    if (static_cast<std::size_t>(k) >= prog.violations.size()) throw RenderError("missing violation recipe");
    PanelState st = answer;
    switch (prog.violations[static_cast<std::size_t>(k)]) {
      case ViolationRecipe::CountOff:
        st.count = count_off_value(*prog.find(Attribute::Count), answer.count, capacity);
        break;
      case ViolationRecipe::LinesOff:
        st.line_groups = count_off_value(*prog.find(Attribute::ParallelLineGroups), answer.line_groups, capacity);
        break;
      case ViolationRecipe::RotationOff:
        st.rotation_deg = rotation_off_value(*prog.find(Attribute::RotationDeg));
        break;
      case ViolationRecipe::PositionOff:
        st.position = position_off_value(*prog.find(Attribute::Position));
        break;
      case ViolationRecipe::ShadingOff:
        st.shading = shading_off_value(*prog.find(Attribute::Shading));
        break;
      case ViolationRecipe::OrderSwap: {
        const auto* target = order_swap_target(prog);
        if (!target) throw RenderError("order_swap has no non-constant progression");
        const auto values = progression_values(*target, kCorrectPanels);
        const auto& last = values.back();
        for (int i = kCorrectPanels - 2; i >= 0; --i) {
          if (values[static_cast<std::size_t>(i)] != last) {
            set_attribute(st, target->attribute, values[static_cast<std::size_t>(i)]);
            break;
          }
        }
        break;
      }
      case ViolationRecipe::WrongFill:
        st.shading = 1.0 - st.shading;
        break;
      case ViolationRecipe::WrongShape:
        st.entity.kind = wrong_kind(st.entity.kind);
        break;
    }
    out[static_cast<std::size_t>(kCorrectPanels + k)] = st;
  }
  return out;
}

ImageGroup render_group(const RuleProgram& program, StyleId style, std::uint64_t seed, const RenderConfig& cfg) {
  if (cfg.panel_size < 16) throw RenderError("panel size below 16 pixels");
  const auto states = plan_group(program, cfg);
  const Geometry geo = geometry_for(program, cfg);
  const StylePaint paint = paint_for(style, cfg.panel_size, seed);
  ImageGroup group;
  group.style = style;
  for (int slot = 0; slot < kGroupPanels; ++slot) {
    group.panel(slot) =
        draw_panel(program, states[static_cast<std::size_t>(slot)], geo, paint, derive_seed(seed, slot));
  }
  return group;
}

std::array<StyleRender, 3> render_all_styles(const RuleProgram& program, std::uint64_t seed,
                                             const RenderConfig& cfg) {
  std::array<StyleRender, 3> out{};
  for (std::size_t i = 0; i < kAllStyles.size(); ++i) {
    out[i].style = kAllStyles[i];
    try {
      out[i].group = render_group(program, kAllStyles[i], seed, cfg);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

}  // namespace vlsynth
