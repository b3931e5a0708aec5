#include "vlsynth/raster.hpp"

#include <algorithm>
#include <array>
#include <numbers>

namespace vlsynth {

Rotation::Rotation(double degrees) {
  const double turns = degrees / 90.0;
  if (turns == std::round(turns)) {
    const long q = ((static_cast<long>(std::round(turns)) % 4) + 4) % 4;
    static constexpr std::array<std::pair<double, double>, 4> kQuarter = {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
    c = kQuarter[static_cast<std::size_t>(q)].first;
    s = kQuarter[static_cast<std::size_t>(q)].second;
  } else {
    const double rad = degrees * std::numbers::pi / 180.0;
    c = std::cos(rad);
    s = std::sin(rad);
  }
}

Canvas::Canvas(int width, int height, Rgb background, int supersample)
    : img_(width, height, background), ss_(std::max(1, supersample)) {}

template <typename Inside>
void Canvas::cover(double x0, double y0, double x1, double y1, Rgb color, Inside inside) {
  const int px0 = std::max(0, static_cast<int>(std::floor(x0)));
  const int py0 = std::max(0, static_cast<int>(std::floor(y0)));
  const int px1 = std::min(img_.width() - 1, static_cast<int>(std::ceil(x1)));
  const int py1 = std::min(img_.height() - 1, static_cast<int>(std::ceil(y1)));
  const int total = ss_ * ss_;
  const double step = 1.0 / ss_;
  for (int py = py0; py <= py1; ++py) {
    for (int px = px0; px <= px1; ++px) {
      int hits = 0;
      for (int j = 0; j < ss_; ++j) {
        const double sy = py + (j + 0.5) * step;
        for (int i = 0; i < ss_; ++i) {
          if (inside(px + (i + 0.5) * step, sy)) ++hits;
        }
      }
      if (hits == 0) continue;
      if (hits == total) {
        img_.set(px, py, color);
        continue;
      }
      const Rgb old = img_.at(px, py);
      auto mix = [&](std::uint8_t o, std::uint8_t n) {
        return static_cast<std::uint8_t>((o * (total - hits) + n * hits + total / 2) / total);
      };
      img_.set(px, py, {mix(old.r, color.r), mix(old.g, color.g), mix(old.b, color.b)});
    }
  }
}

void Canvas::fill_disk(Vec2 c, double r, Rgb color) {
  const double r2 = r * r;
  cover(c.x - r, c.y - r, c.x + r, c.y + r, color, [&](double x, double y) {
    const double dx = x - c.x;
    const double dy = y - c.y;
    return dx * dx + dy * dy <= r2;
  });
}

void Canvas::fill_ring(Vec2 c, double outer, double inner, Rgb color) {
  const double o2 = outer * outer;
  const double i2 = inner * inner;
  cover(c.x - outer, c.y - outer, c.x + outer, c.y + outer, color, [&](double x, double y) {
    const double dx = x - c.x;
    const double dy = y - c.y;
    const double d2 = dx * dx + dy * dy;
    return d2 <= o2 && d2 >= i2;
  });
}

void Canvas::fill_polygon(std::span<const Vec2> pts, Rgb color) {
  if (pts.size() < 3) return;
  double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  cover(x0, y0, x1, y1, color, [&](double x, double y) {
    bool in = false;
    for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
      const Vec2& a = pts[i];
      const Vec2& b = pts[j];
      if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
  });
}

void Canvas::stroke_segment(Vec2 a, Vec2 b, double width, Rgb color) {
  const double hw = width / 2.0;
  const Vec2 d = b - a;
  const double len2 = d.x * d.x + d.y * d.y;
  cover(std::min(a.x, b.x) - hw, std::min(a.y, b.y) - hw, std::max(a.x, b.x) + hw, std::max(a.y, b.y) + hw, color,
        [&](double x, double y) {
          double t = len2 > 0 ? ((x - a.x) * d.x + (y - a.y) * d.y) / len2 : 0.0;
          t = std::clamp(t, 0.0, 1.0);
          const double ex = a.x + t * d.x - x;
          const double ey = a.y + t * d.y - y;
          return ex * ex + ey * ey <= hw * hw;
        });
}

void Canvas::stroke_polygon(std::span<const Vec2> pts, double width, Rgb color) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    stroke_segment(pts[i], pts[(i + 1) % pts.size()], width, color);
  }
}

void Canvas::fill_rect(int x, int y, int w, int h, Rgb color) {
  for (int py = std::max(0, y); py < std::min(img_.height(), y + h); ++py) {
    for (int px = std::max(0, x); px < std::min(img_.width(), x + w); ++px) img_.set(px, py, color);
  }
}

namespace {

// Rows top to bottom, bit 4 = leftmost column.
constexpr std::array<std::pair<char, std::array<std::uint8_t, 7>>, 11> kGlyphs = {{
    {'A', {0x0e, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11}},
    {'B', {0x1e, 0x11, 0x11, 0x1e, 0x11, 0x11, 0x1e}},
    {'C', {0x0e, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0e}},
    {'D', {0x1e, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1e}},
    {'E', {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x1f}},
    {'F', {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x10}},
    {'G', {0x0e, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0f}},
    {'H', {0x11, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11}},
    {'I', {0x0e, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0c}},
    {'?', {0x0e, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04}},
}};

}  // namespace

void draw_glyph(ImageBuf& img, char ch, int x, int y, int scale, Rgb color) {
  for (const auto& [c, rows] : kGlyphs) {
    if (c != ch) continue;
    for (int r = 0; r < kGlyphHeight; ++r) {
      for (int col = 0; col < kGlyphWidth; ++col) {
        if (!(rows[static_cast<std::size_t>(r)] & (0x10 >> col))) continue;
        for (int dy = 0; dy < scale; ++dy) {
          for (int dx = 0; dx < scale; ++dx) {
            const int px = x + col * scale + dx;
            const int py = y + r * scale + dy;
            if (px >= 0 && py >= 0 && px < img.width() && py < img.height()) img.set(px, py, color);
          }
        }
      }
    }
    return;
  }
}

}  // namespace vlsynth
