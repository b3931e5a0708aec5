#pragma once

#include <cmath>
#include <span>

#include "vlsynth/image.hpp"

namespace vlsynth {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }

// Rotation in screen coordinates (y down): positive degrees turn clockwise.
// Multiples of 90 degrees are exact.
struct Rotation {
  double c = 1.0;
  double s = 0.0;

  explicit Rotation(double degrees);
  Vec2 apply(Vec2 v) const { return {c * v.x - s * v.y, s * v.x + c * v.y}; }
};

// Coverage rasterizer. Each pixel is sampled on an S x S grid of points
// (S = supersample) and the shape color is blended in proportion to the
// number of covered samples, using integer arithmetic only.
class Canvas {
 public:
  Canvas(int width, int height, Rgb background, int supersample);

  int width() const noexcept { return img_.width(); }
  int height() const noexcept { return img_.height(); }
  int supersample() const noexcept { return ss_; }

  void fill_disk(Vec2 center, double radius, Rgb color);
  void fill_ring(Vec2 center, double outer, double inner, Rgb color);
  // Even-odd fill of a simple polygon.
  void fill_polygon(std::span<const Vec2> pts, Rgb color);
  // Capsule of the given width around segment ab.
  void stroke_segment(Vec2 a, Vec2 b, double width, Rgb color);
  void stroke_polygon(std::span<const Vec2> pts, double width, Rgb color);
  // Pixel-aligned rectangle, no antialiasing.
  void fill_rect(int x, int y, int w, int h, Rgb color);

  const ImageBuf& image() const noexcept { return img_; }
  ImageBuf take() { return std::move(img_); }

 private:
  template <typename Inside>
  void cover(double x0, double y0, double x1, double y1, Rgb color, Inside inside);

  ImageBuf img_;
  int ss_;
};

// 5x7 bitmap glyphs for the option labels A-J and '?', scaled by an integer
// factor; (x, y) is the top-left corner.
void draw_glyph(ImageBuf& img, char ch, int x, int y, int scale, Rgb color);
inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

}  // namespace vlsynth
