#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace oracle {

using vlsynth::ImageBuf;

std::vector<std::pair<std::size_t, double>> brute_nn(const std::vector<vlsynth::EmbeddingVector>& pool) {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    std::size_t best = i;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (j == i) continue;
      const double d = euclid(pool[i].values, pool[j].values);
      if (d < best_d) best_d = d, best = j;
    }
    out.emplace_back(best, best_d);
  }
  return out;
}

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

int hamming_bits(std::uint64_t a, std::uint64_t b) {
  int n = 0;
  for (int k = 0; k < 64; ++k) n += static_cast<int>(((a >> k) & 1U) != ((b >> k) & 1U));
  return n;
}

double ssim_constant_vs_white(double v) {
  const double L = 255.0;
  const double c1 = (0.01 * L) * (0.01 * L);
  return (2.0 * v * L + c1) / (v * v + L * L + c1);
}

ImageBuf step_edge(int w, int h, int edge_x) {
  ImageBuf img(w, h, vlsynth::kWhite);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < edge_x; ++x) img.set(x, y, vlsynth::kBlack);
  return img;
}

double scheduled_scalar(const vlsynth::AttributeProgression& p, int i) {
  const double start = std::get<double>(p.start);
  if (const auto* a = std::get_if<vlsynth::Arithmetic>(&p.schedule)) return start + a->step * i;
  if (const auto* g = std::get_if<vlsynth::Geometric>(&p.schedule)) {
    double v = start;
    for (int k = 0; k < i / g->every_k; ++k) v *= g->factor;
    return v;
  }
  if (std::holds_alternative<vlsynth::Toggle>(p.schedule)) return i % 2 == 0 ? start : 1.0 - start;
  throw std::logic_error("not a scalar schedule");
}

vlsynth::Offset scheduled_offset(const vlsynth::AttributeProgression& p, int i) {
  const auto& s = std::get<vlsynth::Shift>(p.schedule);
  const auto& o = std::get<vlsynth::Offset>(p.start);
  return {o.dx + s.dx * i, o.dy + s.dy * i};
}

namespace {

int luma_at(const ImageBuf& img, int x, int y) { return vlsynth::luma(img.at(x, y)); }

}  // namespace

std::vector<Component> ink_components(const ImageBuf& img, int cutoff, std::size_t min_pixels) {
  const int w = img.width(), h = img.height();
  std::vector<int> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  std::vector<Component> out;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      if (label[idx] != -1 || luma_at(img, x, y) >= cutoff) continue;
      Component c;
      label[idx] = static_cast<int>(out.size());
      stack.push_back({x, y});
      while (!stack.empty()) {
        auto [px, py] = stack.back();
        stack.pop_back();
        c.pixels.push_back({px, py});
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx, ny = py + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const auto n = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx);
            if (label[n] != -1 || luma_at(img, nx, ny) >= cutoff) continue;
            label[n] = static_cast<int>(out.size());
            stack.push_back({nx, ny});
          }
        }
      }
      for (auto [px, py] : c.pixels) {
        const double m = (255.0 - luma_at(img, px, py)) / 255.0;
        c.mass += m;
        c.cx += m * px;
        c.cy += m * py;
      }
      c.cx /= c.mass;
      c.cy /= c.mass;
      out.push_back(std::move(c));
    }
  }
  std::erase_if(out, [&](const Component& c) { return c.pixels.size() < min_pixels; });
  return out;
}

int expected_components(vlsynth::ShapeKind kind) {
  using vlsynth::ShapeKind;
  return kind == ShapeKind::LineGroup || kind == ShapeKind::Composite ? 2 : 1;
}

std::optional<int> measure_count(const ImageBuf& img, vlsynth::ShapeKind kind) {
  const auto n = static_cast<int>(ink_components(img).size());
  const int per = expected_components(kind);
  if (n % per != 0) return std::nullopt;
  return n / per;
}

HeadingCue heading_cue(vlsynth::ShapeKind kind) {
  return kind == vlsynth::ShapeKind::StickFigure ? HeadingCue::NarrowEnd : HeadingCue::FarthestEnd;
}

double measure_heading(const ImageBuf& img, const Component& c, HeadingCue cue) {
  // Component darkness on a local grid, blurred so that reflected lookups
  // interpolate equally well at every angle (aliased raster edges would
  // otherwise favor the pixel axes).
  constexpr int pad = 4;
  int x0 = img.width(), y0 = img.height(), x1 = 0, y1 = 0;
  for (auto [x, y] : c.pixels) x0 = std::min(x0, x), y0 = std::min(y0, y), x1 = std::max(x1, x), y1 = std::max(y1, y);
  x0 -= pad, y0 -= pad, x1 += pad, y1 += pad;
  const int gw = x1 - x0 + 1, gh = y1 - y0 + 1;
  auto at = [&](std::vector<double>& g, int x, int y) -> double& {
    return g[static_cast<std::size_t>(y) * static_cast<std::size_t>(gw) + static_cast<std::size_t>(x)];
  };
  std::vector<double> raw(static_cast<std::size_t>(gw) * static_cast<std::size_t>(gh), 0.0);
  for (auto [x, y] : c.pixels) at(raw, x - x0, y - y0) = (255.0 - luma_at(img, x, y)) / 255.0;
  std::array<double, 7> kernel{};
  double ksum = 0.0;
  for (int k = -3; k <= 3; ++k) ksum += kernel[static_cast<std::size_t>(k + 3)] = std::exp(-0.5 * k * k);
  std::vector<double> tmp(raw.size(), 0.0), grid(raw.size(), 0.0);
  for (int y = 0; y < gh; ++y)
    for (int x = 0; x < gw; ++x)
      for (int k = -3; k <= 3; ++k)
        if (x + k >= 0 && x + k < gw) at(tmp, x, y) += kernel[static_cast<std::size_t>(k + 3)] / ksum * at(raw, x + k, y);
  for (int y = 0; y < gh; ++y)
    for (int x = 0; x < gw; ++x)
      for (int k = -3; k <= 3; ++k)
        if (y + k >= 0 && y + k < gh) at(grid, x, y) += kernel[static_cast<std::size_t>(k + 3)] / ksum * at(tmp, x, y + k);

  auto sample = [&](double x, double y) {
    const double gx = x - x0, gy = y - y0;
    const int ix = static_cast<int>(std::floor(gx)), iy = static_cast<int>(std::floor(gy));
    const double fx = gx - ix, fy = gy - iy;
    auto g = [&](int px, int py) {
      if (px < 0 || py < 0 || px >= gw || py >= gh) return 0.0;
      return at(grid, px, py);
    };
    return (1 - fx) * (1 - fy) * g(ix, iy) + fx * (1 - fy) * g(ix + 1, iy) + (1 - fx) * fy * g(ix, iy + 1) +
           fx * fy * g(ix + 1, iy + 1);
  };
  // Mirror mismatch about the line through the centroid at angle t.
  auto asymmetry = [&](double t) {
    const double ux = std::cos(t), uy = std::sin(t);
    double s = 0.0;
    for (int y = 0; y < gh; ++y) {
      for (int x = 0; x < gw; ++x) {
        const double v = at(grid, x, y);
        if (v < 1e-3) continue;
        const double dx = x + x0 - c.cx, dy = y + y0 - c.cy;
        const double along = dx * ux + dy * uy;
        s += std::abs(v - sample(c.cx + 2 * along * ux - dx, c.cy + 2 * along * uy - dy));
      }
    }
    return s;
  };
  const double deg = std::numbers::pi / 180.0;
  double best = 0.0, best_s = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 180; ++k) {
    if (const double s = asymmetry(k * deg); s < best_s) best_s = s, best = k * deg;
  }
  for (double step : {0.1, 0.01}) {
    const double centre = best;
    for (int k = -10; k <= 10; ++k) {
      const double t = centre + k * step * deg;
      if (const double s = asymmetry(t); s < best_s) best_s = s, best = t;
    }
  }
  const double ux = std::cos(best), uy = std::sin(best);

  double lo = 0.0, hi = 0.0;
  for (auto [x, y] : c.pixels) {
    const double along = (x - c.cx) * ux + (y - c.cy) * uy;
    lo = std::min(lo, along), hi = std::max(hi, along);
  }
  double far = hi >= -lo ? 1.0 : -1.0;
  if (cue == HeadingCue::NarrowEnd) {
    // Mean distance from the axis over the outer 30% of each end.
    double spread[2] = {0, 0}, n[2] = {0, 0};
    for (auto [x, y] : c.pixels) {
      const double dx = x - c.cx, dy = y - c.cy;
      const double along = dx * ux + dy * uy;
      const double across = std::abs(-dx * uy + dy * ux);
      if (along > 0.7 * hi) spread[1] += across, n[1] += 1;
      if (along < 0.7 * lo) spread[0] += across, n[0] += 1;
    }
    far = spread[1] / n[1] <= spread[0] / n[0] ? 1.0 : -1.0;
  }
  const double sx = far < 0 ? -ux : ux;
  const double sy = far < 0 ? -uy : uy;
  // Heading 0 points up (-y); positive turns clockwise on screen.
  double heading = std::atan2(sx, -sy) / deg;
  if (heading < 0) heading += 360.0;
  return heading;
}

std::vector<double> measure_headings(const ImageBuf& img, HeadingCue cue) {
  const auto comps = ink_components(img);
  std::size_t largest = 0;
  for (const auto& c : comps) largest = std::max(largest, c.pixels.size());
  std::vector<double> out;
  for (const auto& c : comps) {
    if (static_cast<double>(c.pixels.size()) >= 0.6 * static_cast<double>(largest)) {
      out.push_back(measure_heading(img, c, cue));
    }
  }
  return out;
}

std::pair<double, double> ink_centroid(const ImageBuf& img) {
  double m = 0, sx = 0, sy = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double d = (255.0 - luma_at(img, x, y)) / 255.0;
      m += d;
      sx += d * x;
      sy += d * y;
    }
  }
  return {sx / m, sy / m};
}

double measure_center_shade(const ImageBuf& img) {
  const auto comps = ink_components(img);
  const Component* big = nullptr;
  for (const auto& c : comps) {
    if (!big || c.pixels.size() > big->pixels.size()) big = &c;
  }
  if (!big) return 0.0;
  return 1.0 - luma_at(img, static_cast<int>(std::lround(big->cx)), static_cast<int>(std::lround(big->cy))) / 255.0;
}

std::size_t enclosed_white(const ImageBuf& img, int cutoff) {
  const int w = img.width(), h = img.height();
  std::vector<char> seen(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
  std::vector<std::pair<int, int>> stack;
  auto push = [&](int x, int y) {
    const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
    if (seen[i] || luma_at(img, x, y) < cutoff) return;
    seen[i] = 1;
    stack.push_back({x, y});
  };
  for (int x = 0; x < w; ++x) push(x, 0), push(x, h - 1);
  for (int y = 0; y < h; ++y) push(0, y), push(w - 1, y);
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if (x > 0) push(x - 1, y);
    if (x + 1 < w) push(x + 1, y);
    if (y > 0) push(x, y - 1);
    if (y + 1 < h) push(x, y + 1);
  }
  std::size_t n = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (luma_at(img, x, y) >= cutoff && !seen[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)]) ++n;
  return n;
}

double shape_signature(const ImageBuf& img) {
  const auto comps = ink_components(img);
  const Component* big = nullptr;
  for (const auto& c : comps) {
    if (!big || c.pixels.size() > big->pixels.size()) big = &c;
  }
  if (!big) return 0.0;
  int x0 = img.width(), y0 = img.height(), x1 = 0, y1 = 0;
  for (auto [x, y] : big->pixels) x0 = std::min(x0, x), y0 = std::min(y0, y), x1 = std::max(x1, x), y1 = std::max(y1, y);
  // Local grid with a one-pixel margin; flood the outside, the rest is the
  // silhouette.
  const int w = x1 - x0 + 3, h = y1 - y0 + 3;
  std::vector<char> cell(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);  // 1 ink, 2 outside
  auto at = [&](int x, int y) -> char& { return cell[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)]; };
  for (auto [x, y] : big->pixels) at(x - x0 + 1, y - y0 + 1) = 1;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  at(0, 0) = 2;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
    for (const auto& n : nb) {
      if (n[0] < 0 || n[1] < 0 || n[0] >= w || n[1] >= h || at(n[0], n[1]) != 0) continue;
      at(n[0], n[1]) = 2;
      stack.push_back({n[0], n[1]});
    }
  }
  double area = 0, sx = 0, sy = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (at(x, y) != 2) area += 1, sx += x, sy += y;
  const double cx = sx / area, cy = sy / area;
  double r = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (at(x, y) != 2) r = std::max(r, std::hypot(x - cx, y - cy));
  r += 0.5;
  return area / (std::numbers::pi * r * r);
}

double angle_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

Cell option_cell(vlsynth::Variant v, int panel, int k, const vlsynth::SheetLayout& l) {
  const int per_row = v == vlsynth::Variant::Expanded10 ? 5 : 4;
  const int pitch = panel + l.gutter;
  const int width = l.gutter + 5 * pitch;
  const int scale = std::max(1, panel / 48);
  const int caption = 7 * scale + l.gutter;
  const int row_width = per_row * pitch - l.gutter;
  const int x0 = (width - row_width) / 2;
  const int y0 = l.gutter + panel + 2 * l.gutter;
  return {x0 + (k % per_row) * pitch, y0 + (k / per_row) * (panel + caption + l.gutter)};
}

bool same_pixels(const ImageBuf& sheet, Cell at, const ImageBuf& panel) {
  if (at.x + panel.width() > sheet.width() || at.y + panel.height() > sheet.height()) return false;
  for (int y = 0; y < panel.height(); ++y)
    for (int x = 0; x < panel.width(); ++x)
      if (!(sheet.at(at.x + x, at.y + y) == panel.at(x, y))) return false;
  return true;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::string, std::string>> program_files(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".vlrule") out.emplace_back(e.path().stem().string(), read_bytes(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::string, std::string>> snapshot(const std::filesystem::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out.emplace_back(std::filesystem::relative(e.path(), root).generic_string(), read_bytes(e.path()));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
