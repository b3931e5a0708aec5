#include "vlsynth/image_qc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "vlsynth/errors.hpp"

namespace vlsynth {

namespace {

constexpr int kHashGrid = 32;
constexpr int kHashBlock = 8;

// Area-weighted resample of a gray plane to 32x32.
std::array<double, kHashGrid * kHashGrid> box_resize(const std::vector<std::uint8_t>& gray, int w, int h) {
  std::array<double, kHashGrid * kHashGrid> out{};
  const double sx = static_cast<double>(w) / kHashGrid;
  const double sy = static_cast<double>(h) / kHashGrid;
  for (int ty = 0; ty < kHashGrid; ++ty) {
    const double y0 = ty * sy, y1 = (ty + 1) * sy;
    for (int tx = 0; tx < kHashGrid; ++tx) {
      const double x0 = tx * sx, x1 = (tx + 1) * sx;
      double acc = 0.0;
      for (int y = static_cast<int>(y0); y < std::min(h, static_cast<int>(std::ceil(y1))); ++y) {
        const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
        if (wy <= 0) continue;
        for (int x = static_cast<int>(x0); x < std::min(w, static_cast<int>(std::ceil(x1))); ++x) {
          const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
          if (wx <= 0) continue;
          acc += wx * wy * gray[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
        }
      }
      out[static_cast<std::size_t>(ty * kHashGrid + tx)] = acc / (sx * sy);
    }
  }
  return out;
}

// basis[k][n] = a(k) cos(pi (2n+1) k / 2N) for k = 1..8.
const std::array<std::array<double, kHashGrid>, kHashBlock>& dct_basis() {
  static const auto table = [] {
    std::array<std::array<double, kHashGrid>, kHashBlock> t{};
    const double a = std::sqrt(2.0 / kHashGrid);
    for (int k = 1; k <= kHashBlock; ++k) {
      for (int n = 0; n < kHashGrid; ++n) {
        t[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(n)] =
            a * std::cos(std::numbers::pi * (2 * n + 1) * k / (2.0 * kHashGrid));
      }
    }
    return t;
  }();
  return table;
}

}  // namespace

PHash phash(const ImageBuf& img) {
  if (img.empty()) return 0;
  const auto small = box_resize(to_gray(img), img.width(), img.height());
  const auto& basis = dct_basis();

  // Row pass: for every image row y, coefficients u = 1..8.
  std::array<std::array<double, kHashBlock>, kHashGrid> rows{};
  for (int y = 0; y < kHashGrid; ++y) {
    for (int u = 0; u < kHashBlock; ++u) {
      double acc = 0.0;
      for (int x = 0; x < kHashGrid; ++x) {
        acc += basis[static_cast<std::size_t>(u)][static_cast<std::size_t>(x)] *
               small[static_cast<std::size_t>(y * kHashGrid + x)];
      }
      rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(u)] = acc;
    }
  }
  std::array<double, kHashBlock * kHashBlock> coef{};
  for (int v = 0; v < kHashBlock; ++v) {
    for (int u = 0; u < kHashBlock; ++u) {
      double acc = 0.0;
      for (int y = 0; y < kHashGrid; ++y) {
        acc += basis[static_cast<std::size_t>(v)][static_cast<std::size_t>(y)] *
               rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(u)];
      }
      coef[static_cast<std::size_t>(v * kHashBlock + u)] = acc;
    }
  }

  auto sorted = coef;
  std::sort(sorted.begin(), sorted.end());
  const double median = (sorted[31] + sorted[32]) / 2.0;
  PHash bits = 0;
  for (std::size_t k = 0; k < coef.size(); ++k) {
    if (coef[k] > median) bits |= PHash{1} << (63 - k);
  }
  return bits;
}

double ssim_vs_white(const ImageBuf& img) {
  constexpr double L = 255.0;
  constexpr double c1 = (0.01 * L) * (0.01 * L);
  constexpr double c2 = (0.03 * L) * (0.03 * L);
  constexpr int win = 8;
  constexpr int stride = 4;
  const auto gray = to_gray(img);
  const int w = img.width(), h = img.height();
  if (w < win || h < win) throw PreconditionError("image smaller than the SSIM window");

  // The reference is constant white: mean 255, variance 0, covariance 0.
  const double mu_y = L;
  double total = 0.0;
  int windows = 0;
  for (int y0 = 0; y0 + win <= h; y0 += stride) {
    for (int x0 = 0; x0 + win <= w; x0 += stride) {
      double sum = 0.0, sq = 0.0;
      for (int y = y0; y < y0 + win; ++y) {
        for (int x = x0; x < x0 + win; ++x) {
          const double v = gray[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
          sum += v;
          sq += v * v;
        }
      }
      constexpr double n = win * win;
      const double mu_x = sum / n;
      const double var_x = std::max(0.0, sq / n - mu_x * mu_x);
      const double num = (2.0 * mu_x * mu_y + c1) * (2.0 * 0.0 + c2);
      const double den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + 0.0 + c2);
      total += num / den;
      ++windows;
    }
  }
  return total / windows;
}

double ink_fraction(const ImageBuf& img, std::uint8_t cutoff) {
  if (img.empty()) return 0.0;
  const auto gray = to_gray(img);
  const auto ink = std::count_if(gray.begin(), gray.end(), [&](std::uint8_t v) { return v < cutoff; });
  return static_cast<double>(ink) / static_cast<double>(gray.size());
}

double gradient_energy(const ImageBuf& img) {
  const int w = img.width(), h = img.height();
  if (w < 2 || h < 2) throw PreconditionError("gradient energy needs at least 2x2 pixels");
  const auto gray = to_gray(img);
  auto g = [&](int x, int y) {
    return gray[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] / 255.0;
  };
  double acc = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x + 1 < w ? g(x + 1, y) - g(x, y) : 0.0;
      const double dy = y + 1 < h ? g(x, y + 1) - g(x, y) : 0.0;
      acc += dx * dx + dy * dy;
    }
  }
  return acc / (static_cast<double>(w) * static_cast<double>(h));
}

bool is_blank(const ImageBuf& img, const QcThresholds& t, double* score) {
  const double s = ssim_vs_white(img);
  if (score) *score = s;
  if (t.blank_mode == BlankMode::LiteralBelow) return s < t.literal_ssim;
  return s >= t.blank_ssim || ink_fraction(img) < t.blank_ink;
}

QcVerdict qc_group(const ImageGroup& group, const QcThresholds& t) {
  QcVerdict v;
  for (int i = 0; i < kGroupPanels; ++i) {
    if (group.panel(i).empty()) throw PreconditionError("group " + group.group_id + " is missing panels");
    v.hashes[static_cast<std::size_t>(i)] = phash(group.panel(i));
  }
  for (int i = 0; i < kGroupPanels; ++i) {
    for (int j = i + 1; j < kGroupPanels; ++j) {
      const int d = hamming(v.hashes[static_cast<std::size_t>(i)], v.hashes[static_cast<std::size_t>(j)]);
      if (d < t.dup) v.reasons.emplace_back(DuplicatePair{i, j, d});
    }
  }
  for (int i = 0; i < kGroupPanels; ++i) {
    double score = 0.0;
    if (is_blank(group.panel(i), t, &score)) v.reasons.emplace_back(Blank{i, score});
  }
  for (int i = 0; i < kGroupPanels; ++i) {
    const double e = gradient_energy(group.panel(i));
    if (e < t.min_energy) v.reasons.emplace_back(LowDetail{i, e});
  }
  v.accepted = v.reasons.empty();
  return v;
}

}  // namespace vlsynth
