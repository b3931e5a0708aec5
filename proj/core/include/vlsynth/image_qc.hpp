#pragma once

#include <cstdint>

#include "vlsynth/group.hpp"
#include "vlsynth/image.hpp"

namespace vlsynth {

using PHash = std::uint64_t;

/// 64-bit DCT perceptual hash. The exact layout is pinned in docs/phash.md.
PHash phash(const ImageBuf& img);

inline int hamming(PHash a, PHash b) noexcept { return __builtin_popcountll(a ^ b); }

/// Mean SSIM over 8x8 windows (stride 4) of the luma plane against an
/// all-white image of the same size.
double ssim_vs_white(const ImageBuf& img);

/// Fraction of pixels whose luma is below the background cutoff.
double ink_fraction(const ImageBuf& img, std::uint8_t cutoff = 250);

/// Mean of dx^2 + dy^2 (forward differences, gray in [0,1]); differences
/// past the last row/column count as zero. Requires width, height >= 2.
double gradient_energy(const ImageBuf& img);

enum class BlankMode {
  // Panel is blank when it looks like the white reference or carries
  // almost no ink.
  NearWhite,
  // Literal comparator: blank when SSIM falls below the threshold.
  LiteralBelow,
};

struct QcThresholds {
  int dup = 10;
  BlankMode blank_mode = BlankMode::NearWhite;
  double blank_ssim = 0.98;
  double blank_ink = 0.005;
  double literal_ssim = 0.1;
  double min_energy = 1e-4;
};

bool is_blank(const ImageBuf& img, const QcThresholds& t, double* score = nullptr);

QcVerdict qc_group(const ImageGroup& group, const QcThresholds& t = {});

}  // namespace vlsynth
