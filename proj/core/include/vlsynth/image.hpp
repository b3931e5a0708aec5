#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vlsynth {

struct Rgb {
  std::uint8_t r = 255;
  std::uint8_t g = 255;
  std::uint8_t b = 255;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};

// Row-major RGB raster, 8 bits per channel.
class ImageBuf {
 public:
  ImageBuf() = default;
  ImageBuf(int width, int height, Rgb fill = kWhite);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  Rgb at(int x, int y) const noexcept {
    const auto* p = &pixels_[index(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    auto* p = &pixels_[index(x, y)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }
  std::span<std::uint8_t> bytes() noexcept { return pixels_; }

  // True when every pixel has R == G == B.
  bool is_grayscale() const noexcept;

  // Copy `src` into this image with its top-left corner at (x0, y0); clips.
  void blit(const ImageBuf& src, int x0, int y0);
  ImageBuf crop(int x0, int y0, int w, int h) const;

  friend bool operator==(const ImageBuf&, const ImageBuf&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// ITU-R BT.601 luma, rounded to nearest: (299 R + 587 G + 114 B) / 1000.
std::uint8_t luma(Rgb c) noexcept;

/// Grayscale plane of the image (luma per pixel).
std::vector<std::uint8_t> to_gray(const ImageBuf& img);

/// Stable content fingerprint of the pixels and dimensions.
std::uint64_t pixel_hash(const ImageBuf& img);

// PNG codec (libpng). Images whose pixels are all gray are written as 8-bit
// grayscale PNGs; everything else as RGB. Output bytes are deterministic.
std::string encode_png(const ImageBuf& img, int compression_level = 6);
ImageBuf decode_png(std::string_view bytes);
void write_png(const std::filesystem::path& path, const ImageBuf& img, int compression_level = 6);
ImageBuf read_png(const std::filesystem::path& path);

}  // namespace vlsynth
