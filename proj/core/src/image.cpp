#include "vlsynth/image.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstring>

#include <png.h>

#include "vlsynth/errors.hpp"
#include "vlsynth/hash.hpp"
#include "vlsynth/io.hpp"

namespace vlsynth {

ImageBuf::ImageBuf(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DomainError("negative image dimensions");
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

bool ImageBuf::is_grayscale() const noexcept {
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    if (pixels_[i] != pixels_[i + 1] || pixels_[i] != pixels_[i + 2]) return false;
  }
  return true;
}

void ImageBuf::blit(const ImageBuf& src, int x0, int y0) {
  const int xs = std::max(0, -x0);
  const int ys = std::max(0, -y0);
  const int xe = std::min(src.width(), width_ - x0);
  const int ye = std::min(src.height(), height_ - y0);
  if (xs >= xe) return;
  for (int y = ys; y < ye; ++y) {
    std::memcpy(&pixels_[index(x0 + xs, y0 + y)], &src.pixels_[src.index(xs, y)],
                static_cast<std::size_t>(xe - xs) * 3);
  }
}

ImageBuf ImageBuf::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_) {
    throw DomainError("crop rectangle outside image");
  }
  ImageBuf out(w, h);
  for (int y = 0; y < h; ++y) {
    std::memcpy(&out.pixels_[out.index(0, y)], &pixels_[index(x0, y0 + y)], static_cast<std::size_t>(w) * 3);
  }
  return out;
}

std::uint8_t luma(Rgb c) noexcept {
  return static_cast<std::uint8_t>((299u * c.r + 587u * c.g + 114u * c.b + 500u) / 1000u);
}

std::vector<std::uint8_t> to_gray(const ImageBuf& img) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.height()));
  const auto px = img.bytes();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = luma({px[3 * i], px[3 * i + 1], px[3 * i + 2]});
  }
  return out;
}

std::uint64_t pixel_hash(const ImageBuf& img) {
  std::uint64_t h = fnv1a64(std::to_string(img.width()) + "x" + std::to_string(img.height()));
  return fnv1a64(img.bytes(), h);
}

namespace {

void png_write_to_string(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), len);
}

void png_flush_noop(png_structp) {}

struct ReadCursor {
  std::string_view bytes;
  std::size_t pos = 0;
};

void png_read_from_string(png_structp png, png_bytep data, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + len > cur->bytes.size()) png_error(png, "truncated PNG");
  std::memcpy(data, cur->bytes.data() + cur->pos, len);
  cur->pos += len;
}

void png_warning_ignore(png_structp, png_const_charp) {}

// libpng reports errors by longjmp. Every object with a destructor lives in
// the callers below, outside the setjmp frames.
bool encode_rows(png_structp png, png_infop info, const ImageBuf& img, int level, bool gray,
                 std::vector<std::uint8_t>& row) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
               gray ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, level);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
  png_write_info(png, info);
  const auto px = img.bytes();
  for (int y = 0; y < img.height(); ++y) {
    const std::uint8_t* src = px.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width()) * 3;
    if (gray) {
      for (int x = 0; x < img.width(); ++x) row[static_cast<std::size_t>(x)] = src[3 * x];
    } else {
      std::memcpy(row.data(), src, row.size());
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  return true;
}

bool read_header(png_structp png, png_infop info, int& w, int& h) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_info(png, info);
  w = static_cast<int>(png_get_image_width(png, info));
  h = static_cast<int>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  return true;
}

bool read_rows(png_structp png, ImageBuf& img) {
  if (setjmp(png_jmpbuf(png))) return false;
  auto px = img.bytes();
  for (int y = 0; y < img.height(); ++y) {
    png_read_row(png, px.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width()) * 3, nullptr);
  }
  png_read_end(png, nullptr);
  return true;
}

}  // namespace

std::string encode_png(const ImageBuf& img, int compression_level) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_ignore);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::string out;
  const bool gray = img.is_grayscale();
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()) * (gray ? 1 : 3));
  png_set_write_fn(png, &out, png_write_to_string, png_flush_noop);
  const bool ok = encode_rows(png, info, img, compression_level, gray, row);
  png_destroy_write_struct(&png, &info);
  if (!ok) throw IoError("png encode failed");
  return out;
}

ImageBuf decode_png(std::string_view bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_ignore);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  ReadCursor cur{bytes, 0};
  png_set_read_fn(png, &cur, png_read_from_string);
  int w = 0;
  int h = 0;
  ImageBuf img;
  bool ok = read_header(png, info, w, h);
  if (ok) {
    img = ImageBuf(w, h);
    ok = read_rows(png, img);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) throw IoError("png decode failed");
  return img;
}

void write_png(const std::filesystem::path& path, const ImageBuf& img, int compression_level) {
  write_file_atomic(path, encode_png(img, compression_level));
}

ImageBuf read_png(const std::filesystem::path& path) { return decode_png(read_text_file(path)); }

}  // namespace vlsynth
