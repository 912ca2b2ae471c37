#ifndef CMFD_IMAGE_HPP
#define CMFD_IMAGE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cmfd/errors.hpp"
#include "cmfd/geometry.hpp"

namespace cmfd {

// Pixel budget guard. Anything past this is a corrupt header or abuse.
inline constexpr std::int64_t kMaxPixels = std::int64_t(1) << 26;

enum class Depth { integer8, real };

inline double round_half_away(double v) { return std::round(v); }

// Single-channel image, row-major doubles in [0, 255]. integer8 images hold
// whole numbers only; real images keep full double precision, which the
// rescale pipeline depends on.
struct GrayImage {
  int width = 0;
  int height = 0;
  Depth depth = Depth::integer8;
  std::vector<double> samples;

  double at(int r, int c) const {
    return samples[static_cast<std::size_t>(r) * width + c];
  }
  double& at(int r, int c) {
    return samples[static_cast<std::size_t>(r) * width + c];
  }
  bool in_bounds(int r, int c) const {
    return r >= 0 && r < height && c >= 0 && c < width;
  }
  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(width) * height;
  }
  Rect bounds() const { return Rect{0, 0, height, width}; }
};

inline void check_dims(int width, int height) {
  if (width < 1 || height < 1)
    throw precondition_error("image dimensions must be positive");
  if (static_cast<std::int64_t>(width) * height > kMaxPixels)
    throw format_error("dimension overflow: " + std::to_string(width) + "x" +
                       std::to_string(height));
}

inline GrayImage make_image(int width, int height, Depth depth,
                            double fill = 0.0) {
  check_dims(width, height);
  GrayImage img;
  img.width = width;
  img.height = height;
  img.depth = depth;
  double v = fill < 0.0 ? 0.0 : (fill > 255.0 ? 255.0 : fill);
  if (depth == Depth::integer8) v = round_half_away(v);
  img.samples.assign(static_cast<std::size_t>(width) * height, v);
  return img;
}

// Builds an image from arbitrary samples: clamps into [0, 255] and rounds
// when the requested depth is integer8.
inline GrayImage image_from_samples(int width, int height, Depth depth,
                                    std::vector<double> samples) {
  check_dims(width, height);
  if (samples.size() != static_cast<std::size_t>(width) * height)
    throw precondition_error("sample count does not match dimensions");
  for (double& v : samples) {
    if (!(v >= 0.0)) v = 0.0;
    if (v > 255.0) v = 255.0;
    if (depth == Depth::integer8) v = round_half_away(v);
  }
  GrayImage img;
  img.width = width;
  img.height = height;
  img.depth = depth;
  img.samples = std::move(samples);
  return img;
}

// Interleaved 8-bit RGB, only used as a decode intermediate.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;  // r,g,b per pixel
};

// Standard luminance weights, rounded to the nearest integer.
inline GrayImage to_grayscale(const RgbImage& rgb) {
  check_dims(rgb.width, rgb.height);
  GrayImage img;
  img.width = rgb.width;
  img.height = rgb.height;
  img.depth = Depth::integer8;
  img.samples.resize(static_cast<std::size_t>(rgb.width) * rgb.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    const std::uint8_t* p = &rgb.samples[i * 3];
    double y = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    img.samples[i] = round_half_away(y);
  }
  return img;
}

// Already grayscale: conversion is the identity.
inline GrayImage to_grayscale(const GrayImage& img) { return img; }

// One BxB window with its own copy of the samples.
struct Block {
  int row = 0;
  int col = 0;
  int size = 0;
  std::vector<double> samples;

  double at(int r, int c) const {
    return samples[static_cast<std::size_t>(r) * size + c];
  }
};

inline GrayImage block_to_image(const Block& block) {
  GrayImage img;
  img.width = block.size;
  img.height = block.size;
  img.depth = Depth::real;
  img.samples = block.samples;
  return img;
}

inline Block make_block(const GrayImage& img, int row, int col, int size) {
  if (size < 2) throw precondition_error("block size must be at least 2");
  if (row < 0 || col < 0 || row + size > img.height || col + size > img.width)
    throw precondition_error("block window out of bounds");
  Block b;
  b.row = row;
  b.col = col;
  b.size = size;
  b.samples.resize(static_cast<std::size_t>(size) * size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c)
      b.samples[static_cast<std::size_t>(r) * size + c] =
          img.at(row + r, col + c);
  return b;
}

// All overlapping BxB windows at stride 1, row-major by origin.
inline std::vector<Block> overlapping_blocks(const GrayImage& img,
                                             int block_size) {
  if (block_size < 2) throw precondition_error("block size must be at least 2");
  if (block_size > img.width || block_size > img.height)
    throw precondition_error("block size exceeds image dimensions");
  const int rows = img.height - block_size + 1;
  const int cols = img.width - block_size + 1;
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      blocks.push_back(make_block(img, r, c, block_size));
  return blocks;
}

inline GrayImage crop(const GrayImage& img, const Rect& rect) {
  if (rect.height < 1 || rect.width < 1 || rect.row < 0 || rect.col < 0 ||
      rect.bottom() > img.height || rect.right() > img.width)
    throw precondition_error("crop rectangle out of bounds");
  GrayImage out;
  out.width = rect.width;
  out.height = rect.height;
  out.depth = img.depth;
  out.samples.resize(rect.area());
  for (int r = 0; r < rect.height; ++r)
    for (int c = 0; c < rect.width; ++c)
      out.at(r, c) = img.at(rect.row + r, rect.col + c);
  return out;
}

// ---- bilinear resampling ----
//
// Output sample u on an axis resampled from src to dst samples sits at input
// coordinate ((2u+1)*src - dst) / (2*dst): the output sample centers overlay
// the input sample centers symmetrically. The position is kept in exact
// integer rational form and clamped to [0, src-1]. Whole-image resizing and
// block-window sampling share this one evaluation path, so the two are
// bit-identical wherever their sample grids coincide (the aligned-window
// property exact corner matching relies on).

struct AxisPos {
  int i0 = 0;
  int i1 = 0;
  double frac = 0.0;
};

// Position of output sample u when an axis of src samples is resampled to
// dst samples, as a clamped (index, fraction) pair.
inline AxisPos axis_position(std::int64_t u, int src, int dst) {
  const std::int64_t numer = (2 * u + 1) * src - dst;
  const std::int64_t denom = 2LL * dst;
  if (numer <= 0) return AxisPos{0, 0, 0.0};
  if (numer >= denom * (src - 1)) return AxisPos{src - 1, src - 1, 0.0};
  const std::int64_t idx = numer / denom;
  const std::int64_t rem = numer % denom;
  return AxisPos{static_cast<int>(idx), static_cast<int>(idx) + 1,
                 static_cast<double>(rem) / static_cast<double>(denom)};
}

inline double lerp(double a, double b, double t) { return a + t * (b - a); }

// Bilinear sample inside the window of img anchored at (row0, col0), at the
// window-relative axis positions y and x.
inline double sample_bilinear(const GrayImage& img, int row0, int col0,
                              const AxisPos& y, const AxisPos& x) {
  const double v00 = img.at(row0 + y.i0, col0 + x.i0);
  const double v01 = img.at(row0 + y.i0, col0 + x.i1);
  const double v10 = img.at(row0 + y.i1, col0 + x.i0);
  const double v11 = img.at(row0 + y.i1, col0 + x.i1);
  return lerp(lerp(v00, v01, x.frac), lerp(v10, v11, x.frac), y.frac);
}

// Output length of one axis after rescaling by factor percent,
// rounded half away from zero.
inline int scaled_dim(int in_dim, int factor) {
  return static_cast<int>(
      (static_cast<std::int64_t>(in_dim) * factor + 50) / 100);
}

// Rescales by an integer percentage (>= 10). Output depth is real: resampled
// values are not re-quantized.
inline GrayImage resize_bilinear(const GrayImage& img, int factor) {
  if (factor < 10) throw precondition_error("rescale factor below 10 percent");
  const int out_h = scaled_dim(img.height, factor);
  const int out_w = scaled_dim(img.width, factor);
  if (out_h < 1 || out_w < 1)
    throw precondition_error("rescale output collapses to zero pixels");
  check_dims(out_w, out_h);
  GrayImage out;
  out.width = out_w;
  out.height = out_h;
  out.depth = Depth::real;
  out.samples.resize(static_cast<std::size_t>(out_w) * out_h);
  std::vector<AxisPos> cols(out_w);
  for (int v = 0; v < out_w; ++v) cols[v] = axis_position(v, img.width, out_w);
  for (int u = 0; u < out_h; ++u) {
    const AxisPos y = axis_position(u, img.height, out_h);
    for (int v = 0; v < out_w; ++v)
      out.at(u, v) = sample_bilinear(img, 0, 0, y, cols[v]);
  }
  return out;
}

// ---- binary masks ----

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // one byte per pixel, 0 or 1

  bool get(int r, int c) const {
    return bits[static_cast<std::size_t>(r) * width + c] != 0;
  }
  void set(int r, int c, bool v) {
    bits[static_cast<std::size_t>(r) * width + c] = v ? 1 : 0;
  }
  void mark_rect(const Rect& rect) {
    for (int r = rect.row; r < rect.bottom(); ++r)
      for (int c = rect.col; c < rect.right(); ++c) set(r, c, true);
  }
  std::int64_t count() const {
    std::int64_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
  }
};

inline BinaryMask make_mask(int width, int height) {
  check_dims(width, height);
  BinaryMask m;
  m.width = width;
  m.height = height;
  m.bits.assign(static_cast<std::size_t>(width) * height, 0);
  return m;
}

inline GrayImage mask_to_image(const BinaryMask& m) {
  GrayImage img = make_image(m.width, m.height, Depth::integer8, 0.0);
  for (std::size_t i = 0; i < m.bits.size(); ++i)
    img.samples[i] = m.bits[i] ? 255.0 : 0.0;
  return img;
}

inline BinaryMask mask_from_image(const GrayImage& img) {
  BinaryMask m = make_mask(img.width, img.height);
  for (std::size_t i = 0; i < m.bits.size(); ++i)
    m.bits[i] = img.samples[i] != 0.0 ? 1 : 0;
  return m;
}

}  // namespace cmfd

#endif  // CMFD_IMAGE_HPP
