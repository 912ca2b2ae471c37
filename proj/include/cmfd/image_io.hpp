#ifndef CMFD_IMAGE_IO_HPP
#define CMFD_IMAGE_IO_HPP

#include <png.h>

#include <bit>
#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "cmfd/errors.hpp"
#include "cmfd/image.hpp"

namespace cmfd {

// Three on-disk formats:
//   PGM    binary P5, maxval 255
//   PNG    8-bit gray or RGB (RGB is converted on load)
//   f64    lossless sidecar for real-depth images:
//          "CMFDF64\0" + u32le width + u32le height + row-major f64le samples
// Loading sniffs the leading magic, the extension is not trusted.

namespace detail {

inline constexpr char kF64Magic[8] = {'C', 'M', 'F', 'D', 'F', '6', '4', '\0'};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
  std::FILE* f = std::fopen(path.c_str(), mode);
  if (!f) throw io_error("cannot open '" + path + "': " + std::strerror(errno));
  return FilePtr(f);
}

inline std::vector<std::uint8_t> read_all(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  std::vector<std::uint8_t> data;
  std::uint8_t buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f.get())) > 0)
    data.insert(data.end(), buf, buf + n);
  if (std::ferror(f.get())) throw io_error("read failure on '" + path + "'");
  return data;
}

inline void write_all(const std::string& path,
                      const std::vector<std::uint8_t>& data) {
  FilePtr f = open_file(path, "wb");
  if (!data.empty() &&
      std::fwrite(data.data(), 1, data.size(), f.get()) != data.size())
    throw io_error("write failure on '" + path + "'");
}

inline void check_decoded_dims(std::int64_t w, std::int64_t h,
                               const std::string& path) {
  if (w < 1 || h < 1 || w * h > kMaxPixels)
    throw format_error("dimension overflow in '" + path + "' (" +
                       std::to_string(w) + "x" + std::to_string(h) + ")");
}

inline std::vector<std::uint8_t> to_bytes(const GrayImage& img) {
  std::vector<std::uint8_t> bytes(img.samples.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    double v = round_half_away(img.samples[i]);
    if (v < 0.0) v = 0.0;
    if (v > 255.0) v = 255.0;
    bytes[i] = static_cast<std::uint8_t>(v);
  }
  return bytes;
}

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

// ---- PGM ----

inline void save_pgm(const GrayImage& img, const std::string& path) {
  std::string header = "P5\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  std::vector<std::uint8_t> bytes = detail::to_bytes(img);
  out.insert(out.end(), bytes.begin(), bytes.end());
  detail::write_all(path, out);
}

inline GrayImage decode_pgm(const std::vector<std::uint8_t>& data,
                            const std::string& path) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < data.size()) {
      if (std::isspace(data[pos])) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> std::int64_t {
    skip_space();
    if (pos >= data.size() || !std::isdigit(data[pos]))
      throw format_error("malformed PGM header in '" + path + "'");
    std::int64_t v = 0;
    while (pos < data.size() && std::isdigit(data[pos])) {
      v = v * 10 + (data[pos] - '0');
      if (v > (std::int64_t(1) << 40))
        throw format_error("dimension overflow in '" + path + "'");
      ++pos;
    }
    return v;
  };
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    throw format_error("not a binary PGM: '" + path + "'");
  pos = 2;
  const std::int64_t w = read_int();
  const std::int64_t h = read_int();
  const std::int64_t maxval = read_int();
  detail::check_decoded_dims(w, h, path);
  if (maxval != 255)
    throw format_error("unsupported PGM maxval " + std::to_string(maxval) +
                       " in '" + path + "'");
  if (pos >= data.size() || !std::isspace(data[pos]))
    throw format_error("malformed PGM header in '" + path + "'");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w * h);
  if (data.size() - pos < need)
    throw format_error("truncated PGM payload in '" + path + "'");
  GrayImage img = make_image(static_cast<int>(w), static_cast<int>(h),
                             Depth::integer8, 0.0);
  for (std::size_t i = 0; i < need; ++i)
    img.samples[i] = static_cast<double>(data[pos + i]);
  return img;
}

// ---- PNG ----

inline void save_png(const GrayImage& img, const std::string& path) {
  std::vector<std::uint8_t> bytes = detail::to_bytes(img);
  png_image pim;
  std::memset(&pim, 0, sizeof pim);
  pim.version = PNG_IMAGE_VERSION;
  pim.width = static_cast<png_uint_32>(img.width);
  pim.height = static_cast<png_uint_32>(img.height);
  pim.format = PNG_FORMAT_GRAY;
  detail::FilePtr f = detail::open_file(path, "wb");
  if (!png_image_write_to_stdio(&pim, f.get(), 0, bytes.data(), img.width,
                                nullptr)) {
    std::string msg = pim.message;
    png_image_free(&pim);
    throw io_error("PNG encode failed for '" + path + "': " + msg);
  }
}

inline GrayImage load_png(const std::string& path) {
  detail::FilePtr f = detail::open_file(path, "rb");
  png_image pim;
  std::memset(&pim, 0, sizeof pim);
  pim.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_stdio(&pim, f.get())) {
    std::string msg = pim.message;
    png_image_free(&pim);
    throw format_error("PNG decode failed for '" + path + "': " + msg);
  }
  detail::check_decoded_dims(pim.width, pim.height, path);
  // Always decode as RGB so the grayscale conversion below is ours, not
  // libpng's (it would use different luminance weights).
  pim.format = PNG_FORMAT_RGB;
  RgbImage rgb;
  rgb.width = static_cast<int>(pim.width);
  rgb.height = static_cast<int>(pim.height);
  rgb.samples.resize(static_cast<std::size_t>(rgb.width) * rgb.height * 3);
  if (!png_image_finish_read(&pim, nullptr, rgb.samples.data(), rgb.width * 3,
                             nullptr)) {
    std::string msg = pim.message;
    png_image_free(&pim);
    throw format_error("PNG decode failed for '" + path + "': " + msg);
  }
  return to_grayscale(rgb);
}

// ---- f64 sidecar ----

inline void save_f64(const GrayImage& img, const std::string& path) {
  std::vector<std::uint8_t> out(detail::kF64Magic, detail::kF64Magic + 8);
  detail::put_u32le(out, static_cast<std::uint32_t>(img.width));
  detail::put_u32le(out, static_cast<std::uint32_t>(img.height));
  out.reserve(out.size() + img.samples.size() * 8);
  for (double v : img.samples) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b)
      out.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
  }
  detail::write_all(path, out);
}

inline GrayImage decode_f64(const std::vector<std::uint8_t>& data,
                            const std::string& path) {
  if (data.size() < 16 || std::memcmp(data.data(), detail::kF64Magic, 8) != 0)
    throw format_error("not an f64 sidecar: '" + path + "'");
  const std::int64_t w = detail::get_u32le(&data[8]);
  const std::int64_t h = detail::get_u32le(&data[12]);
  detail::check_decoded_dims(w, h, path);
  const std::size_t need = static_cast<std::size_t>(w * h) * 8;
  if (data.size() - 16 < need)
    throw format_error("truncated f64 payload in '" + path + "'");
  GrayImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.depth = Depth::real;
  img.samples.resize(static_cast<std::size_t>(w * h));
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b)
      u |= static_cast<std::uint64_t>(data[16 + i * 8 + b]) << (8 * b);
    const double v = std::bit_cast<double>(u);
    if (!(v >= 0.0 && v <= 255.0))
      throw format_error("sample out of range in '" + path + "'");
    img.samples[i] = v;
  }
  return img;
}

// ---- dispatch ----

inline GrayImage load_image(const std::string& path) {
  std::vector<std::uint8_t> head = [&] {
    detail::FilePtr f = detail::open_file(path, "rb");
    std::vector<std::uint8_t> h8(8, 0);
    std::size_t n = std::fread(h8.data(), 1, 8, f.get());
    h8.resize(n);
    return h8;
  }();
  static const std::uint8_t png_magic[4] = {0x89, 'P', 'N', 'G'};
  if (head.size() >= 4 && std::memcmp(head.data(), png_magic, 4) == 0)
    return load_png(path);
  if (head.size() >= 2 && head[0] == 'P' && head[1] == '5')
    return decode_pgm(detail::read_all(path), path);
  if (head.size() >= 8 &&
      std::memcmp(head.data(), detail::kF64Magic, 8) == 0)
    return decode_f64(detail::read_all(path), path);
  throw format_error("unrecognised image format in '" + path + "'");
}

inline void save_image(const GrayImage& img, const std::string& path) {
  auto ends_with = [&](const char* suf) {
    const std::size_t n = std::strlen(suf);
    return path.size() >= n && path.compare(path.size() - n, n, suf) == 0;
  };
  if (ends_with(".png")) {
    save_png(img, path);
  } else if (ends_with(".pgm")) {
    save_pgm(img, path);
  } else if (ends_with(".f64")) {
    save_f64(img, path);
  } else {
    throw precondition_error("unsupported output extension on '" + path + "'");
  }
}

inline void save_mask(const BinaryMask& mask, const std::string& path) {
  save_image(mask_to_image(mask), path);
}

inline BinaryMask load_mask(const std::string& path) {
  return mask_from_image(load_image(path));
}

}  // namespace cmfd

#endif  // CMFD_IMAGE_IO_HPP
