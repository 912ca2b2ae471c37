#ifndef CMFD_FORGERY_LAB_HPP
#define CMFD_FORGERY_LAB_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cmfd/errors.hpp"
#include "cmfd/geometry.hpp"
#include "cmfd/image.hpp"
#include "cmfd/image_io.hpp"
#include "cmfd/parallel.hpp"
#include "json.hpp"

namespace cmfd {

enum class ForgeryKind {
  copy_move,
  copy_rescale_move,
  intensity_varied,
  multi_clone,
  clean
};

inline const char* kind_name(ForgeryKind k) {
  switch (k) {
    case ForgeryKind::copy_move:
      return "copy_move";
    case ForgeryKind::copy_rescale_move:
      return "copy_rescale_move";
    case ForgeryKind::intensity_varied:
      return "intensity_varied";
    case ForgeryKind::multi_clone:
      return "multi_clone";
    case ForgeryKind::clean:
      return "clean";
  }
  return "unknown";
}

inline ForgeryKind kind_from_name(const std::string& name) {
  if (name == "copy_move") return ForgeryKind::copy_move;
  if (name == "copy_rescale_move") return ForgeryKind::copy_rescale_move;
  if (name == "intensity_varied") return ForgeryKind::intensity_varied;
  if (name == "multi_clone") return ForgeryKind::multi_clone;
  if (name == "clean") return ForgeryKind::clean;
  throw precondition_error("unknown forgery kind '" + name + "'");
}

struct CloneSpec {
  Point dest_origin;
  int offset = 0;
};

struct ForgerySpec {
  ForgeryKind kind = ForgeryKind::copy_move;
  Rect source_rect;
  Point dest_origin;
  int scale_factor = 100;          // copy_rescale_move only
  int offset = 0;                  // intensity_varied only
  std::vector<CloneSpec> clone_list;  // multi_clone only
  bool quantize_output = true;     // false keeps real depth
};

struct GroundTruth {
  BinaryMask mask;
  ForgerySpec spec;
  bool clamped = false;  // any destination pixel hit 0 or 255
};

struct SynthesisResult {
  GrayImage image;
  GroundTruth truth;
};

namespace detail {

inline void check_inside(const Rect& r, const GrayImage& img,
                         const char* what) {
  if (r.row < 0 || r.col < 0 || r.height < 1 || r.width < 1 ||
      r.bottom() > img.height || r.right() > img.width)
    throw precondition_error(std::string(what) + " outside the image");
}

// Pastes `patch` (double samples, row-major) at `at`, adding `offset` and
// clamping to [0,255]. Returns whether anything clamped.
inline bool paste_patch(std::vector<double>& canvas, int canvas_w,
                        const std::vector<double>& patch, int patch_h,
                        int patch_w, const Point& at, int offset) {
  bool clamped = false;
  for (int r = 0; r < patch_h; ++r) {
    for (int c = 0; c < patch_w; ++c) {
      double v = patch[static_cast<std::size_t>(r) * patch_w + c] + offset;
      if (v < 0.0) {
        v = 0.0;
        clamped = true;
      } else if (v > 255.0) {
        v = 255.0;
        clamped = true;
      }
      canvas[static_cast<std::size_t>(at.row + r) * canvas_w + (at.col + c)] =
          v;
    }
  }
  return clamped;
}

}  // namespace detail

// Applies one forgery to a base image. Every paste reads the source content
// from the base, not from earlier pastes.
inline SynthesisResult synthesize(const GrayImage& base,
                                  const ForgerySpec& spec) {
  SynthesisResult out;
  out.truth.spec = spec;
  out.truth.mask = make_mask(base.width, base.height);
  std::vector<double> samples = base.samples;

  if (spec.kind != ForgeryKind::clean) {
    detail::check_inside(spec.source_rect, base, "source rectangle");
    const GrayImage source = crop(base, spec.source_rect);

    if (spec.kind == ForgeryKind::copy_rescale_move) {
      if (spec.scale_factor < 10)
        throw precondition_error("scale factor below 10 percent");
      const GrayImage resized = resize_bilinear(source, spec.scale_factor);
      const Rect dest{spec.dest_origin.row, spec.dest_origin.col,
                      resized.height, resized.width};
      detail::check_inside(dest, base, "destination rectangle");
      out.truth.clamped = detail::paste_patch(samples, base.width,
                                              resized.samples, resized.height,
                                              resized.width, spec.dest_origin,
                                              0);
      out.truth.mask.mark_rect(spec.source_rect);
      out.truth.mask.mark_rect(dest);
    } else if (spec.kind == ForgeryKind::multi_clone) {
      if (spec.clone_list.empty())
        throw precondition_error("multi_clone needs a clone list");
      out.truth.mask.mark_rect(spec.source_rect);
      for (const CloneSpec& clone : spec.clone_list) {
        const Rect dest{clone.dest_origin.row, clone.dest_origin.col,
                        spec.source_rect.height, spec.source_rect.width};
        detail::check_inside(dest, base, "clone destination");
        const bool clamped = detail::paste_patch(
            samples, base.width, source.samples, source.height, source.width,
            clone.dest_origin, clone.offset);
        out.truth.clamped = out.truth.clamped || clamped;
        out.truth.mask.mark_rect(dest);
      }
    } else {
      const int offset =
          spec.kind == ForgeryKind::intensity_varied ? spec.offset : 0;
      const Rect dest{spec.dest_origin.row, spec.dest_origin.col,
                      spec.source_rect.height, spec.source_rect.width};
      detail::check_inside(dest, base, "destination rectangle");
      out.truth.clamped =
          detail::paste_patch(samples, base.width, source.samples,
                              source.height, source.width, spec.dest_origin,
                              offset);
      out.truth.mask.mark_rect(spec.source_rect);
      out.truth.mask.mark_rect(dest);
    }
  }

  out.image = image_from_samples(
      base.width, base.height,
      spec.quantize_output ? Depth::integer8 : Depth::real,
      std::move(samples));
  return out;
}

// ---- procedural bases and corpus generation ----

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d649bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic draws; distributions are avoided on purpose (their mapping
// from engine output is implementation-defined, the engine's is not).
struct LabRng {
  std::mt19937_64 eng;
  explicit LabRng(std::uint64_t seed) : eng(seed) {}
  double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  int below(int n) {
    return n <= 1 ? 0 : static_cast<int>(unit() * static_cast<double>(n));
  }
};

}  // namespace detail

// Smooth value-noise field plus per-pixel dither. The dither makes every
// block's content unique (no accidental uniform-difference or equal-DCT
// pairs), while values stay within [6, 148) so intensity offsets up to 100
// can never clip.
inline GrayImage make_base_texture(int canvas, Depth depth,
                                   detail::LabRng& rng) {
  check_dims(canvas, canvas);
  const int cell = 16;
  const int lat = canvas / cell + 2;
  std::vector<double> lattice(static_cast<std::size_t>(lat) * lat);
  for (double& v : lattice) v = rng.unit() * 110.0;
  const std::uint64_t dither_seed = rng.eng();

  std::vector<double> s(static_cast<std::size_t>(canvas) * canvas);
  for (int r = 0; r < canvas; ++r) {
    const int gr = r / cell;
    const double fy = static_cast<double>(r % cell) / cell;
    for (int c = 0; c < canvas; ++c) {
      const int gc = c / cell;
      const double fx = static_cast<double>(c % cell) / cell;
      const double v00 = lattice[static_cast<std::size_t>(gr) * lat + gc];
      const double v01 = lattice[static_cast<std::size_t>(gr) * lat + gc + 1];
      const double v10 =
          lattice[static_cast<std::size_t>(gr + 1) * lat + gc];
      const double v11 =
          lattice[static_cast<std::size_t>(gr + 1) * lat + gc + 1];
      const double smooth =
          lerp(lerp(v00, v01, fx), lerp(v10, v11, fx), fy);
      const std::uint64_t h = detail::splitmix64(
          dither_seed ^ (static_cast<std::uint64_t>(r) * canvas + c) *
                            0x9e3779b97f4a7c15ull);
      const double dither =
          depth == Depth::integer8
              ? static_cast<double>(h % 16)
              : static_cast<double>(h >> 11) * 0x1.0p-53 * 16.0;
      s[static_cast<std::size_t>(r) * canvas + c] = 6.0 + smooth + dither;
    }
  }
  return image_from_samples(canvas, canvas, depth, std::move(s));
}

struct CorpusConfig {
  std::uint64_t seed = 1;
  int count = 40;
  ForgeryKind kind = ForgeryKind::intensity_varied;
  std::vector<int> sizes = {10, 20, 30, 40};  // percent of canvas area
  std::string out_dir;
  int canvas = 256;
  int jobs = 1;
};

struct CorpusEntry {
  std::string image_file;
  std::string mask_file;
  ForgerySpec spec;
  int size_bucket_pct = 0;
  bool clamped = false;
};

namespace detail {

struct DimPair {
  int h = 0, w = 0;
};

// Height capped so two regions split along an axis with `sep` between them;
// width then targets the area. The height is jittered for variety; area
// error stays under one row.
inline DimPair plain_region_dims(double area, int canvas, int sep,
                                 int regions, LabRng& rng) {
  const int cap = (canvas - (regions - 1) * sep) / regions;
  if (cap < 8) throw precondition_error("canvas too small for forgery size");
  int h = static_cast<int>(std::floor(std::sqrt(area)));
  h = static_cast<int>(h * (0.9 + 0.2 * rng.unit()));
  h = std::clamp(h, 8, cap);
  int w = static_cast<int>(round_half_away(area / h));
  w = std::clamp(w, 8, canvas);
  return DimPair{h, w};
}

// Source dims for a rescale forgery: multiples of the offset stride
// 100/gcd(f,100) so detector blocks tile the region, big enough to hold a
// 20-pixel block, small enough that source and scaled destination fit the
// canvas stacked along one axis.
inline DimPair rescale_source_dims(double dest_area, int factor, int canvas,
                                   int sep, LabRng& rng) {
  const int g = 100 / std::gcd(factor, 100);
  const double src_area = dest_area * 10000.0 / (factor * factor);
  const auto snap = [&](double v, int lo, int hi) {
    int n = static_cast<int>(round_half_away(v / g)) * g;
    n = std::clamp(n, lo, hi);
    return n;
  };
  const int lo = std::max(20, g);
  const int cap_h = (canvas - sep) * 100 / (100 + factor) / g * g;
  const int cap_w = std::min(canvas, canvas * 100 / factor) / g * g;
  if (cap_h < lo || cap_w < lo)
    throw precondition_error("canvas too small for rescale forgery");
  int h = snap(std::sqrt(src_area) * (0.95 + 0.1 * rng.unit()), lo, cap_h);
  int w = snap(src_area / h, lo, cap_w);
  return DimPair{h, w};
}

struct Placement {
  Point a, b;
};

// Random disjoint placement with at least `sep` pixels between the two
// regions along the split axis. `row_split` stacks them vertically.
inline Placement place_two(int canvas, const DimPair& a, const DimPair& b,
                           int sep, bool row_split, LabRng& rng) {
  const int ha = row_split ? a.h : a.w;
  const int hb = row_split ? b.h : b.w;
  const int slack = canvas - (ha + sep + hb);
  if (slack < 0) throw precondition_error("regions do not fit the canvas");
  const int pa = rng.below(slack + 1);
  const int pb = pa + ha + sep + rng.below(canvas - (pa + ha + sep) - hb + 1);
  const int qa = rng.below(canvas - (row_split ? a.w : a.h) + 1);
  const int qb = rng.below(canvas - (row_split ? b.w : b.h) + 1);
  if (row_split) return Placement{{pa, qa}, {pb, qb}};
  return Placement{{qa, pa}, {qb, pb}};
}

}  // namespace detail

// Builds a ForgerySpec for corpus entry `k` of the given kind/size bucket.
// Pure function of (rng state, parameters); the achieved destination area
// can differ from the requested bucket (recorded via nearest-bucket
// assignment downstream).
inline ForgerySpec plan_forgery(ForgeryKind kind, int canvas, int size_pct,
                                int k, detail::LabRng& rng) {
  ForgerySpec spec;
  spec.kind = kind;
  spec.quantize_output = kind != ForgeryKind::copy_rescale_move &&
                         kind != ForgeryKind::clean;
  if (kind == ForgeryKind::clean) return spec;

  const double area =
      static_cast<double>(canvas) * canvas * size_pct / 100.0;
  const bool row_split = k % 2 == 0;

  if (kind == ForgeryKind::copy_rescale_move) {
    static constexpr int kFactors[4] = {50, 170, 250, 300};
    const int factor = kFactors[k % 4];
    const int sep = 8;
    detail::DimPair src =
        detail::rescale_source_dims(area, factor, canvas, sep, rng);
    if (!row_split) std::swap(src.h, src.w);
    const detail::DimPair dst{scaled_dim(src.h, factor),
                              scaled_dim(src.w, factor)};
    const detail::Placement p =
        detail::place_two(canvas, src, dst, sep, row_split, rng);
    spec.source_rect = Rect{p.a.row, p.a.col, src.h, src.w};
    spec.dest_origin = p.b;
    spec.scale_factor = factor;
    return spec;
  }

  if (kind == ForgeryKind::multi_clone) {
    const int sep = 24;
    const detail::DimPair dims =
        detail::plain_region_dims(area / 2.0, canvas, sep, 3, rng);
    const int ha = dims.h;  // split-axis extent (the capped one)
    const int wa = dims.w;  // cross-axis extent
    const int slack = canvas - (3 * ha + 2 * sep);
    if (slack < 0) throw precondition_error("clones do not fit the canvas");
    const int p1 = rng.below(slack / 3 + 1);
    const int p2 = p1 + ha + sep + rng.below(slack / 3 + 1);
    const int p3 = p2 + ha + sep + rng.below(slack / 3 + 1);
    const int q1 = rng.below(canvas - wa + 1);
    const int q2 = rng.below(canvas - wa + 1);
    const int q3 = rng.below(canvas - wa + 1);
    spec.source_rect =
        row_split ? Rect{p1, q1, ha, wa} : Rect{q1, p1, wa, ha};
    const Point d1 = row_split ? Point{p2, q2} : Point{q2, p2};
    const Point d2 = row_split ? Point{p3, q3} : Point{q3, p3};
    spec.clone_list = {CloneSpec{d1, 1 + k % 50}, CloneSpec{d2, 51 + k % 50}};
    return spec;
  }

  const int sep = 24;
  const detail::DimPair dims =
      detail::plain_region_dims(area, canvas, sep, 2, rng);
  const detail::DimPair rect =
      row_split ? dims : detail::DimPair{dims.w, dims.h};
  const detail::Placement p =
      detail::place_two(canvas, rect, rect, sep, row_split, rng);
  spec.source_rect = Rect{p.a.row, p.a.col, rect.h, rect.w};
  spec.dest_origin = p.b;
  // Stride coprime to 100 spreads offsets across the whole 1..100 range
  // even for short corpora (40 images already include both 1 and 100).
  if (kind == ForgeryKind::intensity_varied) spec.offset = 1 + k * 37 % 100;
  return spec;
}

inline nlohmann::json spec_to_json(const ForgerySpec& spec) {
  nlohmann::json clones = nlohmann::json::array();
  for (const CloneSpec& c : spec.clone_list)
    clones.push_back({{"dest_origin",
                       {{"row", c.dest_origin.row}, {"col", c.dest_origin.col}}},
                      {"offset", c.offset}});
  return {{"kind", kind_name(spec.kind)},
          {"source_rect",
           {{"row", spec.source_rect.row},
            {"col", spec.source_rect.col},
            {"height", spec.source_rect.height},
            {"width", spec.source_rect.width}}},
          {"dest_origin",
           {{"row", spec.dest_origin.row}, {"col", spec.dest_origin.col}}},
          {"scale_factor", spec.scale_factor},
          {"offset", spec.offset},
          {"clone_list", clones},
          {"quantize_output", spec.quantize_output}};
}

inline ForgerySpec spec_from_json(const nlohmann::json& j) {
  ForgerySpec spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  const auto& sr = j.at("source_rect");
  spec.source_rect =
      Rect{sr.at("row").get<int>(), sr.at("col").get<int>(),
           sr.at("height").get<int>(), sr.at("width").get<int>()};
  const auto& d = j.at("dest_origin");
  spec.dest_origin = Point{d.at("row").get<int>(), d.at("col").get<int>()};
  spec.scale_factor = j.at("scale_factor").get<int>();
  spec.offset = j.at("offset").get<int>();
  for (const auto& c : j.at("clone_list")) {
    CloneSpec clone;
    clone.dest_origin = Point{c.at("dest_origin").at("row").get<int>(),
                              c.at("dest_origin").at("col").get<int>()};
    clone.offset = c.at("offset").get<int>();
    spec.clone_list.push_back(clone);
  }
  spec.quantize_output = j.at("quantize_output").get<bool>();
  return spec;
}

// Destination-region pixel area of a forgery (what size buckets measure).
inline std::int64_t dest_area(const ForgerySpec& spec) {
  switch (spec.kind) {
    case ForgeryKind::clean:
      return 0;
    case ForgeryKind::copy_rescale_move:
      return static_cast<std::int64_t>(
                 scaled_dim(spec.source_rect.height, spec.scale_factor)) *
             scaled_dim(spec.source_rect.width, spec.scale_factor);
    case ForgeryKind::multi_clone: {
      std::int64_t total = 0;
      for (std::size_t i = 0; i < spec.clone_list.size(); ++i)
        total += spec.source_rect.area();
      return total;
    }
    default:
      return spec.source_rect.area();
  }
}

inline int nearest_bucket(std::int64_t dest_pixels, std::int64_t image_pixels,
                          const std::vector<int>& buckets) {
  const double frac = 100.0 * static_cast<double>(dest_pixels) /
                      static_cast<double>(image_pixels);
  int best = buckets.front();
  for (int b : buckets)
    if (std::fabs(frac - b) < std::fabs(frac - best)) best = b;
  return best;
}

// Writes count image/mask pairs plus manifest.json. Deterministic in
// (seed, count, kind, sizes, canvas); the job count changes nothing.
inline std::vector<CorpusEntry> generate_corpus(const CorpusConfig& config) {
  if (config.count < 1) throw precondition_error("corpus count below 1");
  if (config.sizes.empty()) throw precondition_error("empty size sweep");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec)
    throw io_error("cannot create corpus directory '" + config.out_dir +
                   "': " + ec.message());

  const bool real_depth = config.kind == ForgeryKind::copy_rescale_move ||
                          config.kind == ForgeryKind::clean;
  std::vector<CorpusEntry> entries(config.count);
  parallel_for(config.count, config.jobs, [&](std::int64_t k) {
    detail::LabRng rng(detail::splitmix64(config.seed) ^
                       detail::splitmix64(static_cast<std::uint64_t>(k) +
                                          0x517cc1b727220a95ull));
    const int size_pct =
        config.kind == ForgeryKind::copy_rescale_move
            ? config.sizes[(static_cast<std::size_t>(k) / 4) %
                           config.sizes.size()]
            : config.sizes[static_cast<std::size_t>(k) %
                           config.sizes.size()];
    const GrayImage base = make_base_texture(
        config.canvas, real_depth ? Depth::real : Depth::integer8, rng);
    const ForgerySpec spec =
        plan_forgery(config.kind, config.canvas, size_pct,
                     static_cast<int>(k), rng);
    const SynthesisResult result = synthesize(base, spec);

    CorpusEntry entry;
    entry.image_file = "img_" + std::to_string(k) +
                       (result.image.depth == Depth::real ? ".f64" : ".png");
    entry.mask_file = "mask_" + std::to_string(k) + ".png";
    entry.spec = result.truth.spec;
    entry.clamped = result.truth.clamped;
    entry.size_bucket_pct =
        config.kind == ForgeryKind::clean
            ? 0
            : nearest_bucket(dest_area(spec),
                             static_cast<std::int64_t>(config.canvas) *
                                 config.canvas,
                             config.sizes);
    save_image(result.image,
               (fs::path(config.out_dir) / entry.image_file).string());
    save_mask(result.truth.mask,
              (fs::path(config.out_dir) / entry.mask_file).string());
    entries[k] = entry;
  });

  nlohmann::json manifest = nlohmann::json::array();
  for (const CorpusEntry& e : entries) {
    nlohmann::json row = spec_to_json(e.spec);
    row["image"] = e.image_file;
    row["mask"] = e.mask_file;
    row["size_bucket_pct"] = e.size_bucket_pct;
    row["clamped"] = e.clamped;
    manifest.push_back(row);
  }
  const std::string manifest_path =
      (fs::path(config.out_dir) / "manifest.json").string();
  std::FILE* f = std::fopen(manifest_path.c_str(), "wb");
  if (!f) throw io_error("cannot write '" + manifest_path + "'");
  const std::string text = manifest.dump(2);
  std::fwrite(text.data(), 1, text.size(), f);
  std::fputc('\n', f);
  std::fclose(f);
  return entries;
}

}  // namespace cmfd

#endif  // CMFD_FORGERY_LAB_HPP
