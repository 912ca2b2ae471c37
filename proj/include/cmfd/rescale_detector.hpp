#ifndef CMFD_RESCALE_DETECTOR_HPP
#define CMFD_RESCALE_DETECTOR_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cstdint>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "cmfd/errors.hpp"
#include "cmfd/geometry.hpp"
#include "cmfd/image.hpp"
#include "cmfd/moments.hpp"
#include "cmfd/parallel.hpp"
#include "cmfd/quantize.hpp"
#include "cmfd/report.hpp"

namespace cmfd {

// Per (block, factor) feature: the four corner values of the unclamped span
// of the resized block, quantized to 15 decimals. Boundary output pixels of
// an upscaled block interpolate virtual samples outside the block and cannot
// reappear inside a larger pasted region, so the feature is anchored to the
// first and last output indices whose sample position stays inside the
// block: exactly those values recur verbatim in a forgery produced by
// rescaling a region that contains the block.
struct CornerFeature {
  Point block_origin;
  int scale_factor = 0;          // percent
  std::array<double, 4> corners{};  // TL, TR, BL, BR of the span
  int span_lo = 0;               // first unclamped output index per axis
  int span_hi = 0;               // last unclamped output index per axis
  int resized_size = 0;          // full resized block dimension
};

struct RescaleCandidate {
  Point source_origin;
  Rect dest_rect;
  int scale_factor = 0;
  bool hu_verified = false;
};

struct RescaleConfig {
  int block_size = 20;
  std::vector<int> factors;  // empty means 10..500 step 10
  double hu_tol = 0.1;
  int jobs = 1;
};

inline std::vector<int> default_scale_factors() {
  std::vector<int> f;
  for (int s = 10; s <= 500; s += 10) f.push_back(s);
  return f;
}

namespace detail {

// Inclusive range of output indices whose sample position does not clamp,
// i.e. (2u+1)*B - bs in [0, 2*bs*(B-1)].
inline void unclamped_span(int block, int resized, int* lo, int* hi) {
  const int b2 = 2 * block;
  *lo = resized > block ? (resized - block + b2 - 1) / b2 : 0;
  *hi = std::min(resized - 1,
                 (2 * resized * block - resized - block) / b2);
}

inline std::uint64_t real_key(double v) {
  const double q = quantize_decimals(v, 15);
  return std::bit_cast<std::uint64_t>(q == 0.0 ? 0.0 : q);
}

inline std::int64_t integer_key(double v) {
  return static_cast<std::int64_t>(round_half_away(v));
}

}  // namespace detail

// One feature per (block, factor), block-major. Factors whose resized block
// is smaller than 2 pixels or whose unclamped span is a single pixel carry
// no rectangle geometry and are skipped.
inline std::vector<CornerFeature> build_corner_features(
    const GrayImage& img, int B, const std::vector<int>& factors,
    int jobs = 1) {
  if (B < 2) throw precondition_error("block size below 2");
  if (factors.empty()) throw precondition_error("empty factor list");
  for (int f : factors)
    if (f < 10) throw precondition_error("scale factor below 10 percent");
  if (img.width < B || img.height < B)
    throw precondition_error("image smaller than one block");

  struct FactorPlan {
    int factor = 0;
    int lo = 0, hi = 0, resized = 0;
    AxisPos pos_lo, pos_hi;
  };
  std::vector<FactorPlan> plans;
  for (int f : factors) {
    FactorPlan p;
    p.factor = f;
    p.resized = scaled_dim(B, f);
    if (p.resized < 2) continue;
    detail::unclamped_span(B, p.resized, &p.lo, &p.hi);
    if (p.hi - p.lo < 1) continue;
    p.pos_lo = axis_position(p.lo, B, p.resized);
    p.pos_hi = axis_position(p.hi, B, p.resized);
    plans.push_back(p);
  }

  const int rows = img.height - B + 1;
  const int cols = img.width - B + 1;
  std::vector<CornerFeature> features(static_cast<std::size_t>(rows) * cols *
                                      plans.size());
  parallel_for(static_cast<std::int64_t>(rows) * cols, jobs,
               [&](std::int64_t bi) {
                 const int r = static_cast<int>(bi / cols);
                 const int c = static_cast<int>(bi % cols);
                 for (std::size_t k = 0; k < plans.size(); ++k) {
                   const FactorPlan& p = plans[k];
                   CornerFeature f;
                   f.block_origin = {r, c};
                   f.scale_factor = p.factor;
                   f.span_lo = p.lo;
                   f.span_hi = p.hi;
                   f.resized_size = p.resized;
                   f.corners[0] = quantize_decimals(
                       sample_bilinear(img, r, c, p.pos_lo, p.pos_lo), 15);
                   f.corners[1] = quantize_decimals(
                       sample_bilinear(img, r, c, p.pos_lo, p.pos_hi), 15);
                   f.corners[2] = quantize_decimals(
                       sample_bilinear(img, r, c, p.pos_hi, p.pos_lo), 15);
                   f.corners[3] = quantize_decimals(
                       sample_bilinear(img, r, c, p.pos_hi, p.pos_hi), 15);
                   features[bi * plans.size() + k] = f;
                 }
               });
  return features;
}

// Four-corner search: pixels equal to the corner values arranged as a square
// of the span size. Destination rectangles overlapping the source block are
// self-matches and dropped (a factor-100 feature always finds its own
// block; that hit lands here).
inline std::vector<RescaleCandidate> match_corners(
    const GrayImage& img, const std::vector<CornerFeature>& features, int B) {
  const bool integer_regime = img.depth == Depth::integer8;
  const int W = img.width, H = img.height;

  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> index;
  index.reserve(img.samples.size() * 2);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    const std::uint64_t key =
        integer_regime
            ? static_cast<std::uint64_t>(detail::integer_key(img.samples[i]))
            : detail::real_key(img.samples[i]);
    index[key].push_back(static_cast<std::int32_t>(i));
  }

  auto pixel_equals = [&](int r, int c, double corner) {
    if (integer_regime)
      return detail::integer_key(img.at(r, c)) == detail::integer_key(corner);
    return detail::real_key(img.at(r, c)) == detail::real_key(corner);
  };

  std::vector<RescaleCandidate> candidates;
  for (const CornerFeature& f : features) {
    const int d = f.span_hi - f.span_lo;
    const std::uint64_t key =
        integer_regime
            ? static_cast<std::uint64_t>(detail::integer_key(f.corners[0]))
            : detail::real_key(f.corners[0]);
    const auto it = index.find(key);
    if (it == index.end()) continue;
    const Rect block_rect{f.block_origin.row, f.block_origin.col, B, B};
    for (std::int32_t pos : it->second) {
      const int r = pos / W;
      const int c = pos % W;
      if (r + d >= H || c + d >= W) continue;
      if (!pixel_equals(r, c + d, f.corners[1])) continue;
      if (!pixel_equals(r + d, c, f.corners[2])) continue;
      if (!pixel_equals(r + d, c + d, f.corners[3])) continue;
      const Rect dest{r, c, d + 1, d + 1};
      if (intersects(dest, block_rect)) continue;
      candidates.push_back(
          RescaleCandidate{f.block_origin, dest, f.scale_factor, false});
    }
  }
  return candidates;
}

namespace detail {

inline bool fully_degenerate(const HuFeature& f) {
  for (bool d : f.degenerate)
    if (!d) return false;
  return true;
}

// The source-side comparison view: the block rescaled, restricted to its
// unclamped span, rounded like the image when the image is 8-bit.
inline GrayImage span_view(const GrayImage& img, const Point& origin, int B,
                           int factor, int lo, int hi) {
  const Rect block{origin.row, origin.col, B, B};
  const GrayImage resized = resize_bilinear(crop(img, block), factor);
  const int d = hi - lo + 1;
  GrayImage view = crop(resized, Rect{lo, lo, d, d});
  if (img.depth == Depth::integer8)
    view = image_from_samples(view.width, view.height, Depth::integer8,
                              view.samples);
  return view;
}

}  // namespace detail

// Moment cross-check: the rescaled-source span and the destination must
// agree on all four invariants within tolerance. Regions whose moments are
// entirely degenerate (constant patches) carry no shape evidence and are
// dropped rather than trusted.
inline std::vector<RescaleCandidate> verify_candidates(
    const GrayImage& img, const std::vector<RescaleCandidate>& candidates,
    int B, double hu_tol, int jobs = 1) {
  std::vector<std::uint8_t> keep(candidates.size(), 0);
  parallel_for(
      static_cast<std::int64_t>(candidates.size()), jobs, [&](std::int64_t i) {
        const RescaleCandidate& cand = candidates[i];
        const int resized = scaled_dim(B, cand.scale_factor);
        int lo = 0, hi = 0;
        detail::unclamped_span(B, resized, &lo, &hi);
        if (hi - lo + 1 != cand.dest_rect.height) return;
        try {
          const HuFeature src = hu_features(detail::span_view(
              img, cand.source_origin, B, cand.scale_factor, lo, hi));
          const HuFeature dst = hu_features(crop(img, cand.dest_rect));
          if (detail::fully_degenerate(src) || detail::fully_degenerate(dst))
            return;
          if (hu_match(src, dst, hu_tol)) keep[i] = 1;
        } catch (const degenerate_image_error&) {
        }
      });
  std::vector<RescaleCandidate> verified;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!keep[i]) continue;
    RescaleCandidate c = candidates[i];
    c.hu_verified = true;
    verified.push_back(c);
  }
  return verified;
}

inline DetectionReport detect_rescale(const GrayImage& img,
                                      const RescaleConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const int B = config.block_size;
  if (img.width < 2 * B || img.height < 2 * B)
    throw precondition_error("image smaller than two blocks");
  const std::vector<int> factors =
      config.factors.empty() ? default_scale_factors() : config.factors;

  const std::vector<CornerFeature> features =
      build_corner_features(img, B, factors, config.jobs);
  const std::vector<RescaleCandidate> candidates =
      match_corners(img, features, B);
  std::vector<RescaleCandidate> verified =
      verify_candidates(img, candidates, B, config.hu_tol, config.jobs);
  std::sort(verified.begin(), verified.end(),
            [](const RescaleCandidate& a, const RescaleCandidate& b) {
              return std::tie(a.source_origin, a.scale_factor, a.dest_rect) <
                     std::tie(b.source_origin, b.scale_factor, b.dest_rect);
            });

  DetectionReport rep;
  rep.method = Method::rescale;
  rep.params = {{"block_size", B},
                {"factors", factors},
                {"hu_tol", config.hu_tol},
                {"corner_quantize_places", 15},
                {"kernel", "bilinear_center_aligned"},
                {"regime",
                 img.depth == Depth::integer8 ? "integer8" : "real"}};
  for (const RescaleCandidate& c : verified) {
    MatchPair m;
    m.source = Rect{c.source_origin.row, c.source_origin.col, B, B};
    m.dest = c.dest_rect;
    m.score = c.scale_factor;
    m.kind = MatchKind::region;
    rep.matches.push_back(m);
  }
  rep.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return rep;
}

}  // namespace cmfd

#endif  // CMFD_RESCALE_DETECTOR_HPP
