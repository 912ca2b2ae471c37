#ifndef CMFD_DCT_DETECTOR_HPP
#define CMFD_DCT_DETECTOR_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "cmfd/dct.hpp"
#include "cmfd/errors.hpp"
#include "cmfd/geometry.hpp"
#include "cmfd/image.hpp"
#include "cmfd/parallel.hpp"
#include "cmfd/quantize.hpp"
#include "cmfd/report.hpp"

namespace cmfd {

// One block's intensity-robust feature: its quantized AC coefficients in
// row-major order, DC dropped.
struct FeatureRow {
  std::vector<double> coeffs;
  Point origin;
};

struct FeatureMatrix {
  int block_size = 0;
  std::vector<FeatureRow> rows;  // sorted by coeffs, then origin
};

struct DctConfig {
  int block_size = 8;
  double threshold = 16.0;  // pairs closer than this are ignored
  int quantize_places = 13;
  int jobs = 1;
};

inline FeatureRow block_feature_row(const Block& blk, int places) {
  const DctBlock d = block_dct_2d(blk);
  FeatureRow row;
  row.origin = {blk.row, blk.col};
  row.coeffs.resize(d.coeffs.size() - 1);
  for (std::size_t i = 1; i < d.coeffs.size(); ++i)
    row.coeffs[i - 1] = quantize_decimals(d.coeffs[i], places);
  return row;
}

// One row per overlapping block, lexicographically sorted with origin as the
// final tie-break.
inline FeatureMatrix build_feature_matrix(const GrayImage& img,
                                          const DctConfig& config) {
  const int B = config.block_size;
  if (B != 4 && B != 8) throw precondition_error("block size must be 4 or 8");
  if (img.width < B || img.height < B)
    throw precondition_error("image smaller than one block");
  const std::vector<Block> blocks = overlapping_blocks(img, B);
  FeatureMatrix matrix;
  matrix.block_size = B;
  matrix.rows.resize(blocks.size());
  parallel_for(static_cast<std::int64_t>(blocks.size()), config.jobs,
               [&](std::int64_t i) {
                 matrix.rows[i] =
                     block_feature_row(blocks[i], config.quantize_places);
               });
  std::sort(matrix.rows.begin(), matrix.rows.end(),
            [](const FeatureRow& a, const FeatureRow& b) {
              if (a.coeffs != b.coeffs) return a.coeffs < b.coeffs;
              return a.origin < b.origin;
            });
  return matrix;
}

// All unordered origin pairs within each maximal run of equal rows.
inline std::vector<std::pair<Point, Point>> adjacent_matches(
    const FeatureMatrix& matrix) {
  std::vector<std::pair<Point, Point>> pairs;
  const auto& rows = matrix.rows;
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= rows.size(); ++i) {
    if (i < rows.size() && rows[i].coeffs == rows[run_start].coeffs) continue;
    for (std::size_t a = run_start; a < i; ++a)
      for (std::size_t b = a + 1; b < i; ++b)
        pairs.emplace_back(rows[a].origin, rows[b].origin);
    run_start = i;
  }
  return pairs;
}

inline double origin_distance(const Point& a, const Point& b) {
  const double dr = a.row - b.row;
  const double dc = a.col - b.col;
  return std::sqrt(dr * dr + dc * dc);
}

// Keeps pairs whose origins are strictly farther apart than the threshold.
inline std::vector<MatchPair> distance_filter(
    const std::vector<std::pair<Point, Point>>& pairs, int block_size,
    double threshold) {
  if (threshold < 0) throw precondition_error("negative distance threshold");
  std::vector<MatchPair> kept;
  for (const auto& [a, b] : pairs) {
    const double dist = origin_distance(a, b);
    if (dist <= threshold) continue;
    const bool a_first = a < b;
    const Point& src = a_first ? a : b;
    const Point& dst = a_first ? b : a;
    MatchPair m;
    m.source = Rect{src.row, src.col, block_size, block_size};
    m.dest = Rect{dst.row, dst.col, block_size, block_size};
    m.score = dist;
    m.kind = MatchKind::block;
    kept.push_back(m);
  }
  return kept;
}

// Full pipeline. Equal-row runs are scanned streaming with the distance test
// applied per pair, so flat images (one giant run) never materialize the
// quadratic pair list; the kept set is identical to
// distance_filter(adjacent_matches(...)).
inline DetectionReport detect_intensity_dct(const GrayImage& img,
                                            const DctConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const FeatureMatrix matrix = build_feature_matrix(img, config);
  DetectionReport rep;
  rep.method = Method::dct;
  rep.params = {{"block_size", config.block_size},
                {"threshold", config.threshold},
                {"quantize_places", config.quantize_places},
                {"flattening", "row_major"},
                {"depth",
                 img.depth == Depth::integer8 ? "integer8" : "real"}};
  const auto& rows = matrix.rows;
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= rows.size(); ++i) {
    if (i < rows.size() && rows[i].coeffs == rows[run_start].coeffs) continue;
    for (std::size_t a = run_start; a < i; ++a) {
      for (std::size_t b = a + 1; b < i; ++b) {
        const double dist = origin_distance(rows[a].origin, rows[b].origin);
        if (dist <= config.threshold) continue;
        MatchPair m;
        m.source = Rect{rows[a].origin.row, rows[a].origin.col,
                        config.block_size, config.block_size};
        m.dest = Rect{rows[b].origin.row, rows[b].origin.col,
                      config.block_size, config.block_size};
        m.score = dist;
        m.kind = MatchKind::block;
        rep.matches.push_back(m);
      }
    }
    run_start = i;
  }
  std::sort(rep.matches.begin(), rep.matches.end(),
            [](const MatchPair& x, const MatchPair& y) {
              return std::tie(x.source, x.dest) < std::tie(y.source, y.dest);
            });
  rep.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return rep;
}

}  // namespace cmfd

#endif  // CMFD_DCT_DETECTOR_HPP
