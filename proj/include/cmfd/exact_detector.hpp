#ifndef CMFD_EXACT_DETECTOR_HPP
#define CMFD_EXACT_DETECTOR_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "cmfd/errors.hpp"
#include "cmfd/geometry.hpp"
#include "cmfd/image.hpp"
#include "cmfd/parallel.hpp"
#include "cmfd/report.hpp"

namespace cmfd {

// Outcome of comparing two same-size blocks for a uniform intensity offset.
struct DiffResult {
  Point a_origin;
  Point b_origin;
  int constant = 0;
  int saturated_count = 0;
};

namespace detail {

inline bool integer_samples(const GrayImage& img) {
  return img.depth == Depth::integer8;
}

inline std::uint64_t fnv1a(const int* data, std::size_t n,
                           std::uint64_t seed = 1469598103934665603ull) {
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(data[i]));
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

// Tests whether block a is block b shifted by one positive constant,
// repairing positions clipped at 255 in a (the brightened copy) by swapping
// them for the maximum of the difference matrix. Pairs where both blocks
// carry saturated pixels are rejected: the directional repair assumes the
// clipping happened on the copy only. A uniform zero difference is not a
// match here; identical clones are reported through the plain-copy path.
inline std::optional<DiffResult> block_pair_difference(const Block& a,
                                                       const Block& b) {
  if (a.size != b.size) throw precondition_error("block sizes differ");
  const std::size_t n = a.samples.size();
  std::vector<int> d(n);
  bool a_sat = false, b_sat = false;
  for (std::size_t i = 0; i < n; ++i) {
    const int av = static_cast<int>(a.samples[i]);
    const int bv = static_cast<int>(b.samples[i]);
    a_sat = a_sat || av == 255;
    b_sat = b_sat || bv == 255;
    d[i] = av - bv;
  }
  bool uniform = true;
  for (std::size_t i = 1; i < n; ++i) uniform = uniform && d[i] == d[0];
  if (uniform && d[0] > 0)
    return DiffResult{{a.row, a.col}, {b.row, b.col}, d[0], 0};
  if (!a_sat || b_sat) return std::nullopt;
  const int repair = *std::max_element(d.begin(), d.end());
  int repaired = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<int>(a.samples[i]) == 255) {
      d[i] = repair;
      ++repaired;
    }
  }
  // A fully clipped block carries no evidence: repairing every position
  // makes the difference vacuously uniform against any block at all.
  if (repaired == static_cast<int>(n)) return std::nullopt;
  for (std::size_t i = 1; i < n; ++i)
    if (d[i] != d[0]) return std::nullopt;
  if (d[0] <= 0) return std::nullopt;
  return DiffResult{{a.row, a.col}, {b.row, b.col}, d[0], repaired};
}

struct ExactConfig {
  int block_size = 4;
  int min_offset = -1;  // Chebyshev distance between origins; -1 means 2*B
  bool include_zero_offset = true;  // also report identical (offset 0) clones
  int jobs = 1;
};

namespace detail {

struct SigBlock {
  std::uint64_t sig_hash = 0;
  int min_value = 0;
  bool saturated = false;
  std::uint32_t index = 0;  // into the block list
};

// Offset-invariant signature: the block minus its own minimum. Two blocks
// whose difference is uniform necessarily share it.
inline void block_signature(const Block& blk, std::vector<int>& out,
                            int* min_value, bool* saturated) {
  int mn = 256;
  bool sat = false;
  for (double s : blk.samples) {
    const int v = static_cast<int>(s);
    mn = std::min(mn, v);
    sat = sat || v == 255;
  }
  out.resize(blk.samples.size());
  for (std::size_t i = 0; i < blk.samples.size(); ++i)
    out[i] = static_cast<int>(blk.samples[i]) - mn;
  *min_value = mn;
  *saturated = sat;
}

}  // namespace detail

// All uniform-offset block pairs of the image, exactly the set the naive
// all-pairs subtraction finds, minus pairs closer than min_offset. Signature
// buckets only narrow the candidate set; every reported pair re-verifies
// through block_pair_difference (or raw equality for zero offsets).
inline std::vector<DiffResult> exact_match_pairs(const GrayImage& img,
                                                 const ExactConfig& config) {
  if (!detail::integer_samples(img))
    throw precondition_error("exact matching requires integer8 samples");
  const int B = config.block_size;
  if (B < 2) throw precondition_error("block size below 2");
  if (img.width < 2 * B || img.height < 2 * B)
    throw precondition_error("image smaller than two blocks");
  const int min_offset = config.min_offset >= 0 ? config.min_offset : 2 * B;

  const std::vector<Block> blocks = overlapping_blocks(img, B);
  const std::size_t n = blocks.size();
  std::vector<detail::SigBlock> sigs(n);
  parallel_for(static_cast<std::int64_t>(n), config.jobs,
               [&](std::int64_t i) {
                 std::vector<int> sig;
                 detail::SigBlock s;
                 detail::block_signature(blocks[i], sig, &s.min_value,
                                         &s.saturated);
                 s.sig_hash = detail::fnv1a(sig.data(), sig.size());
                 s.index = static_cast<std::uint32_t>(i);
                 sigs[i] = s;
               });

  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  buckets.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i)
    buckets[sigs[i].sig_hash].push_back(static_cast<std::uint32_t>(i));

  auto far_enough = [&](const Block& x, const Block& y) {
    return chebyshev_distance({x.row, x.col}, {y.row, y.col}) >= min_offset;
  };

  std::vector<DiffResult> matches;
  for (auto& [hash, members] : buckets) {
    if (members.size() < 2) continue;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const detail::SigBlock& si = sigs[members[i]];
        const detail::SigBlock& sj = sigs[members[j]];
        const Block& bi = blocks[si.index];
        const Block& bj = blocks[sj.index];
        if (!far_enough(bi, bj)) continue;
        if (si.min_value == sj.min_value) {
          if (!config.include_zero_offset) continue;
          if (bi.samples != bj.samples) continue;  // hash collision guard
          const bool i_first = Point{bi.row, bi.col} < Point{bj.row, bj.col};
          const Block& first = i_first ? bi : bj;
          const Block& second = i_first ? bj : bi;
          matches.push_back(DiffResult{{second.row, second.col},
                                       {first.row, first.col},
                                       0,
                                       0});
          continue;
        }
        const Block& brighter = si.min_value > sj.min_value ? bi : bj;
        const Block& darker = si.min_value > sj.min_value ? bj : bi;
        if (auto r = block_pair_difference(brighter, darker))
          matches.push_back(*r);
      }
    }
  }

  // Saturation-repaired matches: blocks with 255s hide their true offset, so
  // they fall in different buckets. Probe them against the rest with the
  // saturated positions excluded from the signature.
  std::vector<std::uint32_t> probes;
  for (std::size_t i = 0; i < n; ++i)
    if (sigs[i].saturated) probes.push_back(static_cast<std::uint32_t>(i));
  if (!probes.empty()) {
    // Group probes by their saturation mask; one masked index per mask.
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_mask;
    auto mask_hash = [&](const Block& blk) {
      std::vector<int> pos;
      for (std::size_t k = 0; k < blk.samples.size(); ++k)
        if (static_cast<int>(blk.samples[k]) == 255)
          pos.push_back(static_cast<int>(k));
      return detail::fnv1a(pos.data(), pos.size());
    };
    for (std::uint32_t p : probes) by_mask[mask_hash(blocks[p])].push_back(p);
    for (auto& [mh, group] : by_mask) {
      // The mask itself, from the first group member.
      std::vector<bool> is_sat(blocks[group[0]].samples.size(), false);
      for (std::size_t k = 0; k < is_sat.size(); ++k)
        is_sat[k] = static_cast<int>(blocks[group[0]].samples[k]) == 255;
      auto masked_sig = [&](const Block& blk, std::vector<int>& sig) {
        int mn = 256;
        for (std::size_t k = 0; k < blk.samples.size(); ++k)
          if (!is_sat[k]) mn = std::min(mn, static_cast<int>(blk.samples[k]));
        sig.clear();
        if (mn == 256) return false;  // fully saturated mask
        for (std::size_t k = 0; k < blk.samples.size(); ++k)
          if (!is_sat[k])
            sig.push_back(static_cast<int>(blk.samples[k]) - mn);
        return true;
      };
      std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index;
      std::vector<int> sig;
      for (std::size_t i = 0; i < n; ++i) {
        if (sigs[i].saturated) continue;  // both-saturated pairs rejected
        if (!masked_sig(blocks[i], sig)) continue;
        index[detail::fnv1a(sig.data(), sig.size())].push_back(
            static_cast<std::uint32_t>(i));
      }
      for (std::uint32_t p : group) {
        if (!masked_sig(blocks[p], sig)) continue;
        auto it = index.find(detail::fnv1a(sig.data(), sig.size()));
        if (it == index.end()) continue;
        for (std::uint32_t cand : it->second) {
          if (!far_enough(blocks[p], blocks[cand])) continue;
          if (auto r = block_pair_difference(blocks[p], blocks[cand]))
            matches.push_back(*r);
        }
      }
    }
  }

  std::sort(matches.begin(), matches.end(), [](const DiffResult& x,
                                               const DiffResult& y) {
    return std::tie(x.a_origin, x.b_origin) < std::tie(y.a_origin, y.b_origin);
  });
  matches.erase(std::unique(matches.begin(), matches.end(),
                            [](const DiffResult& x, const DiffResult& y) {
                              return x.a_origin == y.a_origin &&
                                     x.b_origin == y.b_origin;
                            }),
                matches.end());
  return matches;
}

// Reference oracle: literal all-pairs subtraction, quadratic in block count.
inline std::vector<DiffResult> exact_match_pairs_naive(
    const GrayImage& img, const ExactConfig& config) {
  if (!detail::integer_samples(img))
    throw precondition_error("exact matching requires integer8 samples");
  const int B = config.block_size;
  const int min_offset = config.min_offset >= 0 ? config.min_offset : 2 * B;
  const std::vector<Block> blocks = overlapping_blocks(img, B);
  std::vector<DiffResult> matches;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (std::size_t j = i + 1; j < blocks.size(); ++j) {
      const Block& bi = blocks[i];
      const Block& bj = blocks[j];
      if (chebyshev_distance({bi.row, bi.col}, {bj.row, bj.col}) < min_offset)
        continue;
      if (config.include_zero_offset && bi.samples == bj.samples) {
        matches.push_back(DiffResult{{bj.row, bj.col}, {bi.row, bi.col}, 0, 0});
        continue;
      }
      if (auto r = block_pair_difference(bi, bj)) {
        matches.push_back(*r);
        continue;
      }
      if (auto r = block_pair_difference(bj, bi)) matches.push_back(*r);
    }
  }
  std::sort(matches.begin(), matches.end(), [](const DiffResult& x,
                                               const DiffResult& y) {
    return std::tie(x.a_origin, x.b_origin) < std::tie(y.a_origin, y.b_origin);
  });
  return matches;
}

// Full pipeline: match pairs, mark both blocks of every match.
inline DetectionReport detect_intensity_exact(const GrayImage& img,
                                              const ExactConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<DiffResult> pairs = exact_match_pairs(img, config);
  const int B = config.block_size;
  DetectionReport rep;
  rep.method = Method::exact;
  rep.params = {{"block_size", B},
                {"min_offset",
                 config.min_offset >= 0 ? config.min_offset : 2 * B},
                {"include_zero_offset", config.include_zero_offset},
                {"depth", "integer8"}};
  for (const DiffResult& d : pairs) {
    MatchPair m;
    m.source = Rect{d.b_origin.row, d.b_origin.col, B, B};
    m.dest = Rect{d.a_origin.row, d.a_origin.col, B, B};
    m.score = d.constant;
    m.kind = MatchKind::block;
    rep.matches.push_back(m);
  }
  rep.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return rep;
}

}  // namespace cmfd

#endif  // CMFD_EXACT_DETECTOR_HPP
