#ifndef CMFD_EVALUATION_HPP
#define CMFD_EVALUATION_HPP

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "cmfd/errors.hpp"
#include "cmfd/image.hpp"
#include "json.hpp"

namespace cmfd {

// Pixel-level accuracy of a predicted mask against ground truth:
// P = 100 * |pred AND truth| / |truth|.
struct Score {
  std::int64_t correctly_detected = 0;   // |pred AND truth|
  std::int64_t actually_forged = 0;      // |truth|
  std::int64_t false_positive_pixels = 0;  // |pred AND NOT truth|
  double P = 0.0;                        // percent
};

namespace detail {

// Masks store one 0/1 byte per pixel, so eight pixels pack into a uint64
// and popcount(a & b) counts the agreeing ones.
inline std::int64_t count_and_words(const std::uint8_t* a,
                                    const std::uint8_t* b, std::size_t n,
                                    bool negate_b) {
  std::int64_t total = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    std::uint64_t wa, wb;
    std::memcpy(&wa, a + i, 8);
    std::memcpy(&wb, b + i, 8);
    if (negate_b) wb ^= 0x0101010101010101ull;
    total += std::popcount(wa & wb);
  }
  for (; i < n; ++i) total += a[i] & (negate_b ? b[i] ^ 1 : b[i]);
  return total;
}

}  // namespace detail

inline Score score(const BinaryMask& pred, const BinaryMask& truth) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw precondition_error("mask dimensions differ");
  Score s;
  s.actually_forged = truth.count();
  if (s.actually_forged == 0)
    throw metric_error("ground truth marks no pixels; accuracy undefined");
  const std::size_t n = truth.bits.size();
  s.correctly_detected =
      detail::count_and_words(pred.bits.data(), truth.bits.data(), n, false);
  s.false_positive_pixels =
      detail::count_and_words(pred.bits.data(), truth.bits.data(), n, true);
  s.P = 100.0 * static_cast<double>(s.correctly_detected) /
        static_cast<double>(s.actually_forged);
  return s;
}

// Reference implementation: one pixel at a time, no packing.
inline Score score_naive(const BinaryMask& pred, const BinaryMask& truth) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw precondition_error("mask dimensions differ");
  Score s;
  for (std::size_t i = 0; i < truth.bits.size(); ++i) {
    const bool p = pred.bits[i] != 0;
    const bool t = truth.bits[i] != 0;
    s.actually_forged += t;
    s.correctly_detected += p && t;
    s.false_positive_pixels += p && !t;
  }
  if (s.actually_forged == 0)
    throw metric_error("ground truth marks no pixels; accuracy undefined");
  s.P = 100.0 * static_cast<double>(s.correctly_detected) /
        static_cast<double>(s.actually_forged);
  return s;
}

struct ImageScore {
  std::string image_id;
  std::string method;
  int size_bucket_pct = 0;
  Score score;
};

struct Aggregate {
  std::map<int, double> bucket_mean_p;  // only buckets that had images
  std::map<int, int> bucket_counts;
  double grand_mean_p = 0.0;
  int total = 0;
  std::vector<std::string> warnings;  // one per empty requested bucket
};

inline Aggregate aggregate(const std::vector<ImageScore>& rows,
                           const std::vector<int>& buckets) {
  Aggregate agg;
  std::map<int, double> sums;
  double grand = 0.0;
  for (const ImageScore& row : rows) {
    sums[row.size_bucket_pct] += row.score.P;
    agg.bucket_counts[row.size_bucket_pct] += 1;
    grand += row.score.P;
    agg.total += 1;
  }
  for (int b : buckets) {
    const auto it = agg.bucket_counts.find(b);
    if (it == agg.bucket_counts.end()) {
      agg.warnings.push_back("size bucket " + std::to_string(b) +
                             "% has no images; skipped");
      continue;
    }
    agg.bucket_mean_p[b] = sums[b] / it->second;
  }
  // Buckets present in the data but absent from the requested sweep still
  // report their mean.
  for (const auto& [b, c] : agg.bucket_counts)
    if (!agg.bucket_mean_p.count(b)) agg.bucket_mean_p[b] = sums[b] / c;
  if (agg.total > 0) agg.grand_mean_p = grand / agg.total;
  return agg;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string scores_to_csv(const std::vector<ImageScore>& rows) {
  std::string out = "image_id,method,size_bucket_pct,P_pct,fp_pixels\n";
  for (const ImageScore& row : rows) {
    out += row.image_id;
    out += ',';
    out += row.method;
    out += ',';
    out += std::to_string(row.size_bucket_pct);
    out += ',';
    out += format_double(row.score.P);
    out += ',';
    out += std::to_string(row.score.false_positive_pixels);
    out += '\n';
  }
  return out;
}

inline nlohmann::json scores_to_json(const std::vector<ImageScore>& rows,
                                     const Aggregate& agg) {
  nlohmann::json jrows = nlohmann::json::array();
  for (const ImageScore& row : rows)
    jrows.push_back({{"image_id", row.image_id},
                     {"method", row.method},
                     {"size_bucket_pct", row.size_bucket_pct},
                     {"P_pct", row.score.P},
                     {"fp_pixels", row.score.false_positive_pixels},
                     {"correctly_detected", row.score.correctly_detected},
                     {"actually_forged", row.score.actually_forged}});
  nlohmann::json jbuckets = nlohmann::json::object();
  for (const auto& [b, mean] : agg.bucket_mean_p)
    jbuckets[std::to_string(b)] = mean;
  return {{"rows", jrows},
          {"bucket_mean_p", jbuckets},
          {"grand_mean_p", agg.grand_mean_p},
          {"total_images", agg.total},
          {"warnings", agg.warnings}};
}

}  // namespace cmfd

#endif  // CMFD_EVALUATION_HPP
