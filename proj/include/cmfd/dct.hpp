#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "cmfd/errors.hpp"
#include "cmfd/image.hpp"

namespace cmfd {

// Orthonormal type-II DCT basis: row u, column x holds
// alpha(u) * cos(pi * (2x+1) * u / 2B), alpha(0)=sqrt(1/B), else sqrt(2/B).
inline std::vector<double> dct_matrix(int B) {
  if (B < 2) throw precondition_error("transform size must be at least 2");
  std::vector<double> d(static_cast<std::size_t>(B) * B);
  const double a0 = std::sqrt(1.0 / B);
  const double a = std::sqrt(2.0 / B);
  for (int u = 0; u < B; ++u)
    for (int x = 0; x < B; ++x)
      d[static_cast<std::size_t>(u) * B + x] =
          (u == 0 ? a0 : a) *
          std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * B));
  return d;
}

inline const std::vector<double>& cached_dct_matrix(int B) {
  static std::mutex mu;
  static std::map<int, std::vector<double>> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(B);
  if (it == cache.end()) it = cache.emplace(B, dct_matrix(B)).first;
  return it->second;
}

struct DctBlock {
  int size = 0;
  std::vector<double> coeffs;  // (u,v) row-major, coeffs[0] = DC

  double at(int u, int v) const {
    return coeffs[static_cast<std::size_t>(u) * size + v];
  }
};

// D * S * D^T. The AC part is evaluated on the mean-subtracted block: a
// constant shift then changes the transform input not at all (the centered
// samples of S and S+k are identical doubles), so AC coefficients of
// intensity-shifted copies come out bit-equal rather than merely close.
// The DC slot is the exact (1/B) * sum, which the subtraction removed.
inline DctBlock block_dct_2d(const Block& block) {
  const int B = block.size;
  const auto& D = cached_dct_matrix(B);
  const std::size_t n = static_cast<std::size_t>(B) * B;

  double sum = 0.0;
  for (double v : block.samples) sum += v;
  const double mean = sum / static_cast<double>(n);

  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = block.samples[i] - mean;

  // tmp[y][v] = sum_x centered[y][x] * D[v][x]
  std::vector<double> tmp(n, 0.0);
  for (int y = 0; y < B; ++y)
    for (int v = 0; v < B; ++v) {
      double acc = 0.0;
      for (int x = 0; x < B; ++x)
        acc += centered[static_cast<std::size_t>(y) * B + x] *
               D[static_cast<std::size_t>(v) * B + x];
      tmp[static_cast<std::size_t>(y) * B + v] = acc;
    }

  DctBlock out;
  out.size = B;
  out.coeffs.assign(n, 0.0);
  for (int u = 0; u < B; ++u)
    for (int v = 0; v < B; ++v) {
      double acc = 0.0;
      for (int y = 0; y < B; ++y)
        acc += D[static_cast<std::size_t>(u) * B + y] *
               tmp[static_cast<std::size_t>(y) * B + v];
      out.coeffs[static_cast<std::size_t>(u) * B + v] = acc;
    }
  out.coeffs[0] = sum / static_cast<double>(B);
  return out;
}

}  // namespace cmfd
