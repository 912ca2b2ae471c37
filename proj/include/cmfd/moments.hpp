#pragma once

#include <array>
#include <cmath>

#include "cmfd/errors.hpp"
#include "cmfd/image.hpp"

namespace cmfd {

inline double raw_moment(const GrayImage& img, int p, int q) {
  if (p < 0 || p > 3 || q < 0 || q > 3)
    throw precondition_error("moment order out of range");
  double acc = 0.0;
  for (int y = 0; y < img.height; ++y) {
    const double yq = q == 0 ? 1.0 : std::pow(static_cast<double>(y), q);
    for (int x = 0; x < img.width; ++x) {
      const double xp = p == 0 ? 1.0 : std::pow(static_cast<double>(x), p);
      acc += xp * yq * img.at(y, x);
    }
  }
  return acc;
}

// mu[p][q] for p+q <= 3, plus the centroid it was taken about.
struct CentralMoments {
  double mu[4][4];
  double centroid_x, centroid_y;
  double mu00() const { return mu[0][0]; }
};

inline CentralMoments central_moments(const GrayImage& img) {
  const double m00 = raw_moment(img, 0, 0);
  if (m00 <= 0.0)
    throw degenerate_image_error("zero-mass image has no centroid");
  const double xbar = raw_moment(img, 1, 0) / m00;
  const double ybar = raw_moment(img, 0, 1) / m00;
  CentralMoments out{};
  out.centroid_x = xbar;
  out.centroid_y = ybar;
  for (int y = 0; y < img.height; ++y) {
    const double dy = static_cast<double>(y) - ybar;
    double dyq[4] = {1.0, dy, dy * dy, dy * dy * dy};
    for (int x = 0; x < img.width; ++x) {
      const double dx = static_cast<double>(x) - xbar;
      double dxp[4] = {1.0, dx, dx * dx, dx * dx * dx};
      const double f = img.at(y, x);
      for (int p = 0; p <= 3; ++p)
        for (int q = 0; p + q <= 3; ++q) out.mu[p][q] += dxp[p] * dyq[q] * f;
    }
  }
  return out;
}

// eta[p][q] for 2 <= p+q <= 3; other slots are zero.
struct NormalizedMoments {
  double eta[4][4];
};

inline NormalizedMoments normalized_moments(const CentralMoments& cm) {
  if (cm.mu00() <= 0.0)
    throw degenerate_image_error("zero-mass image cannot be normalised");
  NormalizedMoments out{};
  for (int p = 0; p <= 3; ++p) {
    for (int q = 0; p + q <= 3; ++q) {
      if (p + q < 2) continue;
      const double gamma = static_cast<double>(p + q + 2) / 2.0;
      out.eta[p][q] = cm.mu[p][q] / std::pow(cm.mu00(), gamma);
    }
  }
  return out;
}

struct HuFeature {
  std::array<double, 4> phi;
  std::array<double, 4> log_abs;
  std::array<bool, 4> degenerate;
};

inline HuFeature hu_features(const GrayImage& img) {
  const NormalizedMoments n = normalized_moments(central_moments(img));
  const double e20 = n.eta[2][0], e02 = n.eta[0][2], e11 = n.eta[1][1];
  const double e30 = n.eta[3][0], e03 = n.eta[0][3];
  const double e21 = n.eta[2][1], e12 = n.eta[1][2];
  HuFeature out{};
  out.phi[0] = e20 + e02;
  out.phi[1] = (e20 - e02) * (e20 - e02) + 4.0 * e11 * e11;
  out.phi[2] = (e30 - 3.0 * e12) * (e30 - 3.0 * e12) +
               (3.0 * e21 - e03) * (3.0 * e21 - e03);
  out.phi[3] = (e30 + e12) * (e30 + e12) + (e21 + e03) * (e21 + e03);
  for (int i = 0; i < 4; ++i) {
    if (out.phi[i] == 0.0) {
      out.degenerate[i] = true;
      out.log_abs[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      out.degenerate[i] = false;
      out.log_abs[i] = std::fabs(std::log10(std::fabs(out.phi[i])));
    }
  }
  return out;
}

inline HuFeature hu_features(const Block& block) {
  return hu_features(block_to_image(block));
}

inline bool hu_match(const HuFeature& a, const HuFeature& b, double tol) {
  if (!(tol > 0.0)) throw precondition_error("tolerance must be positive");
  for (int i = 0; i < 4; ++i) {
    if (a.degenerate[i] != b.degenerate[i]) return false;
    if (a.degenerate[i]) continue;
    if (std::fabs(a.log_abs[i] - b.log_abs[i]) > tol) return false;
  }
  return true;
}

}  // namespace cmfd
