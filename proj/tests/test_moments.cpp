#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmfd/image.hpp"
#include "cmfd/moments.hpp"

using namespace cmfd;

namespace {

GrayImage random_real_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> s(static_cast<std::size_t>(w) * h);
  for (double& v : s)
    v = 1.0 + 254.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  return image_from_samples(w, h, Depth::real, std::move(s));
}

HuFeature feature_from_logs(std::initializer_list<double> logs) {
  HuFeature f{};
  int i = 0;
  for (double v : logs) {
    f.phi[i] = std::pow(10.0, -v);
    f.log_abs[i] = v;
    f.degenerate[i] = false;
    ++i;
  }
  return f;
}

}  // namespace

TEST(RawMoment, HandComputedExamples) {
  GrayImage ones = make_image(2, 2, Depth::integer8, 1.0);
  EXPECT_EQ(raw_moment(ones, 0, 0), 4.0);
  EXPECT_EQ(raw_moment(ones, 1, 0), 2.0);  // column indices 0+1, two rows
  EXPECT_EQ(raw_moment(ones, 0, 1), 2.0);

  GrayImage single = make_image(1, 1, Depth::integer8, 7.0);
  EXPECT_EQ(raw_moment(single, 0, 0), 7.0);
  EXPECT_EQ(raw_moment(single, 2, 1), 0.0);  // 0^p kills the only term

  // Asymmetric case, fully expanded by hand:
  // values [[1,2],[3,4]], M11 = sum x*y*f = 1*1*4 = 4
  GrayImage asym = image_from_samples(2, 2, Depth::integer8, {1, 2, 3, 4});
  EXPECT_EQ(raw_moment(asym, 0, 0), 10.0);
  EXPECT_EQ(raw_moment(asym, 1, 0), 6.0);  // 2 + 4 in column 1
  EXPECT_EQ(raw_moment(asym, 0, 1), 7.0);  // 3 + 4 in row 1
  EXPECT_EQ(raw_moment(asym, 1, 1), 4.0);

  EXPECT_THROW(raw_moment(ones, 4, 0), precondition_error);
  EXPECT_THROW(raw_moment(ones, 0, -1), precondition_error);
}

TEST(CentralMoments, ConstantFourByFour) {
  GrayImage img = make_image(4, 4, Depth::integer8, 1.0);
  CentralMoments cm = central_moments(img);
  EXPECT_EQ(cm.mu00(), 16.0);
  EXPECT_EQ(cm.centroid_x, 1.5);
  EXPECT_EQ(cm.centroid_y, 1.5);
  // 4 rows, each contributing (x-1.5)^2 summed over x in 0..3 = 5
  EXPECT_DOUBLE_EQ(cm.mu[2][0], 20.0);
  EXPECT_DOUBLE_EQ(cm.mu[0][2], 20.0);
  EXPECT_NEAR(cm.mu[1][0], 0.0, 1e-9 * cm.mu00());
  EXPECT_NEAR(cm.mu[0][1], 0.0, 1e-9 * cm.mu00());
}

TEST(CentralMoments, FirstOrderVanishes) {
  GrayImage img = random_real_image(11, 7, 21);
  CentralMoments cm = central_moments(img);
  EXPECT_NEAR(cm.mu[1][0], 0.0, 1e-9 * cm.mu00());
  EXPECT_NEAR(cm.mu[0][1], 0.0, 1e-9 * cm.mu00());
}

TEST(CentralMoments, TranslationInvariant) {
  GrayImage img = random_real_image(8, 8, 31);
  GrayImage canvas = make_image(30, 26, Depth::real, 0.0);
  const int off_r = 9, off_c = 13;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      canvas.at(off_r + r, off_c + c) = img.at(r, c);
  CentralMoments a = central_moments(img);
  CentralMoments b = central_moments(canvas);
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; p + q <= 3; ++q) {
      double scale = std::max(1.0, std::fabs(a.mu[p][q]));
      EXPECT_NEAR(a.mu[p][q], b.mu[p][q], 1e-9 * scale) << p << "," << q;
    }
}

TEST(CentralMoments, ZeroMassRejected) {
  GrayImage img = make_image(4, 4, Depth::integer8, 0.0);
  EXPECT_THROW(central_moments(img), degenerate_image_error);
}

TEST(NormalizedMoments, ConstantFourByFour) {
  GrayImage img = make_image(4, 4, Depth::integer8, 1.0);
  NormalizedMoments n = normalized_moments(central_moments(img));
  EXPECT_DOUBLE_EQ(n.eta[2][0], 0.078125);  // 20 / 16^2
  EXPECT_DOUBLE_EQ(n.eta[0][2], 0.078125);
  EXPECT_DOUBLE_EQ(n.eta[1][1], 0.0);
}

TEST(NormalizedMoments, IntensityScalingLaw) {
  // Scaling every sample by k scales eta_pq by k^(1-gamma).
  GrayImage img = random_real_image(9, 9, 55);
  GrayImage halved = img;
  for (double& v : halved.samples) v *= 0.5;
  NormalizedMoments n1 = normalized_moments(central_moments(img));
  NormalizedMoments nh = normalized_moments(central_moments(halved));
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; p + q <= 3; ++q) {
      if (p + q < 2) continue;
      const double gamma = (p + q + 2) / 2.0;
      const double expect = n1.eta[p][q] * std::pow(0.5, 1.0 - gamma);
      EXPECT_NEAR(nh.eta[p][q], expect, 1e-12 + 1e-9 * std::fabs(expect))
          << p << "," << q;
    }
}

TEST(HuFeatures, ConstantFourByFour) {
  GrayImage img = make_image(4, 4, Depth::integer8, 1.0);
  HuFeature f = hu_features(img);
  EXPECT_DOUBLE_EQ(f.phi[0], 0.15625);
  EXPECT_EQ(f.phi[1], 0.0);
  EXPECT_EQ(f.phi[2], 0.0);
  EXPECT_EQ(f.phi[3], 0.0);
  EXPECT_FALSE(f.degenerate[0]);
  EXPECT_TRUE(f.degenerate[1]);
  EXPECT_TRUE(f.degenerate[2]);
  EXPECT_TRUE(f.degenerate[3]);
  EXPECT_TRUE(std::isfinite(f.log_abs[0]));
  EXPECT_FALSE(std::isfinite(f.log_abs[1]));
}

TEST(HuFeatures, SquaredTermsNonNegative) {
  for (int i = 0; i < 50; ++i) {
    GrayImage img = random_real_image(8, 8, 1000 + i);
    HuFeature f = hu_features(img);
    EXPECT_GE(f.phi[1], 0.0);
    EXPECT_GE(f.phi[3], 0.0);
  }
}

TEST(HuFeatures, TranslationInvariant) {
  GrayImage img = random_real_image(8, 8, 404);
  GrayImage canvas = make_image(32, 32, Depth::real, 0.0);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) canvas.at(r + 17, c + 4) = img.at(r, c);
  HuFeature a = hu_features(img);
  HuFeature b = hu_features(canvas);
  for (int i = 0; i < 4; ++i) {
    ASSERT_EQ(a.degenerate[i], b.degenerate[i]);
    if (!a.degenerate[i]) EXPECT_NEAR(a.log_abs[i], b.log_abs[i], 1e-7);
  }
}

// Random 8x8 block whose content survives every tested rescale: a smoothed
// 4x4 value field, pixel-doubled. A 50% resize averages each constant 2x2
// cell back to the 4x4 field, so no shape information is destroyed at the
// smallest scale, and the doubled field is smooth enough for the upscales.
GrayImage scale_stable_block(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&rng] {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return 5.0 + u * 245.0;
  };
  double v[4][4];
  for (auto& row : v)
    for (double& x : row) x = draw();
  GrayImage img = make_image(8, 8, Depth::real, 0.0);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      int n = 0;
      for (int rr = std::max(r - 1, 0); rr <= std::min(r + 1, 3); ++rr)
        for (int cc = std::max(c - 1, 0); cc <= std::min(c + 1, 3); ++cc) {
          acc += v[rr][cc];
          ++n;
        }
      const double s = 0.5 * v[r][c] + 0.5 * (acc / n);
      img.at(2 * r, 2 * c) = s;
      img.at(2 * r, 2 * c + 1) = s;
      img.at(2 * r + 1, 2 * c) = s;
      img.at(2 * r + 1, 2 * c + 1) = s;
    }
  }
  return img;
}

TEST(HuFeatures, StableUnderBilinearRescale) {
  // Random scale-representable blocks keep their log-moment signature across
  // the full factor sweep within the matching tolerance.
  int ok = 0;
  const int trials = 100;
  for (int i = 0; i < trials; ++i) {
    GrayImage img = scale_stable_block(9000 + i);
    HuFeature base = hu_features(img);
    bool all = true;
    for (int f : {50, 170, 250, 300, 500})
      all = all && hu_match(base, hu_features(resize_bilinear(img, f)), 0.1);
    if (all) ++ok;
  }
  EXPECT_GE(ok, 95);
}

TEST(HuMatch, Reflexive) {
  GrayImage img = random_real_image(6, 6, 777);
  HuFeature f = hu_features(img);
  EXPECT_TRUE(hu_match(f, f, 1e-12));
}

TEST(HuMatch, PublishedScaleSweepWithinTolerance) {
  // Log-moment vectors of one 8x8 block rescaled to 50..500%; every scaled
  // column matches the unscaled one at the default 0.1 tolerance.
  HuFeature base = feature_from_logs({0.5334, 2.8864, 4.6126, 4.1340});
  const double table[5][4] = {
      {0.5504, 2.8863, 4.5402, 4.1208},  // 50%
      {0.5120, 2.8589, 4.5636, 4.1322},  // 170%
      {0.5237, 2.8574, 4.5731, 4.1326},  // 250%
      {0.5231, 2.8589, 4.5636, 4.1322},  // 300%
      {0.5223, 2.8559, 4.5584, 4.1319},  // 500%
  };
  for (const auto& row : table) {
    HuFeature f = feature_from_logs({row[0], row[1], row[2], row[3]});
    EXPECT_TRUE(hu_match(base, f, 0.1));
  }
  // Largest spread in that sweep: 4.6126 vs 4.5402 = 0.0724, inside 0.1.
  HuFeature fifty = feature_from_logs({0.5504, 2.8863, 4.5402, 4.1208});
  EXPECT_FALSE(hu_match(base, fifty, 0.07));
  EXPECT_TRUE(hu_match(base, fifty, 0.073));
}

TEST(HuMatch, RejectsLargeGapAndFlagMismatch) {
  HuFeature a = feature_from_logs({1.0, 2.0, 3.0, 4.0});
  HuFeature b = feature_from_logs({1.0, 3.0, 3.0, 4.0});
  EXPECT_FALSE(hu_match(a, b, 0.1));
  HuFeature c = a;
  c.degenerate[2] = true;
  c.log_abs[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(hu_match(a, c, 10.0));
  EXPECT_THROW(hu_match(a, b, 0.0), precondition_error);
}
