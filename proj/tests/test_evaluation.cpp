#include "cmfd/evaluation.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cmfd/errors.hpp"
#include "cmfd/image.hpp"

namespace {

using namespace cmfd;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d649bb133111ebull;
  return x ^ (x >> 31);
}

BinaryMask random_mask(int w, int h, std::uint64_t seed, int fill_permille) {
  BinaryMask m = make_mask(w, h);
  for (std::size_t i = 0; i < m.bits.size(); ++i)
    m.bits[i] =
        splitmix64(seed ^ (i * 0x9e3779b97f4a7c15ull)) % 1000 <
                static_cast<std::uint64_t>(fill_permille)
            ? 1
            : 0;
  return m;
}

TEST(Score, PerfectPredictionScoresExactlyHundred) {
  BinaryMask truth = make_mask(64, 64);
  truth.mark_rect(Rect{10, 10, 20, 30});
  const Score s = score(truth, truth);
  EXPECT_EQ(s.P, 100.0);
  EXPECT_EQ(s.correctly_detected, 600);
  EXPECT_EQ(s.actually_forged, 600);
  EXPECT_EQ(s.false_positive_pixels, 0);
}

TEST(Score, EmptyPredictionScoresZero) {
  BinaryMask truth = make_mask(32, 32);
  truth.mark_rect(Rect{0, 0, 8, 8});
  const BinaryMask pred = make_mask(32, 32);
  const Score s = score(pred, truth);
  EXPECT_EQ(s.P, 0.0);
  EXPECT_EQ(s.correctly_detected, 0);
  EXPECT_EQ(s.false_positive_pixels, 0);
}

TEST(Score, PartialOverlapAndFalsePositives) {
  BinaryMask truth = make_mask(16, 16);
  truth.mark_rect(Rect{0, 0, 5, 10});  // 50 pixels
  BinaryMask pred = make_mask(16, 16);
  pred.mark_rect(Rect{0, 0, 5, 5});    // 25 inside truth
  pred.mark_rect(Rect{10, 0, 2, 5});   // 10 outside
  const Score s = score(pred, truth);
  EXPECT_EQ(s.P, 50.0);
  EXPECT_EQ(s.correctly_detected, 25);
  EXPECT_EQ(s.actually_forged, 50);
  EXPECT_EQ(s.false_positive_pixels, 10);
}

TEST(Score, DimensionMismatchThrows) {
  BinaryMask truth = make_mask(16, 16);
  truth.set(0, 0, true);
  const BinaryMask pred = make_mask(16, 17);
  EXPECT_THROW((void)score(pred, truth), precondition_error);
  EXPECT_THROW((void)score_naive(pred, truth), precondition_error);
}

TEST(Score, EmptyTruthIsUndefined) {
  const BinaryMask truth = make_mask(16, 16);
  BinaryMask pred = make_mask(16, 16);
  pred.set(3, 3, true);
  EXPECT_THROW((void)score(pred, truth), metric_error);
  EXPECT_THROW((void)score_naive(pred, truth), metric_error);
}

TEST(Score, PackedPathMatchesNaiveOnRandomMasks) {
  // Odd widths exercise the unpacked tail; a couple of shapes make sure the
  // word walker never crosses rows incorrectly (it treats bits as flat).
  const int shapes[][2] = {{13, 7}, {64, 64}, {33, 3}, {8, 8}, {127, 5}};
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& wh = shapes[trial % 5];
    const BinaryMask truth =
        random_mask(wh[0], wh[1], 900 + trial, 200 + trial % 500);
    const BinaryMask pred =
        random_mask(wh[0], wh[1], 7700 + trial, 350 + trial % 400);
    if (truth.count() == 0) continue;
    const Score fast = score(pred, truth);
    const Score slow = score_naive(pred, truth);
    EXPECT_EQ(fast.correctly_detected, slow.correctly_detected);
    EXPECT_EQ(fast.actually_forged, slow.actually_forged);
    EXPECT_EQ(fast.false_positive_pixels, slow.false_positive_pixels);
    EXPECT_EQ(fast.P, slow.P);
    ++compared;
  }
  EXPECT_GE(compared, 95);
}

TEST(Score, InvariantUnderPixelPermutation) {
  const BinaryMask truth = random_mask(32, 32, 42, 300);
  const BinaryMask pred = random_mask(32, 32, 43, 300);
  ASSERT_GT(truth.count(), 0);

  std::vector<int> perm(32 * 32);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = static_cast<int>(perm.size()) - 1; i > 0; --i) {
    const int j =
        static_cast<int>(splitmix64(777 ^ i) % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  BinaryMask truth_p = make_mask(32, 32);
  BinaryMask pred_p = make_mask(32, 32);
  for (int i = 0; i < 32 * 32; ++i) {
    truth_p.bits[perm[i]] = truth.bits[i];
    pred_p.bits[perm[i]] = pred.bits[i];
  }
  const Score a = score(pred, truth);
  const Score b = score(pred_p, truth_p);
  EXPECT_EQ(a.P, b.P);
  EXPECT_EQ(a.correctly_detected, b.correctly_detected);
  EXPECT_EQ(a.false_positive_pixels, b.false_positive_pixels);
}

TEST(Score, AddingCorrectPixelsNeverLowersP) {
  const BinaryMask truth = random_mask(32, 32, 50, 400);
  ASSERT_GT(truth.count(), 0);
  BinaryMask pred = make_mask(32, 32);
  double last_p = 0.0;
  for (std::size_t i = 0; i < truth.bits.size(); ++i) {
    if (!truth.bits[i]) continue;
    pred.bits[i] = 1;
    const double p = score(pred, truth).P;
    ASSERT_GE(p, last_p);
    last_p = p;
  }
  EXPECT_EQ(last_p, 100.0);
}

TEST(Aggregate, BucketMeansGrandMeanAndWarnings) {
  std::vector<ImageScore> rows(3);
  rows[0] = {"img_0", "exact", 10, Score{600, 600, 0, 100.0}};
  rows[1] = {"img_1", "exact", 10, Score{540, 600, 2, 90.0}};
  rows[2] = {"img_2", "exact", 20, Score{480, 600, 0, 80.0}};
  const Aggregate agg = aggregate(rows, {10, 20, 30, 40});

  ASSERT_TRUE(agg.bucket_mean_p.count(10));
  ASSERT_TRUE(agg.bucket_mean_p.count(20));
  EXPECT_EQ(agg.bucket_mean_p.at(10), 95.0);
  EXPECT_EQ(agg.bucket_mean_p.at(20), 80.0);
  EXPECT_EQ(agg.bucket_counts.at(10), 2);
  EXPECT_EQ(agg.grand_mean_p, 90.0);
  EXPECT_EQ(agg.total, 3);
  ASSERT_EQ(agg.warnings.size(), 2u);
  EXPECT_NE(agg.warnings[0].find("30"), std::string::npos);
  EXPECT_NE(agg.warnings[1].find("40"), std::string::npos);
}

TEST(Aggregate, CsvHasExactHeaderAndRows) {
  std::vector<ImageScore> rows(2);
  rows[0] = {"img_0", "dct", 10, Score{600, 600, 0, 100.0}};
  rows[1] = {"img_1", "dct", 40, Score{300, 600, 7, 50.0}};
  const std::string csv = scores_to_csv(rows);
  EXPECT_EQ(csv,
            "image_id,method,size_bucket_pct,P_pct,fp_pixels\n"
            "img_0,dct,10,100.000000,0\n"
            "img_1,dct,40,50.000000,7\n");
}

TEST(Aggregate, JsonMirrorsCsvContent) {
  std::vector<ImageScore> rows(2);
  rows[0] = {"img_0", "rescale", 10, Score{100, 100, 0, 100.0}};
  rows[1] = {"img_1", "rescale", 20, Score{50, 100, 3, 50.0}};
  const Aggregate agg = aggregate(rows, {10, 20});
  const nlohmann::json j = scores_to_json(rows, agg);

  ASSERT_EQ(j.at("rows").size(), 2u);
  EXPECT_EQ(j.at("rows")[0].at("image_id"), "img_0");
  EXPECT_EQ(j.at("rows")[1].at("fp_pixels"), 3);
  EXPECT_EQ(j.at("rows")[1].at("P_pct"), 50.0);
  EXPECT_EQ(j.at("bucket_mean_p").at("10"), 100.0);
  EXPECT_EQ(j.at("bucket_mean_p").at("20"), 50.0);
  EXPECT_EQ(j.at("grand_mean_p"), 75.0);
  EXPECT_EQ(j.at("total_images"), 2);
  EXPECT_TRUE(j.at("warnings").empty());
}

}  // namespace
