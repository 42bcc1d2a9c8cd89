#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "capvton/skin_tone.hpp"
#include "helpers.hpp"

namespace capvton {
namespace {

constexpr double kRad = std::numbers::pi / 180.0;

// Box test with the BT.601 rows written out independently.
bool skin_oracle(Rgb c) {
  const double y = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
  const double cr = 128 + 0.5 * c.r - 0.418688 * c.g - 0.081312 * c.b;
  const double cb = 128 - 0.168736 * c.r - 0.331264 * c.g + 0.5 * c.b;
  return cr >= 133 && cr <= 173 && cb >= 77 && cb <= 127 && y >= 40;
}

RasterImage two_tone(int w, int h, Rgb left, Rgb right) {
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.set(x, y, x < w / 2 ? left : right);
  }
  return img;
}

TEST(DetectSkin, ConstantImageInsideBox) {
  // Y=180, Cr=150, Cb=100 inverted with the BT.601 matrix, rounded.
  const Rgb c{211, 174, 130};
  const YCrCb ycc = to_ycrcb(c);
  EXPECT_NEAR(ycc.cr, 150.0, 0.5);
  EXPECT_NEAR(ycc.cb, 100.0, 0.5);
  EXPECT_NEAR(ycc.y, 180.0, 0.5);
  EXPECT_EQ(detect_skin(RasterImage(8, 8, c)).count(), 64u);
}

TEST(DetectSkin, PureBlueIsNotSkin) {
  EXPECT_FALSE(skin_oracle({0, 0, 255}));
  EXPECT_TRUE(detect_skin(RasterImage(8, 8, Rgb{0, 0, 255})).none());
}

TEST(DetectSkin, HalfSkinHalfGreenMatchesPerPixelBox) {
  const RasterImage img = two_tone(16, 8, {224, 172, 140}, {30, 200, 40});
  const BinaryMask m = detect_skin(img);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 16; ++x) EXPECT_EQ(m.at(x, y), x < 8);
  }
}

TEST(DetectSkin, RandomPixelsMatchOracleAndRestrictionIsMonotone) {
  const RasterImage img = test::random_image(40, 25, 11);
  const BinaryMask all = detect_skin(img);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) ASSERT_EQ(all.at(x, y), skin_oracle(img.at(x, y)));
  }
  const BinaryMask restrict_to = test::random_mask(40, 25, 0.5, 2);
  const BinaryMask sub = detect_skin(img, restrict_to);
  EXPECT_TRUE(is_subset(sub, mask_intersect(all, restrict_to)));
  EXPECT_EQ(sub, mask_intersect(all, restrict_to));
  EXPECT_THROW(detect_skin(img, BinaryMask(3, 3)), Error);
}

TEST(EstimateTone, ConstantRegionEqualsPixelHsv) {
  const Rgb c{224, 172, 140};
  const auto r = estimate_tone(RasterImage(30, 20, c), BinaryMask(30, 20, true));
  const Hsv h = to_hsv(c);
  EXPECT_NEAR(r.value.mean_h, h.h, 1e-9);
  EXPECT_NEAR(r.value.mean_s, h.s, 1e-12);
  EXPECT_NEAR(r.value.mean_v, h.v, 1e-12);
  EXPECT_EQ(r.value.sample_count, 600u);
  EXPECT_TRUE(r.value.reliable);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(EstimateTone, EmptyMaskUnreliable) {
  const auto r = estimate_tone(RasterImage(4, 4, Rgb{1, 2, 3}), BinaryMask(4, 4));
  EXPECT_EQ(r.value.sample_count, 0u);
  EXPECT_FALSE(r.value.reliable);
  EXPECT_TRUE(r.has(WarningCode::kEmptySkinRegion));
}

TEST(EstimateTone, FewSamplesFlaggedUnreliable) {
  const auto r = estimate_tone(RasterImage(10, 10, Rgb{200, 150, 120}), BinaryMask(10, 10, true), 500);
  EXPECT_EQ(r.value.sample_count, 100u);
  EXPECT_FALSE(r.value.reliable);
  EXPECT_TRUE(r.has(WarningCode::kUnreliableTone));
}

TEST(EstimateTone, TwoToneCircularMean) {
  // Hue 60*(G-B)/(R-B): 30/180 gives 10 degrees, 90/180 gives 30 degrees.
  const RasterImage img = two_tone(20, 10, {200, 50, 20}, {200, 110, 20});
  ASSERT_NEAR(to_hsv({200, 50, 20}).h, 10.0, 1e-9);
  ASSERT_NEAR(to_hsv({200, 110, 20}).h, 30.0, 1e-9);
  const auto r = estimate_tone(img, BinaryMask(20, 10, true), 1);
  const double oracle =
      std::atan2(std::sin(10 * kRad) + std::sin(30 * kRad), std::cos(10 * kRad) + std::cos(30 * kRad)) / kRad;
  EXPECT_NEAR(oracle, 20.0, 1e-12);
  EXPECT_NEAR(r.value.mean_h, 20.0, 1e-9);
}

TEST(EstimateTone, MeanWrapsAcrossZero) {
  // 350 and 10 degrees average to 0, not 180.
  ASSERT_NEAR(to_hsv({200, 20, 50}).h, 350.0, 1e-9);
  const auto r = estimate_tone(two_tone(8, 2, {200, 20, 50}, {200, 50, 20}), BinaryMask(8, 2, true), 1);
  EXPECT_NEAR(hue_delta(r.value.mean_h, 0.0), 0.0, 1e-9);
  EXPECT_GE(r.value.mean_h, 0.0);
  EXPECT_LT(r.value.mean_h, 360.0);
}

TEST(EstimateTone, PermutationInvariant) {
  RasterImage img = test::random_image(12, 12, 5);
  const BinaryMask all(12, 12, true);
  const auto a = estimate_tone(img, all, 1).value;
  std::vector<Rgb> px;
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) px.push_back(img.at(x, y));
  }
  std::shuffle(px.begin(), px.end(), std::mt19937_64(9));
  for (int i = 0; i < 144; ++i) img.set(i % 12, i / 12, px[i]);
  const auto b = estimate_tone(img, all, 1).value;
  EXPECT_NEAR(hue_delta(a.mean_h, b.mean_h), 0.0, 1e-9);
  EXPECT_NEAR(a.mean_s, b.mean_s, 1e-12);
  EXPECT_NEAR(a.mean_v, b.mean_v, 1e-12);
}

TEST(HueDelta, WrapsIntoHalfOpenRange) {
  EXPECT_DOUBLE_EQ(hue_delta(350, 10), 20);
  EXPECT_DOUBLE_EQ(hue_delta(10, 350), -20);
  EXPECT_DOUBLE_EQ(hue_delta(0, 180), 180);
  EXPECT_DOUBLE_EQ(hue_delta(180, 0), 180);
}

SkinToneEstimate tone_of(Rgb c) {
  const Hsv h = to_hsv(c);
  return {h.h, h.s, h.v, 1000, true};
}

TEST(BlendToTone, StrengthZeroIsIdentity) {
  const RasterImage img = test::random_image(10, 10, 1);
  const auto r = blend_to_tone(img, BinaryMask(10, 10, true), tone_of({224, 172, 140}), 0.0);
  EXPECT_EQ(r.value, img);
}

TEST(BlendToTone, FullStrengthConstantRegionBecomesTarget) {
  RasterImage img(10, 10, Rgb{9, 9, 200});
  BinaryMask region(10, 10);
  for (int y = 2; y < 8; ++y) {
    for (int x = 2; x < 8; ++x) {
      region.set(x, y, true);
      img.set(x, y, {180, 140, 120});
    }
  }
  const Rgb target{224, 172, 140};
  const auto r = blend_to_tone(img, region, tone_of(target), 1.0);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) EXPECT_EQ(r.value.at(x, y), region.at(x, y) ? target : img.at(x, y));
  }
}

TEST(BlendToTone, HalfStrengthTwoToneMatchesScalarFormula) {
  const Rgb a{190, 140, 110}, b{150, 100, 80};
  const RasterImage img = two_tone(10, 4, a, b);
  const BinaryMask region(10, 4, true);
  const SkinToneEstimate target = tone_of({224, 172, 140});
  const auto r = blend_to_tone(img, region, target, 0.5);

  const Hsv ha = to_hsv(a), hb = to_hsv(b);
  const double mh = std::atan2(std::sin(ha.h * kRad) + std::sin(hb.h * kRad),
                               std::cos(ha.h * kRad) + std::cos(hb.h * kRad)) / kRad;
  const double ms = (ha.s + hb.s) / 2, mv = (ha.v + hb.v) / 2;
  auto shifted = [&](const Hsv& p) {
    return from_hsv({p.h + 0.5 * (target.mean_h - mh), p.s + 0.5 * (target.mean_s - ms),
                     p.v + 0.5 * (target.mean_v - mv)});
  };
  EXPECT_EQ(r.value.at(0, 0), shifted(ha));
  EXPECT_EQ(r.value.at(9, 3), shifted(hb));
}

TEST(BlendToTone, FullStrengthMeansWithinOneStepAndOutsideUntouched) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> jitter(-12, 12);
  RasterImage img = test::random_image(32, 32, 4);
  BinaryMask region(32, 32);
  for (int y = 4; y < 28; ++y) {
    for (int x = 6; x < 26; ++x) {
      region.set(x, y, true);
      img.set(x, y, {std::uint8_t(170 + jitter(rng)), std::uint8_t(125 + jitter(rng)),
                     std::uint8_t(100 + jitter(rng))});
    }
  }
  const SkinToneEstimate target = tone_of({214, 164, 132});
  const auto r = blend_to_tone(img, region, target, 1.0);
  const auto got = estimate_tone(r.value, region, 1).value;
  EXPECT_NEAR(hue_delta(got.mean_h, target.mean_h), 0.0, 1.0);
  EXPECT_NEAR(got.mean_s, target.mean_s, 1.0 / 255);
  EXPECT_NEAR(got.mean_v, target.mean_v, 1.0 / 255);
  EXPECT_EQ(copy_outside(r.value, img, region), r.value);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      if (!region.at(x, y)) ASSERT_EQ(r.value.at(x, y), img.at(x, y));
    }
  }
}

TEST(BlendToTone, UnreliableTargetLeavesImage) {
  const RasterImage img = test::random_image(6, 6, 8);
  SkinToneEstimate t = tone_of({200, 150, 120});
  t.reliable = false;
  const auto r = blend_to_tone(img, BinaryMask(6, 6, true), t, 1.0);
  EXPECT_EQ(r.value, img);
  EXPECT_TRUE(r.has(WarningCode::kUnreliableTone));
  EXPECT_THROW(blend_to_tone(img, BinaryMask(6, 6, true), tone_of({1, 2, 3}), 1.5), Error);
}

}  // namespace
}  // namespace capvton
