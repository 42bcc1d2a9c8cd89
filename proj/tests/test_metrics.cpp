#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <limits>

#include "capvton/metrics/features.hpp"
#include "capvton/metrics/fid.hpp"
#include "capvton/metrics/lpips.hpp"
#include "capvton/metrics/nor.hpp"
#include "capvton/metrics/ssim.hpp"
#include "capvton/masking.hpp"
#include "capvton/skin_tone.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace capvton::metrics {
namespace {

namespace fs = std::filesystem;

GaussianStats stats(Eigen::VectorXd mu, Eigen::MatrixXd cov) { return {std::move(mu), std::move(cov), 10}; }

GaussianStats stats1(double mu, double var) {
  return stats(Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, var));
}

TEST(Fid, OneDimensional) {
  EXPECT_NEAR(fid(stats1(0, 1), stats1(3, 1)), 9.0, 1e-12);
  EXPECT_NEAR(fid(stats1(0, 1), stats1(0, 4)), 1 + 4 - 2 * 2, 1e-12);
}

TEST(Fid, DiagonalTwoDimensional) {
  Eigen::Vector2d m1(0, 0), m2(1, 0);
  Eigen::Matrix2d c1 = Eigen::Vector2d(1, 4).asDiagonal(), c2 = Eigen::Matrix2d::Identity();
  EXPECT_NEAR(fid(stats(m1, c1), stats(m2, c2)), 2.0, 1e-12);
}

TEST(Fid, IdenticalIsZeroAndSymmetric) {
  for (int d = 1; d <= 16; ++d) {
    const auto p = test::commuting_pair(d, 100 + d);
    EXPECT_LE(fid(stats(p.mu1, p.c1), stats(p.mu1, p.c1)), 1e-6);
    EXPECT_NEAR(fid(stats(p.mu1, p.c1), stats(p.mu2, p.c2)), fid(stats(p.mu2, p.c2), stats(p.mu1, p.c1)), 1e-9);
  }
}

TEST(Fid, CommutingCovariancesMatchClosedForm) {
  for (int d = 1; d <= 16; ++d) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto p = test::commuting_pair(d, s * 31 + d);
      EXPECT_NEAR(fid(stats(p.mu1, p.c1), stats(p.mu2, p.c2)), p.d2, 1e-4) << "d=" << d;
    }
  }
}

TEST(Fid, GeneralTwoByTwoTraceFormula) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix2d c1 = test::random_spd2(rng), c2 = test::random_spd2(rng);
    const Eigen::Vector2d mu(0.3 * i, -0.1);
    EXPECT_NEAR(fid(stats(Eigen::Vector2d::Zero(), c1), stats(mu, c2)), test::fid_2x2(mu, c1, c2), 1e-9);
  }
}

TEST(Fid, MonotoneAlongInterpolationTowardReal) {
  for (int d : {2, 5, 9}) {
    std::mt19937_64 rng(d);
    const auto real = test::commuting_pair(d, 7 * d);
    // Generated covariance with unrelated eigenvectors.
    const Eigen::MatrixXd q = test::gram_schmidt_basis(d, rng);
    Eigen::VectorXd e(d);
    for (int i = 0; i < d; ++i) e[i] = 0.2 + 0.5 * i;
    Eigen::MatrixXd cg = q * e.asDiagonal() * q.transpose();
    cg = (cg + cg.transpose()) / 2;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 20; ++k) {
      const double t = k / 20.0;
      Eigen::MatrixXd ct = (1 - t) * cg + t * real.c1;
      ct = (ct + ct.transpose()) / 2;
      const double v = fid(stats(real.mu1, real.c1), stats((1 - t) * real.mu2 + t * real.mu1, ct));
      EXPECT_LE(v, prev + 1e-9) << "d=" << d << " t=" << t;
      prev = v;
    }
    EXPECT_LE(prev, 1e-6);
  }
}

TEST(Fid, Errors) {
  EXPECT_THROW(fid(stats1(0, 1), stats(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity())), Error);
  GaussianStats few{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 1};
  EXPECT_THROW(fid(few, stats1(0, 1)), Error);
  EXPECT_THROW(GaussianStats(Eigen::Vector2d::Zero(), Eigen::Matrix3d::Identity(), 3), Error);
  Eigen::Matrix2d asym;
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(GaussianStats(Eigen::Vector2d::Zero(), asym, 3), Error);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(fid(stats1(0, 1), stats1(nan, 1)), Error);
}

TEST(Stats, HandExample) {
  const std::vector<std::vector<double>> rows{{0, 0}, {2, 2}};
  const auto s = accumulate_stats(rows);
  EXPECT_EQ(s.n, 2u);
  EXPECT_NEAR(s.mean[0], 1, 1e-15);
  EXPECT_NEAR(s.mean[1], 1, 1e-15);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(s.cov(i, j), 2.0, 1e-15);
  }
}

TEST(Stats, CopiesGiveZeroCovariance) {
  const std::vector<std::vector<double>> rows(7, {1.5, -2.0, 3.25});
  EXPECT_LE(accumulate_stats(rows).cov.cwiseAbs().maxCoeff(), 1e-15);
}

std::vector<std::vector<double>> random_rows(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(3.0, 2.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& r : rows) {
    for (double& v : r) v = g(rng);
  }
  return rows;
}

TEST(Stats, MatchesTwoPassFormula) {
  const auto rows = random_rows(100, 8, 1);
  const auto s = accumulate_stats(rows);
  const auto [mean, cov] = test::two_pass(rows);
  EXPECT_LE((s.mean - mean).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((s.cov - cov).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Stats, ShardMergeMatchesSinglePass) {
  const auto rows = random_rows(64, 5, 2);
  StatsAccumulator whole(5), a(5), b(5), c(5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    whole.add(rows[i]);
    (i < 10 ? a : i < 40 ? b : c).add(rows[i]);
  }
  StatsAccumulator left = a;
  left.merge(b);
  left.merge(c);
  StatsAccumulator right = c;
  right.merge(a);
  right.merge(b);
  const auto w = whole.finish(), l = left.finish(), r = right.finish();
  EXPECT_LE((w.cov - l.cov).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((w.cov - r.cov).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((w.mean - r.mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(l.n, 64u);
}

TEST(Stats, InsufficientSamples) {
  const std::vector<std::vector<double>> one{{1.0, 2.0}};
  try {
    accumulate_stats(one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSamples);
  }
  StatsAccumulator acc(2);
  const std::vector<double> bad{1.0};
  EXPECT_THROW(acc.add(bad), Error);
}

TEST(Ssim, WindowNormalized) {
  const auto taps = gaussian_taps(11, 1.5);
  double s = 0;
  for (double t : taps) s += t;
  EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(Ssim, IdenticalIsExactlyOne) {
  const RasterImage x = test::random_image(20, 17, 3);
  EXPECT_EQ(ssim(x, x), 1.0);
}

TEST(Ssim, ConstantOffsetClosedForm) {
  for (int v : {0, 60, 200}) {
    const RasterImage a(16, 16, Rgb{std::uint8_t(v), std::uint8_t(v), std::uint8_t(v)});
    const RasterImage b(16, 16, Rgb{std::uint8_t(v + 10), std::uint8_t(v + 10), std::uint8_t(v + 10)});
    EXPECT_NEAR(ssim(a, b), test::constant_ssim(v, v + 10), 1e-12);
  }
}

TEST(Ssim, MatchesNaiveReference) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const RasterImage x = test::random_image(16, 16, 2 * s), y = test::random_image(16, 16, 2 * s + 1);
    EXPECT_NEAR(ssim(x, y), test::naive_ssim(x, y), 1e-8);
  }
}

TEST(Ssim, SymmetricAndChannelPermutationInvariant) {
  const RasterImage x = test::random_image(18, 14, 7), y = test::random_image(18, 14, 8);
  EXPECT_NEAR(ssim(x, y), ssim(y, x), 1e-14);
  auto rotate = [](const RasterImage& im) {
    RasterImage out(im.width(), im.height());
    for (int yy = 0; yy < im.height(); ++yy) {
      for (int xx = 0; xx < im.width(); ++xx) {
        const Rgb c = im.at(xx, yy);
        out.set(xx, yy, {c.b, c.r, c.g});
      }
    }
    return out;
  };
  EXPECT_NEAR(ssim(rotate(x), rotate(y)), ssim(x, y), 1e-12);
  EXPECT_THROW(ssim(x, RasterImage(18, 13)), Error);
  EXPECT_THROW(ssim(RasterImage(8, 8), RasterImage(8, 8)), Error);
}

TEST(Lpips, HandComputedTwoByTwo) {
  const RasterImage x(2, 2, Rgb{255, 255, 255});
  RasterImage y = x;
  y.set(0, 0, {255, 0, 0});
  EXPECT_NEAR(lpips(x, y, IdentityLayerExtractor()), test::lpips_2x2_hand(), 1e-10);
}

TEST(Lpips, IdentityZeroWeightsAndSymmetry) {
  const RasterImage x = test::random_image(16, 16, 1), y = test::random_image(16, 16, 2);
  const PyramidLayerExtractor pyr(3);
  EXPECT_EQ(lpips(x, x, pyr), 0.0);
  EXPECT_NEAR(lpips(x, y, pyr), lpips(y, x, pyr), 1e-14);
  EXPECT_GT(lpips(x, y, pyr), 0.0);
  EXPECT_EQ(lpips(x, y, IdentityLayerExtractor({0.0, 0.0, 0.0})), 0.0);
  std::vector<std::vector<double>> zero(3, std::vector<double>(5, 0.0));
  EXPECT_EQ(lpips_distance(pyr.extract(x), pyr.extract(y), zero), 0.0);
}

TEST(Lpips, ContractViolations) {
  const RasterImage x = test::random_image(8, 8, 1);
  const PyramidLayerExtractor pyr(2);
  std::vector<std::vector<double>> wrong(2, std::vector<double>(3, 1.0));
  try {
    lpips_distance(pyr.extract(x), pyr.extract(x), wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExtractorContractViolation);
  }
  EXPECT_THROW(PyramidLayerExtractor(5).extract(RasterImage(8, 8)), Error);
  EXPECT_THROW(lpips(x, RasterImage(8, 7), pyr), Error);
}

TEST(Features, GridExtractorShapeAndValues) {
  const GridColorExtractor g(4);
  EXPECT_EQ(g.dim(), 51u);
  const auto v = g.extract(RasterImage(8, 8, Rgb{255, 0, 51}));
  ASSERT_EQ(v.size(), 51u);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  EXPECT_DOUBLE_EQ(v[2], 0.2);
  EXPECT_NEAR(v[48], 0.0, 1e-12);
  EXPECT_EQ(g.extract(test::random_image(9, 9, 1)), g.extract(test::random_image(9, 9, 1)));
  EXPECT_THROW(g.extract(RasterImage(3, 3)), Error);
}

TEST(Features, DumpRoundTripAndFormatErrors) {
  const fs::path dir = fs::temp_directory_path() / "capvton-capf";
  fs::create_directories(dir);
  FeatureDump d{3, {{1.0, 0.5, -2.25}, {0.1, 0.2, 0.3}}};
  write_feature_dump(dir / "a.capf", d);
  const std::string bytes = io::read_text(dir / "a.capf");
  EXPECT_EQ(bytes.substr(0, 4), "CAPF");
  EXPECT_EQ(bytes.size(), 24u + 2 * 3 * 4);
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  const auto back = read_feature_dump(dir / "a.capf");
  EXPECT_EQ(back.dim, 3u);
  EXPECT_EQ(back.rows[0], d.rows[0]);
  EXPECT_NEAR(back.rows[1][1], 0.2, 1e-7);
  io::write_text_atomic(dir / "bad.capf", "XXXX" + bytes.substr(4));
  EXPECT_THROW(read_feature_dump(dir / "bad.capf"), Error);
  io::write_text_atomic(dir / "short.capf", bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(read_feature_dump(dir / "short.capf"), Error);
  FeatureDump ragged{3, {{1.0, 2.0}}};
  EXPECT_THROW(write_feature_dump(dir / "r.capf", ragged), Error);
}

NorCase fixture_case(const char* stem, const RasterImage& output, std::optional<bool> human = {}) {
  const auto item = test::load_item(stem);
  PaletteParser parser(PaletteParser::fixture_palette(), LabelSchema::viton_default());
  return {output, item.pose, parser.parse(output), SleeveClass::kShortSleeve, human};
}

RasterImage golden_output(const char* stem) {
  return io::read_image(test::fixture_dir() / "golden" / (std::string(stem) + "_output.png"));
}

TEST(Nor, ClothedForearmsAreAbnormal) {
  const auto item = test::load_item("p0");
  const NorCase c = fixture_case("p0", item.person);
  const auto r = classify_case(c);
  EXPECT_EQ(r.status, NorStatus::kAbnormal);
  ASSERT_EQ(r.arms.size(), 2u);
  // Manual corridor count: capsule of radius forearm/4 around elbow->wrist
  // over non-background pixels; the sleeves are blue, so no skin inside.
  const BinaryMask skin = detect_skin(item.person);
  for (const auto& arm : r.arms) {
    const ArmJoints j = arm_joints(arm.side);
    const Point2 e = *item.pose.position(j.elbow), w = *item.pose.position(j.wrist);
    const double radius = std::max(1.0, std::hypot(w.x - e.x, w.y - e.y) / 4);
    std::size_t corridor = 0, hits = 0;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (item.parse.at(x, y) == 0 || segment_distance({double(x), double(y)}, e, w) > radius) continue;
        ++corridor;
        hits += skin.at(x, y);
      }
    }
    EXPECT_EQ(arm.corridor_pixels, corridor);
    EXPECT_EQ(arm.skin_pixels, hits);
    EXPECT_LT(arm.ratio, 0.35);
  }
}

TEST(Nor, ExposedArmsAreNormal) {
  const auto r = classify_case(fixture_case("p0", golden_output("p0")));
  EXPECT_EQ(r.status, NorStatus::kNormal);
  EXPECT_EQ(r.source, NorSource::kAutomated);
  for (const auto& a : r.arms) EXPECT_GE(a.ratio, 0.35);
}

TEST(Nor, HumanLabelsOverride) {
  const auto person = test::load_item("p0").person;
  std::vector<NorCase> cases{fixture_case("p0", person, true), fixture_case("p0", golden_output("p0"), false)};
  const auto rep = normal_output_rate(cases);
  EXPECT_EQ(rep.cases[0].status, NorStatus::kNormal);
  EXPECT_EQ(rep.cases[0].source, NorSource::kHuman);
  EXPECT_EQ(rep.cases[1].status, NorStatus::kAbnormal);
  EXPECT_EQ(*rep.rate, 0.5);
  std::vector<NorCase> all_good(5, fixture_case("p0", person, true));
  EXPECT_EQ(*normal_output_rate(all_good).rate, 1.0);
}

TEST(Nor, DegeneratePoseExcludedFromDenominator) {
  NorCase broken = fixture_case("p0", golden_output("p0"));
  broken.pose = PoseSkeleton();
  std::vector<NorCase> cases{broken, fixture_case("p0", golden_output("p0")),
                             fixture_case("p0", test::load_item("p0").person)};
  const auto rep = normal_output_rate(cases);
  EXPECT_EQ(rep.cases[0].status, NorStatus::kExcluded);
  EXPECT_TRUE(std::any_of(rep.cases[0].warnings.begin(), rep.cases[0].warnings.end(),
                          [](const Warning& w) { return w.code == WarningCode::kDegeneratePose; }));
  EXPECT_EQ(rep.evaluated, 2u);
  EXPECT_EQ(rep.excluded, 1u);
  EXPECT_EQ(rep.normal, 1u);
  EXPECT_EQ(*rep.rate, 0.5);
  std::vector<NorCase> none{broken};
  EXPECT_FALSE(normal_output_rate(none).rate.has_value());
}

TEST(Nor, InvariantUnderReordering) {
  const auto person = test::load_item("p0").person;
  std::vector<NorCase> cases{fixture_case("p0", person), fixture_case("p0", golden_output("p0")),
                             fixture_case("p1", golden_output("p1")), fixture_case("p0", person, true)};
  const auto a = normal_output_rate(cases);
  std::reverse(cases.begin(), cases.end());
  const auto b = normal_output_rate(cases);
  EXPECT_EQ(a.rate, b.rate);
  EXPECT_EQ(a.normal, b.normal);
  EXPECT_EQ(a.cases[0].status, b.cases[3].status);
}

TEST(Nor, RejectsLongSleeveReference) {
  NorCase c = fixture_case("p0", golden_output("p0"));
  c.reference = SleeveClass::kLongSleeve;
  EXPECT_THROW(classify_case(c), Error);
  EXPECT_EQ(to_string(NorStatus::kExcluded), "excluded");
  EXPECT_EQ(to_string(NorSource::kHuman), "human");
}

}  // namespace
}  // namespace capvton::metrics
