#include <gtest/gtest.h>

#include "capvton/tryon.hpp"
#include "helpers.hpp"

namespace capvton {
namespace {

struct Case {
  const char* stem;
  const char* garment;
  GarmentCategory category;
  SleeveClass target;
};

constexpr Case kCases[] = {{"p0", "p0", GarmentCategory::kUpper, SleeveClass::kShortSleeve},
                           {"p1", "p1", GarmentCategory::kUpper, SleeveClass::kSleeveless},
                           {"p2", "p2", GarmentCategory::kDress, SleeveClass::kSleeveless},
                           {"p3", "p3", GarmentCategory::kLower, SleeveClass::kShortSleeve}};

EnsembleConfig ensemble(GarmentCategory c) {
  EnsembleConfig e = test::stub_config().ensemble;
  e.category = c;
  return e;
}

GenerateSkinConfig skin(SleeveClass t) {
  GenerateSkinConfig s = test::stub_config().skin;
  s.target_sleeve = t;
  return s;
}

RasterImage sleeveless_person() {
  RasterImage img(64, 64, Rgb{250, 250, 250});
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (y >= 1 && y < 6 && x >= 25 && x < 39) img.set(x, y, {45, 30, 20});
      if (y >= 6 && y < 19 && x >= 26 && x < 38) img.set(x, y, {224, 172, 140});
      if (y >= 36 && y < 62 && x >= 22 && x < 42) img.set(x, y, {60, 60, 70});
    }
  }
  return img;
}

BinaryMask diff_mask(const RasterImage& a, const RasterImage& b) {
  BinaryMask m(a.width(), a.height());
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) m.set(x, y, !(a.at(x, y) == b.at(x, y)));
  }
  return m;
}

TEST(TryOn, MatchesGoldenOutputs) {
  const BackendSet set = test::stub_backends();
  for (const Case& c : kCases) {
    const auto r = tryon(test::load_item(c.stem).person, test::load_garment(c.garment), ensemble(c.category),
                         skin(c.target), set);
    const auto golden = io::read_image(test::fixture_dir() / "golden" / (std::string(c.stem) + "_output.png"));
    EXPECT_EQ(r.output, golden) << c.stem;
    EXPECT_EQ(r.output.size(), test::load_item(c.stem).person.size());
  }
}

TEST(TryOn, MaskComesFromStageOneOutput) {
  const BackendSet set = test::stub_backends();
  for (const Case& c : kCases) {
    const auto person = test::load_item(c.stem).person;
    const auto r = tryon(person, test::load_garment(c.garment), ensemble(c.category), skin(c.target), set);
    ASSERT_TRUE(r.stage1.has_value());
    const auto& prov = r.manifest["provenance"];
    EXPECT_EQ(prov["mask_computed_from"], "stage1_preinpainted");
    EXPECT_EQ(prov["person_fingerprint"], hex_fingerprint(fingerprint(person)));
    EXPECT_EQ(prov["mask_source_image_fingerprint"], hex_fingerprint(fingerprint(r.stage1->preinpainted)));
    EXPECT_EQ(prov["agnostic_mask_fingerprint"], hex_fingerprint(fingerprint(r.agnostic_mask)));
    EXPECT_EQ(prov["agnostic_mask_pixels"], r.agnostic_mask.count());
    EXPECT_EQ(prov["output_fingerprint"], hex_fingerprint(fingerprint(r.output)));
    if (!r.stage1->inpaint_mask.none()) {
      EXPECT_NE(prov["mask_source_image_fingerprint"], prov["person_fingerprint"]);
    }
    // Independent recomputation from a fresh parse of the stage-1 image.
    const ParseMap reparse = run_parser(*set.parser, r.stage1->preinpainted);
    EXPECT_EQ(r.mask_parse, reparse);
    const auto expect = build_agnostic_mask(reparse, r.stage1->pose,
                                            resolve_mask_spec(ensemble(c.category), 64));
    EXPECT_EQ(r.agnostic_mask, expect.value) << c.stem;
  }
}

TEST(TryOn, NoOpStageOneEqualsDirect) {
  const RasterImage person = sleeveless_person();
  auto reg = test::fixture_registry();
  reg->add_pose(person, test::dataset_dir() / "openpose_json" / "p0_keypoints.json");
  const BackendSet set = test::stub_backends(reg);
  const auto garment = test::load_garment("p3");
  const auto two = tryon(person, garment, ensemble(GarmentCategory::kLower), skin(SleeveClass::kSleeveless), set);
  const auto one = tryon_direct(person, garment, ensemble(GarmentCategory::kLower), set);
  ASSERT_TRUE(two.stage1->inpaint_mask.none());
  EXPECT_FALSE(one.agnostic_mask.none());
  EXPECT_EQ(two.output, one.output);
  EXPECT_EQ(two.agnostic_mask, one.agnostic_mask);
  EXPECT_EQ(one.manifest["provenance"]["mask_computed_from"], "person");
  EXPECT_FALSE(one.stage1.has_value());
}

TEST(TryOn, DirectDiffersOnlyInsideMaskedArmRegion) {
  const BackendSet set = test::stub_backends();
  const auto person = test::load_item("p0").person;
  const auto garment = test::load_garment("p0");
  const auto two = tryon(person, garment, ensemble(GarmentCategory::kUpper), skin(SleeveClass::kShortSleeve), set);
  const auto one = tryon_direct(person, garment, ensemble(GarmentCategory::kUpper), set);
  const BinaryMask diff = diff_mask(two.output, one.output);
  EXPECT_FALSE(diff.none());
  EXPECT_TRUE(is_subset(diff, mask_union(two.stage1->inpaint_mask, mask_union(two.agnostic_mask, one.agnostic_mask))));
  // The exposed forearm skin shows up in the difference.
  EXPECT_FALSE(mask_intersect(diff, two.stage1->inpaint_mask).none());
}

TEST(TryOn, MissingRegionSurfacesInManifest) {
  const BackendSet set = test::stub_backends();
  const auto person = test::load_item("p3").person;
  const auto r = tryon(person, test::load_garment("p3"), ensemble(GarmentCategory::kLower),
                       skin(SleeveClass::kShortSleeve), set);
  EXPECT_TRUE(r.agnostic_mask.none());
  EXPECT_EQ(r.output, r.stage1->preinpainted);
  bool found = false;
  for (const auto& w : r.manifest["warnings"]) {
    found |= w["code"] == to_string(WarningCode::kMissingRegion);
  }
  EXPECT_TRUE(found) << r.manifest["warnings"].dump();
}

TEST(TryOn, DirectEmptyMaskIsIdentity) {
  const RasterImage person = sleeveless_person();
  auto reg = test::fixture_registry();
  reg->add_pose(person, test::dataset_dir() / "openpose_json" / "p0_keypoints.json");
  const auto r = tryon_direct(person, test::load_garment("p0"), ensemble(GarmentCategory::kUpper),
                              test::stub_backends(reg));
  EXPECT_TRUE(r.agnostic_mask.none());
  EXPECT_EQ(r.output, person);
}

TEST(TryOn, DeterministicAndManifestReruns) {
  const auto person = test::load_item("p1").person;
  const auto garment = test::load_garment("p1");
  EnsembleConfig ens = ensemble(GarmentCategory::kUpper);
  ens.seed = 4;
  ens.limb_margin = 2;
  const auto a = tryon(person, garment, ens, skin(SleeveClass::kSleeveless), test::stub_backends());
  const auto b = tryon(person, garment, ens, skin(SleeveClass::kSleeveless), test::stub_backends());
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.manifest, b.manifest);
  const auto again = tryon(person, garment, ensemble_config_from_json(a.manifest["ensemble"]),
                           generate_skin_config_from_json(a.manifest["generate_skin"]), test::stub_backends());
  EXPECT_EQ(again.manifest["provenance"]["output_fingerprint"], a.manifest["provenance"]["output_fingerprint"]);
  const auto d1 = tryon_direct(person, garment, ens, test::stub_backends());
  EXPECT_EQ(d1.output, tryon_direct(person, garment, ens, test::stub_backends()).output);
}

TEST(TryOn, EnsembleResolution) {
  EnsembleConfig e;
  e.category = GarmentCategory::kLower;
  EXPECT_FALSE(resolve_mask_spec(e, 64).include_arms);
  e.mask_source = "vitonhd";
  EXPECT_TRUE(resolve_mask_spec(e, 64).include_arms);
  e.limb_margin = 5;
  EXPECT_EQ(resolve_mask_spec(e, 64).limb_margin, 5);
  e.mask_source = "other";
  EXPECT_THROW(resolve_mask_spec(e, 64), Error);
  EnsembleConfig s;
  s.synth_source = "unknown";
  EXPECT_THROW(tryon_direct(test::load_item("p0").person, test::load_garment("p0"), s, test::stub_backends()),
               Error);
  BackendSet none = test::stub_backends();
  none.parser.reset();
  try {
    tryon_direct(test::load_item("p0").person, test::load_garment("p0"), EnsembleConfig{}, none);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kBackendUnavailable);
  }
}

}  // namespace
}  // namespace capvton
