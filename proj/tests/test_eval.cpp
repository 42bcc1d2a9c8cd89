#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "capvton/eval/dataset.hpp"
#include "capvton/eval/grid.hpp"
#include "capvton/eval/run.hpp"
#include "capvton/eval/worker_pool.hpp"
#include "capvton/metrics/ssim.hpp"
#include "helpers.hpp"

namespace capvton::eval {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("capvton-eval-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Copies the fixture dataset restricted to `stems`.
fs::path copy_dataset(const std::string& name, const std::vector<std::string>& stems) {
  const fs::path src = test::dataset_dir(), dst = scratch(name);
  for (const char* sub : {"image", "cloth", "image-parse-v3", "openpose_json"}) fs::create_directories(dst / sub);
  fs::copy_file(src / "image-parse-v3" / "labels.txt", dst / "image-parse-v3" / "labels.txt");
  for (const auto& s : stems) {
    fs::copy_file(src / "image" / (s + ".png"), dst / "image" / (s + ".png"));
    fs::copy_file(src / "cloth" / (s + ".png"), dst / "cloth" / (s + ".png"));
    fs::copy_file(src / "image-parse-v3" / (s + ".png"), dst / "image-parse-v3" / (s + ".png"));
    fs::copy_file(src / "openpose_json" / (s + "_keypoints.json"), dst / "openpose_json" / (s + "_keypoints.json"));
  }
  fs::copy_file(src / "index.tsv", dst / "index.tsv");
  return dst;
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

EvalOptions options(const fs::path& dir, int workers = 1) {
  EvalOptions o;
  o.run_dir = dir;
  o.workers = workers;
  return o;
}

TEST(Derangement, NoFixedPointsForManySeedsAndSizes) {
  for (std::size_t n = 2; n <= 50; ++n) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto p = derangement(n, seed);
      ASSERT_EQ(p.size(), n);
      std::vector<bool> seen(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        ASSERT_NE(p[i], i);
        ASSERT_LT(p[i], n);
        ASSERT_FALSE(seen[p[i]]);
        seen[p[i]] = true;
      }
    }
  }
  EXPECT_THROW(derangement(1, 0), Error);
}

TEST(Derangement, ReachesEveryDerangementOfThree) {
  std::set<std::vector<std::size_t>> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) seen.insert(derangement(3, seed));
  EXPECT_EQ(seen.size(), 2u);
  EXPECT_EQ(derangement(7, 11), derangement(7, 11));
}

TEST(BoundedDraw, StaysInRange) {
  std::mt19937_64 a(1), b(1);
  for (int i = 0; i < 1000; ++i) {
    const auto v = bounded_draw(a, 7);
    EXPECT_LT(v, 7u);
    EXPECT_EQ(v, bounded_draw(b, 7));
  }
}

TEST(BuildIndex, PairedIsIdentity) {
  const auto root = copy_dataset("three", {"p0", "p1", "p2"});
  const auto idx = build_index(root, Pairing::kPaired, 0);
  ASSERT_EQ(idx.items.size(), 3u);
  for (const auto& it : idx.items) {
    EXPECT_EQ(it.person_stem, it.garment_stem);
    EXPECT_EQ(it.id, it.person_stem);
    EXPECT_TRUE(fs::exists(it.person));
    EXPECT_TRUE(fs::exists(it.garment));
    ASSERT_TRUE(it.parse && it.pose);
  }
  EXPECT_EQ(idx.items[2].category, GarmentCategory::kDress);
  EXPECT_EQ(idx.items[0].person_sleeve, SleeveClass::kLongSleeve);
  EXPECT_EQ(idx.items[1].garment_sleeve, SleeveClass::kSleeveless);
}

TEST(BuildIndex, UnpairedIsDerangementAndFollowsGarment) {
  const auto root = copy_dataset("three-u", {"p0", "p1", "p2"});
  const auto idx = build_index(root, Pairing::kUnpaired, 1);
  ASSERT_EQ(idx.items.size(), 3u);
  std::set<std::string> garments;
  for (const auto& it : idx.items) {
    EXPECT_NE(it.person_stem, it.garment_stem);
    EXPECT_EQ(it.id, it.person_stem + "__" + it.garment_stem);
    garments.insert(it.garment_stem);
    const auto own = build_index(root, Pairing::kPaired, 0);
    for (const auto& g : own.items) {
      if (g.person_stem == it.garment_stem) {
        EXPECT_EQ(it.category, g.category);
        EXPECT_EQ(it.garment_sleeve, g.garment_sleeve);
      }
      if (g.person_stem == it.person_stem) EXPECT_EQ(it.person_sleeve, g.person_sleeve);
    }
  }
  EXPECT_EQ(garments.size(), 3u);
}

TEST(BuildIndex, Errors) {
  auto code = [](const fs::path& root, Pairing p) {
    try {
      build_index(root, p, 0);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  const fs::path empty = scratch("empty");
  EXPECT_EQ(code(empty, Pairing::kPaired), ErrorCode::kEmptyDataset);
  fs::create_directories(empty / "image");
  EXPECT_EQ(code(empty, Pairing::kPaired), ErrorCode::kEmptyDataset);
  EXPECT_EQ(code(empty / "nope", Pairing::kPaired), ErrorCode::kMissingFile);
  const auto one = copy_dataset("one", {"p0"});
  EXPECT_EQ(code(one, Pairing::kUnpaired), ErrorCode::kEmptyDataset);
  fs::remove(one / "cloth" / "p0.png");
  EXPECT_EQ(code(one, Pairing::kPaired), ErrorCode::kMissingFile);
}

TEST(HumanLabelsFile, ParsesRowsAndWildcard) {
  const fs::path p = scratch("labels") / "labels.tsv";
  std::ofstream(p) << "# method\titem\tverdict\ncapvton\tp0\tnormal\n*\tp1\tabnormal\n";
  const auto labels = read_human_labels(p);
  EXPECT_EQ(labels.lookup("capvton", "p0"), true);
  EXPECT_EQ(labels.lookup("other", "p0"), std::nullopt);
  EXPECT_EQ(labels.lookup("other", "p1"), false);
  std::ofstream(p) << "capvton\tp0\tmaybe\n";
  EXPECT_THROW(read_human_labels(p), Error);
}

TEST(Grid, OneItemOneMethodStrip) {
  const RasterImage a(64, 64, Rgb{10, 10, 10});
  std::vector<GridRow> rows{{a, RasterImage(32, 40, Rgb{20, 20, 20}), {RasterImage(64, 64, Rgb{30, 30, 30})}}};
  const RasterImage g = emit_grid(rows, 4);
  EXPECT_EQ(g.width(), 3 * (64 + 4) - 4);
  EXPECT_EQ(g.height(), 64);
  EXPECT_EQ(g.at(0, 0), (Rgb{10, 10, 10}));
  EXPECT_EQ(g.at(65, 10), (Rgb{255, 255, 255}));
  EXPECT_EQ(g.at(68, 63), (Rgb{20, 20, 20}));
  EXPECT_EQ(g.at(199, 0), (Rgb{30, 30, 30}));
}

TEST(Grid, TwoItemsTwoMethods) {
  const RasterImage a(16, 12, Rgb{1, 1, 1});
  std::vector<GridRow> rows(2, GridRow{a, a, {a, a}});
  const RasterImage g = emit_grid(rows, 3, {0, 255, 0});
  EXPECT_EQ(g.width(), 4 * (16 + 3) - 3);
  EXPECT_EQ(g.height(), 2 * (12 + 3) - 3);
  EXPECT_EQ(g.at(5, 13), (Rgb{0, 255, 0}));
  EXPECT_THROW(emit_grid({}), Error);
  rows[1].outputs.pop_back();
  EXPECT_THROW(emit_grid(rows), Error);
}

TEST(WorkerPool, VisitsEveryIndexOnceAndRethrows) {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](int, std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](int, std::size_t i) {
                 if (i == 5) throw Error(ErrorCode::kIoError, "x");
               }),
               Error);
}

TEST(RunEval, PairedStubMatchesGoldenReportAndGrid) {
  const auto dir = scratch("golden");
  const DatasetIndex idx = build_index(test::dataset_dir(), Pairing::kPaired, 0);
  const auto res = run_eval(std::span(&idx, 1), test::stub_config(), options(dir));
  const json golden = json::parse(slurp(test::fixture_dir() / "golden" / "report_paired.json"));
  EXPECT_EQ(res.report["items"], golden["items"]);
  const auto& got = res.report["scores"]["capvton"];
  const auto& want = golden["scores"]["capvton"];
  for (const char* m : {"fid", "ssim", "lpips"}) {
    EXPECT_NEAR(got["paired"][m].get<double>(), want["paired"][m].get<double>(), 1e-12) << m;
  }
  EXPECT_EQ(got["nor"], want["nor"]);
  EXPECT_EQ(io::read_image(dir / "grid_paired.png"), io::read_image(test::fixture_dir() / "golden" / "grid_paired.png"));
  for (const char* stem : {"p0", "p1", "p2", "p3"}) {
    EXPECT_EQ(io::read_image(dir / "items" / "capvton" / "paired" / stem / "output.png"),
              io::read_image(test::fixture_dir() / "golden" / (std::string(stem) + "_output.png")));
  }
}

TEST(RunEval, BitIdenticalAcrossRunsAndWorkerCounts) {
  const DatasetIndex splits[] = {build_index(test::dataset_dir(), Pairing::kPaired, 3),
                                 build_index(test::dataset_dir(), Pairing::kUnpaired, 3)};
  const PipelineConfig cfg = load_config(test::fixture_dir() / "configs" / "sweep.json");
  const auto a = scratch("det-a"), b = scratch("det-b");
  const auto ra = run_eval(splits, cfg, options(a, 1));
  const auto rb = run_eval(splits, cfg, options(b, 3));
  EXPECT_EQ(ra.report["scores"], rb.report["scores"]);
  EXPECT_EQ(slurp(a / "report.txt"), slurp(b / "report.txt"));
  EXPECT_EQ(slurp(a / "grid_paired.png"), slurp(b / "grid_paired.png"));
  EXPECT_EQ(slurp(a / "grid_unpaired.png"), slurp(b / "grid_unpaired.png"));
  ASSERT_EQ(ra.records.size(), rb.records.size());
  for (std::size_t i = 0; i < ra.records.size(); ++i) {
    EXPECT_EQ(ra.records[i].item_id, rb.records[i].item_id);
    EXPECT_EQ(slurp(a / ra.records[i].dir / "output.png"), slurp(b / rb.records[i].dir / "output.png"));
  }
}

TEST(RunEval, EmptyMetricSetReportsMetadataOnly) {
  const auto dir = scratch("nometrics");
  const DatasetIndex idx = build_index(test::dataset_dir(), Pairing::kPaired, 0);
  EvalOptions o = options(dir);
  o.metrics = MetricSet::parse("");
  EXPECT_TRUE(o.metrics.empty());
  const auto res = run_eval(std::span(&idx, 1), test::stub_config(), o);
  EXPECT_FALSE(res.report.contains("scores"));
  EXPECT_TRUE(res.report.contains("run"));
  EXPECT_EQ(res.report["run"]["metrics"], json::array());
  for (const auto& r : res.records) {
    EXPECT_FALSE(r.scores.ssim || r.scores.lpips || r.scores.nor);
  }
  EXPECT_THROW(MetricSet::parse("fid,psnr"), Error);
}

TEST(RunEval, ReportEqualsRecomputationFromPersistedFiles) {
  const auto dir = scratch("rescore");
  const DatasetIndex splits[] = {build_index(test::dataset_dir(), Pairing::kPaired, 5),
                                 build_index(test::dataset_dir(), Pairing::kUnpaired, 5)};
  const auto res = run_eval(splits, test::stub_config(), options(dir, 2));
  EXPECT_EQ(rescore(dir), json::parse(slurp(dir / "report.json")));
  EXPECT_EQ(rescore(dir), res.report);
  for (const auto& r : res.records) {
    if (r.split != "paired") {
      EXPECT_FALSE(r.scores.ssim.has_value());
      continue;
    }
    const double direct = metrics::ssim(io::read_image(dir / r.dir / "output.png"), io::read_image(r.person));
    EXPECT_DOUBLE_EQ(*r.scores.ssim, direct);
    const RunRecord back = run_record_from_json(json::parse(slurp(dir / r.dir / "record.json")));
    EXPECT_EQ(back.item_id, r.item_id);
    EXPECT_EQ(back.scores.ssim, r.scores.ssim);
  }
}

TEST(RunEval, TableOneSweepRows) {
  const auto dir = scratch("table1");
  const DatasetIndex splits[] = {build_index(test::dataset_dir(), Pairing::kPaired, 1),
                                 build_index(test::dataset_dir(), Pairing::kUnpaired, 1)};
  const auto res = run_eval(splits, load_config(test::fixture_dir() / "configs" / "sweep.json"), options(dir));
  const std::string text = render_report(res.report);
  EXPECT_NE(text.find("paired FID"), std::string::npos);
  EXPECT_NE(text.find("unpaired FID"), std::string::npos);
  for (const char* method : {"dresscode-mask+vitonhd", "vitonhd+vitonhd"}) {
    const auto& s = res.report["scores"][method];
    for (const char* m : {"fid", "ssim", "lpips"}) EXPECT_TRUE(s["paired"][m].is_number()) << method << m;
    EXPECT_TRUE(s["unpaired"]["fid"].is_number());
    EXPECT_FALSE(s["unpaired"].contains("ssim"));
    const auto row = text.find("\n" + std::string(method) + " ", text.find("paired FID"));
    ASSERT_NE(row, std::string::npos) << text;
    std::istringstream line(text.substr(row + 1, text.find('\n', row + 1) - row - 1));
    std::string name;
    double fid_p, ssim_p, lpips_p, fid_u;
    line >> name >> fid_p >> ssim_p >> lpips_p >> fid_u;
    EXPECT_FALSE(line.fail()) << text;
    EXPECT_NEAR(ssim_p, s["paired"]["ssim"].get<double>(), 5e-5);
  }
}

TEST(RunEval, FailedItemsRecordedAndRunContinues) {
  const auto root = copy_dataset("partial", {"p0", "p1", "p2"});
  fs::remove(root / "openpose_json" / "p1_keypoints.json");
  const auto dir = scratch("partial-run");
  const DatasetIndex idx = build_index(root, Pairing::kPaired, 0);
  const auto res = run_eval(std::span(&idx, 1), test::stub_config(), options(dir));
  EXPECT_EQ(res.report["items"]["capvton"]["paired"]["ok"], 2);
  EXPECT_EQ(res.report["items"]["capvton"]["paired"]["failed"], 1);
  const auto& bad = res.records[1];
  EXPECT_FALSE(bad.ok);
  EXPECT_EQ(bad.error, ErrorCode::kBackendUnavailable);
  bool warned = false;
  for (const auto& w : res.report["warnings"]) warned |= w["code"] == "ItemFailed" && w["item"] == "p1";
  EXPECT_TRUE(warned) << res.report["warnings"].dump();
  EXPECT_TRUE(fs::exists(dir / "grid_paired.png"));
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos) << e.path();
  }
}

TEST(RunEval, AllFailedThrowsFirstError) {
  PipelineConfig cfg = test::stub_config();
  cfg.synthesizers["vitonhd"].kind = "external-process";
  cfg.synthesizers["vitonhd"].command = "exit 1";
  const DatasetIndex idx = build_index(test::dataset_dir(), Pairing::kPaired, 0);
  try {
    run_eval(std::span(&idx, 1), cfg, options(scratch("allfail")));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
  }
}

TEST(RunEval, ExternalMethodAndHumanLabels) {
  const auto ext = scratch("ext-outputs");
  for (const char* stem : {"p0", "p1", "p2", "p3"}) {
    fs::copy_file(test::dataset_dir() / "image" / (std::string(stem) + ".png"), ext / (std::string(stem) + ".png"));
  }
  const auto dir = scratch("ext-run");
  const DatasetIndex idx = build_index(test::dataset_dir(), Pairing::kPaired, 0);
  EvalOptions o = options(dir);
  o.external.push_back({"identity", ext});
  o.human_labels.set("capvton", "p0", false);
  const auto res = run_eval(std::span(&idx, 1), test::stub_config(), o);
  // Returning the person unchanged is a perfect paired match but keeps long sleeves.
  EXPECT_EQ(res.report["scores"]["identity"]["paired"]["ssim"], 1.0);
  EXPECT_EQ(res.report["scores"]["identity"]["nor"]["normal"], 0);
  EXPECT_EQ(res.report["scores"]["capvton"]["nor"]["human_labeled"], 1);
  EXPECT_EQ(res.report["scores"]["capvton"]["nor"]["normal"], 1);
  EXPECT_EQ(rescore(dir), res.report);
}

TEST(Report, PercentFormatting) {
  EXPECT_EQ(format_percent(37.0 / 40.0), "92.5%");
  EXPECT_EQ(format_percent(27.0 / 35.0), "77.1%");
  EXPECT_EQ(format_percent(1.0), "100.0%");
  metrics::NorReport r;
  r.normal = 37;
  r.evaluated = 40;
  r.rate = 37.0 / 40.0;
  const json j = nor_to_json(r);
  EXPECT_EQ(j["normal"], 37);
  EXPECT_DOUBLE_EQ(j["rate"].get<double>(), 0.925);
}

}  // namespace
}  // namespace capvton::eval
