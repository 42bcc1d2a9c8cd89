#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "capvton/config.hpp"
#include "capvton/eval/dataset.hpp"
#include "capvton/eval/run.hpp"
#include "capvton/eval/worker_pool.hpp"
#include "capvton/generate_skin.hpp"
#include "capvton/io.hpp"
#include "capvton/masking.hpp"
#include "capvton/metrics/features.hpp"
#include "capvton/metrics/fid.hpp"
#include "capvton/metrics/lpips.hpp"
#include "capvton/metrics/nor.hpp"
#include "capvton/metrics/ssim.hpp"
#include "capvton/skin_tone.hpp"
#include "capvton/tryon.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace capvton;

namespace {

// Inputs shared by the single-person commands.
struct PersonArgs {
  std::string person;
  std::string parse;
  std::string pose;
  std::string config;

  void add_to(CLI::App* app, bool require_person = true) {
    auto* o = app->add_option("--person", person, "person image (PNG or JPEG)");
    if (require_person) o->required()->check(CLI::ExistingFile);
    app->add_option("--parse", parse, "precomputed parse PNG")->check(CLI::ExistingFile);
    app->add_option("--pose", pose, "precomputed keypoint JSON")->check(CLI::ExistingFile);
    app->add_option("--config", config, "pipeline config JSON")->check(CLI::ExistingFile);
  }
};

PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

// --parse/--pose, else the dataset layout around image/<stem>.png.
void register_sidecars(SidecarRegistry& reg, const RasterImage& img, const fs::path& person,
                       const std::string& parse, const std::string& pose) {
  std::optional<fs::path> parse_path, pose_path;
  if (!parse.empty()) parse_path = parse;
  if (!pose.empty()) pose_path = pose;
  if (person.parent_path().filename() == "image") {
    const fs::path root = person.parent_path().parent_path();
    const std::string stem = person.stem().string();
    if (fs::path p = root / "image-parse-v3" / (stem + ".png"); !parse_path && fs::exists(p)) parse_path = p;
    if (fs::path p = root / "openpose_json" / (stem + "_keypoints.json"); !pose_path && fs::exists(p)) pose_path = p;
  }
  if (parse_path) reg.add_parse(img, *parse_path);
  if (pose_path) reg.add_pose(img, *pose_path);
}

BackendSet backends_for(const PipelineConfig& cfg, const RasterImage& img, const PersonArgs& a) {
  auto reg = std::make_shared<SidecarRegistry>();
  register_sidecars(*reg, img, a.person, a.parse, a.pose);
  return make_backends(cfg, reg);
}

void print_warnings(const Warnings& ws) {
  for (const auto& w : ws) std::cerr << "warning: " << to_string(w.code) << ": " << w.message << "\n";
}

void write_json(const fs::path& path, const json& j) { io::write_text_atomic(path, j.dump(2) + "\n"); }

std::vector<fs::path> images_in(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kMissingFile, dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error(ErrorCode::kEmptyDataset, "no images in " + dir.string());
  return out;
}

// Pairs <real>/<name> with <gen>/<name>.
std::vector<std::pair<fs::path, fs::path>> paired_files(const fs::path& real, const fs::path& gen) {
  std::vector<std::pair<fs::path, fs::path>> out;
  for (const auto& r : images_in(real)) {
    const fs::path g = gen / r.filename();
    if (!fs::exists(g)) throw Error(ErrorCode::kMissingFile, "no generated counterpart " + g.string());
    out.emplace_back(r, g);
  }
  return out;
}

std::vector<std::vector<double>> features_of(const fs::path& dir, const metrics::VectorExtractor& ex) {
  std::vector<std::vector<double>> rows;
  for (const auto& p : images_in(dir)) rows.push_back(ex.extract(io::read_image(p)));
  return rows;
}

SleeveClass parse_target(const std::string& s) {
  const SleeveClass c = parse_sleeve(s);
  if (c == SleeveClass::kLongSleeve) {
    throw Error(ErrorCode::kInvalidArgument, "target must be short or sleeveless");
  }
  return c;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string s;
  while (std::getline(ss, s, '\t')) f.push_back(s);
  return f;
}

void run_tryon_to(const fs::path& out, const RasterImage& person, const RasterImage& garment,
                  const EnsembleConfig& ens, const PipelineConfig& cfg, const BackendSet& set,
                  bool direct, json* summary) {
  fs::create_directories(out);
  TryOnResult r;
  if (direct) {
    r = tryon_direct(person, garment, ens, set);
  } else {
    r = tryon(person, garment, ens, cfg.skin, set);
    io::write_png(out / "preinpainted.png", r.stage1->preinpainted);
    io::write_mask(out / "inpaint_mask.png", r.stage1->inpaint_mask);
  }
  io::write_png(out / "output.png", r.output);
  io::write_mask(out / "agnostic_mask.png", r.agnostic_mask);
  io::write_png(out / "agnostic_overlay.png", overlay_mask(direct ? person : r.stage1->preinpainted, r.agnostic_mask));
  io::write_pose(out / "pose.json", r.pose);
  write_json(out / "manifest.json", r.manifest);
  print_warnings(r.warnings);
  if (summary) *summary = r.manifest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capvton: two-stage virtual try-on preprocessing and evaluation"};
  app.require_subcommand(1);

  // ---- mask
  PersonArgs mask_args;
  std::string mask_out, mask_category, mask_source = "dresscode", skin_target;
  int mask_margin = -1;
  auto* mask = app.add_subcommand("mask", "build the try-on agnostic mask or the skin inpainting mask");
  mask_args.add_to(mask);
  mask->add_option("--category", mask_category, "agnostic mask for upper|lower|dress");
  mask->add_option("--mask-source", mask_source, "dresscode or vitonhd")->capture_default_str();
  mask->add_option("--limb-margin", mask_margin, "dilation radius in pixels (default from height)");
  mask->add_option("--skin-target", skin_target, "skin inpainting mask for short|sleeveless");
  mask->add_option("--out", mask_out, "output directory")->required();
  mask->callback([&] {
    if (mask_category.empty() == skin_target.empty()) {
      throw CLI::ValidationError("give exactly one of --category and --skin-target");
    }
    const PipelineConfig cfg = config_or_default(mask_args.config);
    const RasterImage img = io::read_image(mask_args.person);
    BackendSet set = backends_for(cfg, img, mask_args);
    const ParseMap parse = run_parser(*set.parser, img);
    const PoseSkeleton pose = run_pose(*set.pose, img);
    WithWarnings<BinaryMask> m;
    if (!skin_target.empty()) {
      SkinMaskOptions opt;
      opt.limb_margin = std::max(0, mask_margin);
      m = build_skin_inpaint_mask(parse, pose, parse_target(skin_target), opt);
    } else {
      EnsembleConfig ens;
      ens.mask_source = mask_source;
      ens.category = parse_category(mask_category);
      if (mask_margin >= 0) ens.limb_margin = mask_margin;
      m = build_agnostic_mask(parse, pose, resolve_mask_spec(ens, img.height()));
    }
    fs::create_directories(mask_out);
    io::write_mask(fs::path(mask_out) / "mask.png", m.value);
    io::write_png(fs::path(mask_out) / "overlay.png", overlay_mask(img, m.value));
    print_warnings(m.warnings);
    std::cout << json{{"pixels", m.value.count()}, {"warnings", to_json(m.warnings)}}.dump(2) << "\n";
  });

  // ---- tone
  PersonArgs tone_args;
  std::string tone_region = "face", tone_mask_out;
  std::size_t tone_min = kDefaultMinSkinSamples;
  auto* tone = app.add_subcommand("tone", "estimate the person's skin tone");
  tone_args.add_to(tone);
  tone->add_option("--region", tone_region, "face (parse face label) or all (whole image)")
      ->check(CLI::IsMember({"face", "all"}))
      ->capture_default_str();
  tone->add_option("--min-samples", tone_min, "pixels needed for a reliable estimate")->capture_default_str();
  tone->add_option("--skin-mask", tone_mask_out, "write the detected-skin mask PNG here");
  tone->callback([&] {
    const PipelineConfig cfg = config_or_default(tone_args.config);
    const RasterImage img = io::read_image(tone_args.person);
    std::optional<BinaryMask> restrict_to;
    if (tone_region == "face") {
      BackendSet set = backends_for(cfg, img, tone_args);
      restrict_to = run_parser(*set.parser, img).mask_of({labels::kFace});
    }
    const BinaryMask skin = detect_skin(img, restrict_to, cfg.skin.skin_box);
    const auto est = estimate_tone(img, skin, tone_min);
    if (!tone_mask_out.empty()) io::write_mask(tone_mask_out, skin);
    print_warnings(est.warnings);
    std::cout << json{{"h", est.value.mean_h},
                      {"s", est.value.mean_s},
                      {"v", est.value.mean_v},
                      {"samples", est.value.sample_count},
                      {"reliable", est.value.reliable},
                      {"warnings", to_json(est.warnings)}}
                     .dump(2)
              << "\n";
  });

  // ---- generate-skin
  PersonArgs gs_args;
  std::string gs_target = "short", gs_out;
  std::optional<std::uint64_t> gs_seed;
  std::optional<int> gs_steps;
  auto* gs = app.add_subcommand("generate-skin", "stage 1: remove the sleeves and restore skin");
  gs_args.add_to(gs);
  gs->add_option("--target", gs_target, "short or sleeveless")->capture_default_str();
  gs->add_option("--seed", gs_seed, "inpainting seed");
  gs->add_option("--steps", gs_steps, "diffusion steps");
  gs->add_option("--out", gs_out, "output directory")->required();
  gs->callback([&] {
    PipelineConfig cfg = config_or_default(gs_args.config);
    cfg.skin.target_sleeve = parse_target(gs_target);
    if (gs_seed) cfg.skin.seed = *gs_seed;
    if (gs_steps) cfg.skin.steps = *gs_steps;
    const RasterImage img = io::read_image(gs_args.person);
    BackendSet set = backends_for(cfg, img, gs_args);
    const GenerateSkinResult r = generate_skin(img, cfg.skin, set);
    const fs::path out = gs_out;
    fs::create_directories(out);
    io::write_png(out / "preinpainted.png", r.preinpainted);
    io::write_mask(out / "mask.png", r.inpaint_mask);
    io::write_png(out / "mask_overlay.png", overlay_mask(img, r.inpaint_mask));
    io::write_pose(out / "pose.json", r.pose);
    write_json(out / "manifest.json",
               {{"person", gs_args.person},
                {"config", to_json(cfg.skin)},
                {"backends",
                 {{"parser", set.parser->name()}, {"pose", set.pose->name()}, {"inpainter", set.inpainter->name()}}},
                {"mask_pixels", r.inpaint_mask.count()},
                {"tone_source", to_string(r.tone_source)},
                {"tone",
                 {{"h", r.tone.mean_h}, {"s", r.tone.mean_s}, {"v", r.tone.mean_v},
                  {"samples", r.tone.sample_count}, {"reliable", r.tone.reliable}}},
                {"warnings", to_json(r.warnings)}});
    print_warnings(r.warnings);
  });

  // ---- tryon
  PersonArgs to_args;
  std::string to_garment, to_category = "upper", to_out, to_mask_source, to_synth;
  bool to_direct = false;
  auto* to = app.add_subcommand("tryon", "full two-stage try-on for one person and garment");
  to_args.add_to(to);
  to->add_option("--garment", to_garment, "garment image")->required()->check(CLI::ExistingFile);
  to->add_option("--category", to_category, "upper|lower|dress")->capture_default_str();
  to->add_option("--mask-source", to_mask_source, "override ensemble.mask_source");
  to->add_option("--synth", to_synth, "override ensemble.synth_source");
  to->add_flag("--direct", to_direct, "skip stage 1 (single-stage baseline)");
  to->add_option("--out", to_out, "output directory")->required();
  to->callback([&] {
    const PipelineConfig cfg = config_or_default(to_args.config);
    EnsembleConfig ens = cfg.ensemble;
    ens.category = parse_category(to_category);
    if (!to_mask_source.empty()) ens.mask_source = to_mask_source;
    if (!to_synth.empty()) ens.synth_source = to_synth;
    const RasterImage person = io::read_image(to_args.person);
    const RasterImage garment = io::read_image(to_garment);
    BackendSet set = backends_for(cfg, person, to_args);
    run_tryon_to(to_out, person, garment, ens, cfg, set, to_direct, nullptr);
  });

  // ---- tryon-batch
  std::string tb_pairs, tb_config, tb_out;
  int tb_workers = 1;
  bool tb_direct = false;
  auto* tb = app.add_subcommand("tryon-batch", "try-on for every line of a pairs list");
  tb->add_option("--pairs", tb_pairs, "lines of person<TAB>garment<TAB>category")->required()->check(CLI::ExistingFile);
  tb->add_option("--config", tb_config, "pipeline config JSON")->check(CLI::ExistingFile);
  tb->add_option("--out", tb_out, "output directory")->required();
  tb->add_option("--workers", tb_workers, "parallel workers")->capture_default_str();
  tb->add_flag("--direct", tb_direct, "skip stage 1");
  tb->callback([&] {
    const PipelineConfig cfg = config_or_default(tb_config);
    struct Pair {
      fs::path person, garment;
      GarmentCategory category;
    };
    std::vector<Pair> pairs;
    std::stringstream in(io::read_text(tb_pairs));
    const fs::path base = fs::path(tb_pairs).parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto f = split_tabs(line);
      if (f.size() != 3) {
        throw Error(ErrorCode::kFormatError, tb_pairs + ":" + std::to_string(n) + ": expected 3 tab-separated fields");
      }
      pairs.push_back({resolve(f[0]), resolve(f[1]), parse_category(f[2])});
    }
    if (pairs.empty()) throw Error(ErrorCode::kEmptyDataset, "no pairs in " + tb_pairs);

    auto reg = std::make_shared<SidecarRegistry>();
    for (const auto& p : pairs) register_sidecars(*reg, io::read_image(p.person), p.person, "", "");
    const int workers = std::max(1, std::min<int>(tb_workers, static_cast<int>(pairs.size())));
    std::vector<BackendSet> sets;
    for (int w = 0; w < workers; ++w) sets.push_back(make_backends(cfg, reg));
    std::vector<json> results(pairs.size());
    eval::parallel_for(pairs.size(), workers, [&](int w, std::size_t i) {
      char id[16];
      std::snprintf(id, sizeof id, "%04zu", i);
      const std::string name = std::string(id) + "_" + pairs[i].person.stem().string();
      results[i] = {{"id", name}, {"person", pairs[i].person.string()}, {"garment", pairs[i].garment.string()}};
      try {
        EnsembleConfig ens = cfg.ensemble;
        ens.category = pairs[i].category;
        json manifest;
        run_tryon_to(fs::path(tb_out) / name, io::read_image(pairs[i].person), io::read_image(pairs[i].garment),
                     ens, cfg, sets[w], tb_direct, &manifest);
        results[i]["status"] = "ok";
        results[i]["warnings"] = manifest["warnings"];
      } catch (const Error& e) {
        results[i]["status"] = "failed";
        results[i]["error"] = e.what();
        std::cerr << "item " << name << " failed: " << e.what() << "\n";
      }
    });
    std::size_t ok = 0;
    for (const auto& r : results) ok += r["status"] == "ok";
    write_json(fs::path(tb_out) / "summary.json", {{"ok", ok}, {"failed", pairs.size() - ok}, {"items", results}});
    std::cout << ok << "/" << pairs.size() << " items succeeded\n";
    if (ok == 0) throw Error(ErrorCode::kBackendUnavailable, "every item failed");
  });

  // ---- metrics
  auto* met = app.add_subcommand("metrics", "score images or feature dumps");
  met->require_subcommand(1);
  std::string m_real, m_gen, m_freal, m_fgen, m_x, m_y;
  int m_grid = 4, m_levels = 3;
  auto* m_fid = met->add_subcommand("fid", "Frechet distance between two feature sets");
  m_fid->add_option("--features-real", m_freal, "CAPF dump of real features")->check(CLI::ExistingFile);
  m_fid->add_option("--features-gen", m_fgen, "CAPF dump of generated features")->check(CLI::ExistingFile);
  m_fid->add_option("--real-dir", m_real, "real image directory (grid-colour features)");
  m_fid->add_option("--gen-dir", m_gen, "generated image directory");
  m_fid->add_option("--grid", m_grid, "grid for image features")->capture_default_str();
  m_fid->callback([&] {
    std::vector<std::vector<double>> real, gen;
    if (!m_freal.empty() && !m_fgen.empty()) {
      real = metrics::read_feature_dump(m_freal).rows;
      gen = metrics::read_feature_dump(m_fgen).rows;
    } else if (!m_real.empty() && !m_gen.empty()) {
      const metrics::GridColorExtractor ex(m_grid);
      real = features_of(m_real, ex);
      gen = features_of(m_gen, ex);
    } else {
      throw CLI::ValidationError("give --features-real/--features-gen or --real-dir/--gen-dir");
    }
    const double d = metrics::fid(metrics::accumulate_stats(real), metrics::accumulate_stats(gen));
    std::cout << json{{"fid", d}, {"real", real.size()}, {"gen", gen.size()}}.dump(2) << "\n";
  });

  auto pairwise = [&](CLI::App* cmd, const char* key) {
    cmd->add_option("--x", m_x, "first image")->check(CLI::ExistingFile);
    cmd->add_option("--y", m_y, "second image")->check(CLI::ExistingFile);
    cmd->add_option("--real-dir", m_real, "reference images");
    cmd->add_option("--gen-dir", m_gen, "generated images with the same file names");
    cmd->callback([&, key, cmd] {
      std::vector<std::pair<fs::path, fs::path>> pairs;
      if (!m_x.empty() && !m_y.empty()) {
        pairs.emplace_back(m_x, m_y);
      } else if (!m_real.empty() && !m_gen.empty()) {
        pairs = paired_files(m_real, m_gen);
      } else {
        throw CLI::ValidationError("give --x/--y or --real-dir/--gen-dir");
      }
      const metrics::PyramidLayerExtractor ex(m_levels);
      double sum = 0.0;
      json per = json::object();
      for (const auto& [a, b] : pairs) {
        const RasterImage x = io::read_image(a), y = io::read_image(b);
        const double v = std::string(key) == "ssim" ? metrics::ssim(x, y) : metrics::lpips(x, y, ex);
        per[b.filename().string()] = v;
        sum += v;
      }
      (void)cmd;
      std::cout << json{{key, sum / pairs.size()}, {"pairs", pairs.size()}, {"per_image", per}}.dump(2) << "\n";
    });
  };
  pairwise(met->add_subcommand("ssim", "mean SSIM over image pairs"), "ssim");
  auto* m_lpips = met->add_subcommand("lpips", "mean LPIPS (pyramid features) over image pairs");
  m_lpips->add_option("--levels", m_levels, "pyramid levels")->capture_default_str();
  pairwise(m_lpips, "lpips");

  std::string nor_cases, nor_config, nor_method = "method";
  double nor_threshold = -1.0;
  auto* m_nor = met->add_subcommand("nor", "normal output rate over a case list");
  m_nor->add_option("--cases", nor_cases,
                    "lines of output<TAB>pose<TAB>parse|-<TAB>reference<TAB>normal|abnormal|-")
      ->required()
      ->check(CLI::ExistingFile);
  m_nor->add_option("--config", nor_config, "pipeline config (parser for '-' parses, NOR params)")
      ->check(CLI::ExistingFile);
  m_nor->add_option("--threshold", nor_threshold, "skin ratio threshold (config default 0.35)");
  m_nor->add_option("--method", nor_method, "name printed in the report")->capture_default_str();
  m_nor->callback([&] {
    PipelineConfig cfg = config_or_default(nor_config);
    if (nor_threshold >= 0.0) cfg.metrics.nor.threshold = nor_threshold;
    BackendSet set = make_backends(cfg, std::make_shared<SidecarRegistry>());
    std::vector<metrics::NorCase> cases;
    std::stringstream in(io::read_text(nor_cases));
    const fs::path base = fs::path(nor_cases).parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto f = split_tabs(line);
      if (f.size() != 5) {
        throw Error(ErrorCode::kFormatError, nor_cases + ":" + std::to_string(n) + ": expected 5 tab-separated fields");
      }
      metrics::NorCase c;
      c.reference = parse_target(f[3]);
      if (f[4] == "normal" || f[4] == "abnormal") c.human_normal = f[4] == "normal";
      else if (f[4] != "-") throw Error(ErrorCode::kFormatError, nor_cases + ":" + std::to_string(n) + ": bad label");
      if (!c.human_normal) {
        c.output = io::read_image(resolve(f[0]));
        c.pose = io::read_pose(resolve(f[1]));
        c.parse = f[2] == "-" ? run_parser(*set.parser, c.output) : io::read_parse(resolve(f[2]));
      }
      cases.push_back(std::move(c));
    }
    const auto rep = metrics::normal_output_rate(cases, cfg.metrics.nor);
    print_warnings(rep.warnings);
    json j = eval::nor_to_json(rep);
    j["method"] = nor_method;
    std::cout << j.dump(2) << "\n"
              << nor_method << ": " << rep.normal << "/" << rep.evaluated << " normal, rate "
              << (rep.rate ? eval::format_percent(*rep.rate) : "-") << "\n";
  });

  // ---- features
  std::string f_images, f_out;
  int f_grid = 4;
  auto* feat = app.add_subcommand("features", "write a CAPF feature dump for an image directory");
  feat->add_option("--images", f_images, "image directory")->required();
  feat->add_option("--out", f_out, "dump file")->required();
  feat->add_option("--grid", f_grid, "grid-colour extractor grid")->capture_default_str();
  feat->callback([&] {
    const metrics::GridColorExtractor ex(f_grid);
    metrics::write_feature_dump(f_out, {ex.dim(), features_of(f_images, ex)});
  });

  // ---- evaluate
  std::string ev_data, ev_config, ev_out, ev_metrics = "fid,ssim,lpips,nor", ev_pairing = "paired", ev_labels;
  int ev_workers = 1;
  std::uint64_t ev_seed = 0;
  std::vector<std::string> ev_external;
  bool ev_no_grid = false;
  auto* ev = app.add_subcommand("evaluate", "run the pipeline over a dataset and write a report");
  ev->add_option("--data", ev_data, "dataset root (image/, cloth/, image-parse-v3/, openpose_json/)")
      ->required()
      ->check(CLI::ExistingDirectory);
  ev->add_option("--config", ev_config, "pipeline config JSON")->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "run directory")->required();
  ev->add_option("--metrics", ev_metrics, "comma-separated subset of fid,ssim,lpips,nor (may be empty)")
      ->capture_default_str();
  ev->add_option("--pairing", ev_pairing, "paired, unpaired or both")
      ->check(CLI::IsMember({"paired", "unpaired", "both"}))
      ->capture_default_str();
  ev->add_option("--seed", ev_seed, "unpaired derangement seed")->capture_default_str();
  ev->add_option("--workers", ev_workers, "parallel workers")->capture_default_str();
  ev->add_option("--external", ev_external, "extra method as name=dir of <item id>.png outputs");
  ev->add_option("--labels", ev_labels, "human NOR labels: method<TAB>item<TAB>normal|abnormal")
      ->check(CLI::ExistingFile);
  ev->add_flag("--no-grid", ev_no_grid, "skip the comparison grid images");
  ev->callback([&] {
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineConfig cfg = config_or_default(ev_config);
    std::vector<eval::DatasetIndex> splits;
    if (ev_pairing != "unpaired") splits.push_back(eval::build_index(ev_data, eval::Pairing::kPaired, ev_seed));
    if (ev_pairing != "paired") splits.push_back(eval::build_index(ev_data, eval::Pairing::kUnpaired, ev_seed));
    eval::EvalOptions opt;
    opt.run_dir = ev_out;
    opt.metrics = eval::MetricSet::parse(ev_metrics);
    opt.workers = ev_workers;
    opt.write_grid = !ev_no_grid;
    if (!ev_labels.empty()) opt.human_labels = eval::read_human_labels(ev_labels);
    for (const auto& e : ev_external) {
      const auto eq = e.find('=');
      if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--external expects name=dir");
      opt.external.push_back({e.substr(0, eq), e.substr(eq + 1)});
    }
    const auto result = eval::run_eval(splits, cfg, opt);
    std::cout << eval::render_report(result.report);
    std::cerr << "evaluated in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
  });

  // ---- rescore
  std::string rs_run;
  bool rs_check = false;
  auto* rs = app.add_subcommand("rescore", "recompute a run's report from its persisted outputs");
  rs->add_option("--run", rs_run, "run directory")->required()->check(CLI::ExistingDirectory);
  rs->add_flag("--check", rs_check, "exit 1 unless the result equals report.json");
  rs->callback([&] {
    const json fresh = eval::rescore(rs_run);
    std::cout << eval::render_report(fresh);
    if (rs_check) {
      const json stored = json::parse(io::read_text(fs::path(rs_run) / "report.json"));
      if (stored != fresh) {
        std::cerr << "rescored report differs from report.json\n";
        std::exit(1);
      }
      std::cerr << "report.json reproduced\n";
    }
  });

  // ---- config
  auto* conf = app.add_subcommand("config", "print the default pipeline config");
  conf->callback([] { std::cout << to_json(PipelineConfig{}).dump(2) << "\n"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
