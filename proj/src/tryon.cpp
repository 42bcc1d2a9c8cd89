#include "capvton/tryon.hpp"

#include <cstdio>

namespace capvton {
namespace {

using json = nlohmann::json;

TryOnResult stage_two(const RasterImage& base, const RasterImage& garment, ParseMap parse,
                      PoseSkeleton pose, const EnsembleConfig& cfg, const BackendSet& backends) {
  TryOnResult r;
  auto mask = build_agnostic_mask(parse, pose, resolve_mask_spec(cfg, base.height()));
  for (const auto& w : mask.warnings) r.warnings.push_back({w.code, "agnostic mask: " + w.message});
  r.agnostic_mask = std::move(mask.value);
  r.output = run_tryon(backends.synthesizer(cfg.synth_source),
                       {base, garment, r.agnostic_mask, pose, cfg.category, cfg.seed});
  r.mask_parse = std::move(parse);
  r.pose = std::move(pose);
  return r;
}

json provenance(const RasterImage& person, const RasterImage& mask_image, const char* mask_from,
                const TryOnResult& r) {
  return {{"person_fingerprint", hex_fingerprint(fingerprint(person))},
          {"mask_computed_from", mask_from},
          {"mask_source_image_fingerprint", hex_fingerprint(fingerprint(mask_image))},
          {"agnostic_mask_fingerprint", hex_fingerprint(fingerprint(r.agnostic_mask))},
          {"agnostic_mask_pixels", r.agnostic_mask.count()},
          {"output_fingerprint", hex_fingerprint(fingerprint(r.output))}};
}

json backend_names(const BackendSet& b, const EnsembleConfig& cfg) {
  return {{"parser", b.parser ? b.parser->name() : ""},
          {"pose", b.pose ? b.pose->name() : ""},
          {"inpainter", b.inpainter ? b.inpainter->name() : ""},
          {"synthesizer", b.synthesizer(cfg.synth_source).name()}};
}

}  // namespace

MaskSpec resolve_mask_spec(const EnsembleConfig& cfg, int image_height) {
  MaskSpec spec;
  if (cfg.mask_source == "dresscode") {
    spec = dresscode_mask_spec(cfg.category, image_height);
  } else if (cfg.mask_source == "vitonhd") {
    spec = vitonhd_mask_spec(cfg.category, image_height);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown mask source '" + cfg.mask_source + "'");
  }
  if (cfg.limb_margin) spec.limb_margin = *cfg.limb_margin;
  return spec;
}

TryOnResult tryon(const RasterImage& person, const RasterImage& garment, const EnsembleConfig& cfg,
                  const GenerateSkinConfig& skin_cfg, const BackendSet& backends) {
  GenerateSkinResult stage1 = generate_skin(person, skin_cfg, backends);
  ParseMap reparsed = run_parser(*backends.parser, stage1.preinpainted);
  TryOnResult r = stage_two(stage1.preinpainted, garment, std::move(reparsed), stage1.pose, cfg,
                            backends);
  Warnings all;
  for (const auto& w : stage1.warnings) all.push_back({w.code, "generate-skin: " + w.message});
  append(all, r.warnings);
  r.warnings = std::move(all);

  r.manifest = {{"pipeline", "two_stage"},
                {"ensemble", to_json(cfg)},
                {"generate_skin", to_json(skin_cfg)},
                {"backends", backend_names(backends, cfg)},
                {"provenance", provenance(person, stage1.preinpainted, "stage1_preinpainted", r)},
                {"stage1",
                 {{"preinpainted_fingerprint", hex_fingerprint(fingerprint(stage1.preinpainted))},
                  {"inpaint_mask_pixels", stage1.inpaint_mask.count()},
                  {"tone_source", to_string(stage1.tone_source)},
                  {"tone",
                   {{"h", stage1.tone.mean_h},
                    {"s", stage1.tone.mean_s},
                    {"v", stage1.tone.mean_v},
                    {"samples", stage1.tone.sample_count},
                    {"reliable", stage1.tone.reliable}}}}},
                {"warnings", to_json(r.warnings)}};
  r.stage1 = std::move(stage1);
  return r;
}

TryOnResult tryon_direct(const RasterImage& person, const RasterImage& garment,
                         const EnsembleConfig& cfg, const BackendSet& backends) {
  if (!backends.parser || !backends.pose) {
    throw Error(ErrorCode::kBackendUnavailable, "try-on needs parser and pose backends");
  }
  ParseMap parse = run_parser(*backends.parser, person);
  PoseSkeleton pose = run_pose(*backends.pose, person);
  TryOnResult r = stage_two(person, garment, std::move(parse), std::move(pose), cfg, backends);
  r.manifest = {{"pipeline", "direct"},
                {"ensemble", to_json(cfg)},
                {"backends", backend_names(backends, cfg)},
                {"provenance", provenance(person, person, "person", r)},
                {"warnings", to_json(r.warnings)}};
  return r;
}

json to_json(const EnsembleConfig& cfg) {
  json j = {{"mask_source", cfg.mask_source},
            {"synth_source", cfg.synth_source},
            {"category", to_string(cfg.category)},
            {"seed", cfg.seed}};
  j["limb_margin"] = cfg.limb_margin ? json(*cfg.limb_margin) : json(nullptr);
  return j;
}

EnsembleConfig ensemble_config_from_json(const json& j) {
  EnsembleConfig c;
  if (!j.is_object()) return c;
  c.mask_source = j.value("mask_source", c.mask_source);
  c.synth_source = j.value("synth_source", c.synth_source);
  if (j.contains("category")) c.category = parse_category(j["category"].get<std::string>());
  c.seed = j.value("seed", c.seed);
  if (j.contains("limb_margin") && !j["limb_margin"].is_null()) c.limb_margin = j["limb_margin"].get<int>();
  return c;
}

json to_json(const Warnings& warnings) {
  json out = json::array();
  for (const auto& w : warnings) out.push_back({{"code", to_string(w.code)}, {"message", w.message}});
  return out;
}

std::string hex_fingerprint(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

}  // namespace capvton
