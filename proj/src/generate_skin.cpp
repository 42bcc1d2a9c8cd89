#include "capvton/generate_skin.hpp"

#include "capvton/masking.hpp"

namespace capvton {
namespace {

void require_backends(const BackendSet& b) {
  if (!b.parser || !b.pose || !b.inpainter) {
    throw Error(ErrorCode::kBackendUnavailable,
                "generate-skin needs parser, pose and inpainter backends");
  }
}

void note(Warnings& into, const Warnings& from, const std::string& context) {
  for (const auto& w : from) into.push_back({w.code, context + ": " + w.message});
}

}  // namespace

void GenerateSkinConfig::validate() const {
  if (target_sleeve == SleeveClass::kLongSleeve) {
    throw Error(ErrorCode::kInvalidArgument, "generate-skin target must be short_sleeve or sleeveless");
  }
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 1");
  if (!(blend_strength >= 0.0 && blend_strength <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "blend_strength must lie in [0,1]");
  }
  if (corridor_scale <= 0.0) throw Error(ErrorCode::kInvalidArgument, "corridor_scale must be > 0");
}

std::string_view to_string(ToneSource s) {
  switch (s) {
    case ToneSource::kFace: return "face";
    case ToneSource::kVisibleSkin: return "visible_skin";
    case ToneSource::kNone: return "none";
  }
  return "none";
}

GenerateSkinResult generate_skin(const RasterImage& src, const GenerateSkinConfig& cfg,
                                 const BackendSet& backends) {
  cfg.validate();
  require_backends(backends);

  GenerateSkinResult r;
  r.parse = run_parser(*backends.parser, src);
  r.pose = run_pose(*backends.pose, src);

  SkinMaskOptions mask_opt;
  mask_opt.limb_margin = cfg.limb_margin >= 0 ? cfg.limb_margin : default_limb_margin(src.height());
  mask_opt.hand_radius = cfg.hand_radius;
  mask_opt.corridor_scale = cfg.corridor_scale;
  auto mask = build_skin_inpaint_mask(r.parse, r.pose, cfg.target_sleeve, mask_opt);
  note(r.warnings, mask.warnings, "skin mask");
  r.inpaint_mask = std::move(mask.value);

  // Tone of the person, measured on the source before anything is repainted.
  auto face_tone = estimate_tone(
      src, detect_skin(src, r.parse.mask_of({labels::kFace}), cfg.skin_box), cfg.min_skin_samples);
  if (face_tone.value.reliable) {
    r.tone = face_tone.value;
    r.tone_source = ToneSource::kFace;
  } else {
    note(r.warnings, face_tone.warnings, "face tone");
    const BinaryMask visible = mask_subtract(
        r.parse.mask_of({labels::kNeck, labels::kLeftArm, labels::kRightArm, labels::kLeftLeg,
                         labels::kRightLeg}),
        r.inpaint_mask);
    auto body_tone =
        estimate_tone(src, detect_skin(src, visible, cfg.skin_box), cfg.min_skin_samples);
    r.tone = body_tone.value;
    if (body_tone.value.reliable) {
      r.tone_source = ToneSource::kVisibleSkin;
    } else {
      note(r.warnings, body_tone.warnings, "visible-skin tone");
    }
  }

  if (r.inpaint_mask.none()) {
    r.preinpainted = src;
    return r;
  }

  const RasterImage inpainted = run_inpaint(
      *backends.inpainter, {src, r.inpaint_mask, r.pose, cfg.prompt, cfg.steps, cfg.seed});
  r.preinpainted = copy_outside(inpainted, src, r.inpaint_mask);

  if (r.tone_source == ToneSource::kNone) {
    r.warnings.push_back({WarningCode::kUnreliableTone, "no reliable skin tone, blend skipped"});
    return r;
  }
  const BinaryMask new_skin = detect_skin(r.preinpainted, r.inpaint_mask, cfg.skin_box);
  if (new_skin.none()) {
    r.warnings.push_back(
        {WarningCode::kEmptySkinRegion, "inpainted region holds no skin-coloured pixels, blend skipped"});
    return r;
  }
  auto blended = blend_to_tone(r.preinpainted, new_skin, r.tone, cfg.blend_strength);
  note(r.warnings, blended.warnings, "tone blend");
  r.preinpainted = std::move(blended.value);
  return r;
}

nlohmann::json to_json(const GenerateSkinConfig& cfg) {
  return {{"target_sleeve", to_string(cfg.target_sleeve)},
          {"steps", cfg.steps},
          {"seed", cfg.seed},
          {"prompt", cfg.prompt},
          {"blend_strength", cfg.blend_strength},
          {"limb_margin", cfg.limb_margin},
          {"hand_radius", cfg.hand_radius},
          {"corridor_scale", cfg.corridor_scale},
          {"min_skin_samples", cfg.min_skin_samples},
          {"skin_box",
           {{"cr", {cfg.skin_box.cr_lo, cfg.skin_box.cr_hi}},
            {"cb", {cfg.skin_box.cb_lo, cfg.skin_box.cb_hi}},
            {"y_min", cfg.skin_box.y_lo}}}};
}

GenerateSkinConfig generate_skin_config_from_json(const nlohmann::json& j) {
  GenerateSkinConfig c;
  if (!j.is_object()) return c;
  if (j.contains("target_sleeve")) c.target_sleeve = parse_sleeve(j["target_sleeve"].get<std::string>());
  c.steps = j.value("steps", c.steps);
  c.seed = j.value("seed", c.seed);
  c.prompt = j.value("prompt", c.prompt);
  c.blend_strength = j.value("blend_strength", c.blend_strength);
  c.limb_margin = j.value("limb_margin", c.limb_margin);
  c.hand_radius = j.value("hand_radius", c.hand_radius);
  c.corridor_scale = j.value("corridor_scale", c.corridor_scale);
  c.min_skin_samples = j.value("min_skin_samples", c.min_skin_samples);
  if (j.contains("skin_box")) {
    const auto& b = j["skin_box"];
    if (b.contains("cr")) c.skin_box.cr_lo = b["cr"][0], c.skin_box.cr_hi = b["cr"][1];
    if (b.contains("cb")) c.skin_box.cb_lo = b["cb"][0], c.skin_box.cb_hi = b["cb"][1];
    c.skin_box.y_lo = b.value("y_min", c.skin_box.y_lo);
  }
  c.validate();
  return c;
}

}  // namespace capvton
