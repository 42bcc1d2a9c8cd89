#pragma once

#include <cstdint>
#include <string>

#include "capvton/backends.hpp"
#include "capvton/error.hpp"
#include "capvton/skin_tone.hpp"
#include "capvton/types.hpp"
#include "json.hpp"

namespace capvton {

inline constexpr int kDefaultDiffusionSteps = 30;
inline constexpr const char* kDefaultSkinPrompt = "bare skin, realistic arms";

struct GenerateSkinConfig {
  SleeveClass target_sleeve = SleeveClass::kShortSleeve;
  int steps = kDefaultDiffusionSteps;
  std::uint64_t seed = 0;
  std::string prompt = kDefaultSkinPrompt;
  double blend_strength = 1.0;
  // < 0 picks default_limb_margin() for the image height.
  int limb_margin = -1;
  // <= 0 picks default_hand_radius().
  int hand_radius = 0;
  double corridor_scale = 0.5;
  std::size_t min_skin_samples = kDefaultMinSkinSamples;
  SkinBox skin_box;

  void validate() const;
};

enum class ToneSource { kFace, kVisibleSkin, kNone };
std::string_view to_string(ToneSource s);

struct GenerateSkinResult {
  RasterImage preinpainted;
  BinaryMask inpaint_mask;
  PoseSkeleton pose;
  ParseMap parse;
  SkinToneEstimate tone;
  ToneSource tone_source = ToneSource::kNone;
  Warnings warnings;
};

// Stage 1: parse, estimate pose, build the skin inpainting mask for the
// target sleeve, inpaint it (pose-conditioned), copy every unmasked pixel back
// from `src`, then pull the inpainted skin toward the person's face tone
// (falling back to other visible skin). Needs parser, pose and inpainter.
GenerateSkinResult generate_skin(const RasterImage& src, const GenerateSkinConfig& cfg,
                                 const BackendSet& backends);

nlohmann::json to_json(const GenerateSkinConfig& cfg);
GenerateSkinConfig generate_skin_config_from_json(const nlohmann::json& j);

}  // namespace capvton
