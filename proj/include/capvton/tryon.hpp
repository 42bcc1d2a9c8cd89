#pragma once

#include <optional>
#include <string>

#include "capvton/generate_skin.hpp"
#include "capvton/masking.hpp"
#include "json.hpp"

namespace capvton {

// Which mask strategy feeds which synthesizer. The default ensemble uses
// the dresscode mask with the vitonhd synthesizer.
struct EnsembleConfig {
  std::string mask_source = "dresscode";
  std::string synth_source = "vitonhd";
  GarmentCategory category = GarmentCategory::kUpper;
  std::uint64_t seed = 0;
  std::optional<int> limb_margin;
};

// Known mask strategies: "dresscode" (multi-category) and "vitonhd" (upper only).
MaskSpec resolve_mask_spec(const EnsembleConfig& cfg, int image_height);

struct TryOnResult {
  RasterImage output;
  BinaryMask agnostic_mask;
  // The parse the agnostic mask was built from.
  ParseMap mask_parse;
  PoseSkeleton pose;
  std::optional<GenerateSkinResult> stage1;
  nlohmann::json manifest;
  Warnings warnings;
};

// Full two-stage pipeline: generate_skin on the person, re-parse the
// pre-inpainted image, build the agnostic mask from that parse, synthesize.
TryOnResult tryon(const RasterImage& person, const RasterImage& garment, const EnsembleConfig& cfg,
                  const GenerateSkinConfig& skin_cfg, const BackendSet& backends);

// Stage 2 on the raw person image (the single-stage baseline).
TryOnResult tryon_direct(const RasterImage& person, const RasterImage& garment,
                         const EnsembleConfig& cfg, const BackendSet& backends);

nlohmann::json to_json(const EnsembleConfig& cfg);
EnsembleConfig ensemble_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Warnings& warnings);
std::string hex_fingerprint(std::uint64_t fp);

}  // namespace capvton
