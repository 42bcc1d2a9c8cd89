#pragma once

#include <optional>
#include <span>
#include <vector>

#include "capvton/error.hpp"
#include "capvton/image.hpp"
#include "capvton/parse_map.hpp"
#include "capvton/pose.hpp"
#include "capvton/skin_tone.hpp"
#include "capvton/types.hpp"

namespace capvton::metrics {

struct NorCase {
  RasterImage output;
  PoseSkeleton pose;
  ParseMap parse;
  SleeveClass reference = SleeveClass::kShortSleeve;
  // Observer verdict; when present it decides the case.
  std::optional<bool> human_normal;
};

struct NorParams {
  double threshold = 0.35;
  // Corridor radius in pixels; <= 0 means a quarter of the forearm length, at least 1.
  double corridor_radius = 0.0;
  SkinBox skin_box;
};

enum class NorStatus { kNormal, kAbnormal, kExcluded };
enum class NorSource { kHuman, kAutomated };

std::string_view to_string(NorStatus s);
std::string_view to_string(NorSource s);

struct ArmExposure {
  Side side = Side::kRight;
  std::size_t corridor_pixels = 0;
  std::size_t skin_pixels = 0;
  double ratio = 0.0;
};

struct NorCaseResult {
  NorStatus status = NorStatus::kExcluded;
  NorSource source = NorSource::kAutomated;
  std::vector<ArmExposure> arms;
  Warnings warnings;
};

struct NorReport {
  std::vector<NorCaseResult> cases;
  std::size_t normal = 0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  // normal / evaluated; empty when nothing could be evaluated.
  std::optional<double> rate;
  Warnings warnings;
};

// Skin exposure along each visible forearm: the corridor is a capsule around
// elbow->wrist (for a sleeveless reference it also covers the lower half of
// the upper arm), restricted to non-background parse pixels. The case is
// normal iff every visible arm's skin ratio reaches the threshold. Cases with
// no visible forearm and no human label are excluded with DegeneratePose.
NorCaseResult classify_case(const NorCase& c, const NorParams& params = {});

NorReport summarize(std::vector<NorCaseResult> cases);

NorReport normal_output_rate(std::span<const NorCase> cases, const NorParams& params = {});

}  // namespace capvton::metrics
