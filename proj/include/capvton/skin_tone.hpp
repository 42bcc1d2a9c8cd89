#pragma once

#include <cstddef>
#include <optional>

#include "capvton/color.hpp"
#include "capvton/error.hpp"
#include "capvton/image.hpp"

namespace capvton {

// Skin box in YCrCb (Chai & Ngan style), bounds inclusive.
struct SkinBox {
  double cr_lo = 133.0;
  double cr_hi = 173.0;
  double cb_lo = 77.0;
  double cb_hi = 127.0;
  double y_lo = 40.0;

  bool contains(const YCrCb& c) const {
    return c.cr >= cr_lo && c.cr <= cr_hi && c.cb >= cb_lo && c.cb <= cb_hi && c.y >= y_lo;
  }
};

struct SkinToneEstimate {
  double mean_h = 0.0;  // circular mean, degrees
  double mean_s = 0.0;
  double mean_v = 0.0;
  std::size_t sample_count = 0;
  bool reliable = false;
};

inline constexpr std::size_t kDefaultMinSkinSamples = 500;

BinaryMask detect_skin(const RasterImage& img, const std::optional<BinaryMask>& restrict_to = {},
                       const SkinBox& box = {});

// Circular mean of hue, arithmetic means of saturation and value over `skin`.
// An empty region yields sample_count 0 and EmptySkinRegion.
WithWarnings<SkinToneEstimate> estimate_tone(const RasterImage& img, const BinaryMask& skin,
                                             std::size_t min_samples = kDefaultMinSkinSamples);

// Signed hue difference to - from, wrapped into (-180, 180].
double hue_delta(double from, double to);

// Shifts every region pixel's HSV by strength * (target mean - region mean),
// hue on the circle, keeping each pixel's deviation from the region mean.
// Pixels outside `region` are untouched. An unreliable target leaves the
// image unchanged with UnreliableTone.
WithWarnings<RasterImage> blend_to_tone(const RasterImage& img, const BinaryMask& region,
                                        const SkinToneEstimate& target, double strength);

}  // namespace capvton
