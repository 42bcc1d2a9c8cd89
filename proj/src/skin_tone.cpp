#include "capvton/skin_tone.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace capvton {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double wrap_degrees(double h) {
  h = std::fmod(h, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

}  // namespace

BinaryMask detect_skin(const RasterImage& img, const std::optional<BinaryMask>& restrict_to,
                       const SkinBox& box) {
  if (restrict_to) require_same_size(img.size(), restrict_to->size(), "skin restriction mask");
  BinaryMask out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (restrict_to && !restrict_to->at(x, y)) continue;
      if (box.contains(to_ycrcb(img.at(x, y)))) out.set(x, y, true);
    }
  }
  return out;
}

WithWarnings<SkinToneEstimate> estimate_tone(const RasterImage& img, const BinaryMask& skin,
                                             std::size_t min_samples) {
  require_same_size(img.size(), skin.size(), "tone estimation mask");
  WithWarnings<SkinToneEstimate> out{};
  double sum_sin = 0.0, sum_cos = 0.0, sum_s = 0.0, sum_v = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!skin.at(x, y)) continue;
      const Hsv c = to_hsv(img.at(x, y));
      sum_sin += std::sin(c.h * kDegToRad);
      sum_cos += std::cos(c.h * kDegToRad);
      sum_s += c.s;
      sum_v += c.v;
      ++n;
    }
  }
  auto& est = out.value;
  est.sample_count = n;
  if (n == 0) {
    out.warnings.push_back({WarningCode::kEmptySkinRegion, "no skin pixels to estimate tone from"});
    return out;
  }
  // A near-zero resultant means hues are spread evenly; fall back to 0.
  const double resultant = std::hypot(sum_sin, sum_cos) / static_cast<double>(n);
  est.mean_h = resultant > 1e-12 ? wrap_degrees(std::atan2(sum_sin, sum_cos) / kDegToRad) : 0.0;
  est.mean_s = sum_s / static_cast<double>(n);
  est.mean_v = sum_v / static_cast<double>(n);
  est.reliable = n >= min_samples;
  if (!est.reliable) {
    out.warnings.push_back({WarningCode::kUnreliableTone,
                            "only " + std::to_string(n) + " skin pixels, need " +
                                std::to_string(min_samples)});
  }
  return out;
}

double hue_delta(double from, double to) {
  double d = std::fmod(to - from, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

WithWarnings<RasterImage> blend_to_tone(const RasterImage& img, const BinaryMask& region,
                                        const SkinToneEstimate& target, double strength) {
  require_same_size(img.size(), region.size(), "blend region");
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "blend strength must lie in [0,1]");
  }
  WithWarnings<RasterImage> out{img, {}};
  if (!target.reliable) {
    out.warnings.push_back({WarningCode::kUnreliableTone, "target tone unreliable, blend skipped"});
    return out;
  }
  if (strength == 0.0 || region.none()) return out;

  const SkinToneEstimate current = estimate_tone(img, region, 1).value;
  const double dh = strength * hue_delta(current.mean_h, target.mean_h);
  const double ds = strength * (target.mean_s - current.mean_s);
  const double dv = strength * (target.mean_v - current.mean_v);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!region.at(x, y)) continue;
      const Hsv c = to_hsv(img.at(x, y));
      out.value.set(x, y,
                    from_hsv({wrap_degrees(c.h + dh), std::clamp(c.s + ds, 0.0, 1.0),
                              std::clamp(c.v + dv, 0.0, 1.0)}));
    }
  }
  return out;
}

}  // namespace capvton
