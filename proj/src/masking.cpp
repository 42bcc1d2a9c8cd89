#include "capvton/masking.hpp"

#include <algorithm>
#include <cmath>

namespace capvton {
namespace {

using namespace std::string_literals;

std::vector<std::string> upper_labels() { return {"upper-clothes"s, "coat"s}; }
std::vector<std::string> lower_labels() {
  return {"pants"s, "skirt"s, "left-leg"s, "right-leg"s};
}

std::string_view arm_label(Side side) {
  return side == Side::kRight ? labels::kRightArm : labels::kLeftArm;
}

double length(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

struct ArmMask {
  BinaryMask region;
  BinaryMask hand;
  bool degenerate = false;
};

ArmMask arm_skin_region(const ParseMap& parse, const PoseSkeleton& pose, Side side,
                        SleeveClass target, const SkinMaskOptions& opt, int hand_radius,
                        const BinaryMask& sleeve_pixels) {
  const Size size = parse.size();
  const ArmJoints j = arm_joints(side);
  ArmMask out{parse.mask_of({arm_label(side)}), BinaryMask(size.width, size.height), false};

  if (auto wrist = pose.position(j.wrist)) {
    out.hand = rasterize_disk(size, *wrist, hand_radius);
  }

  const auto shoulder = pose.position(j.shoulder);
  const auto elbow = pose.position(j.elbow);
  if (!shoulder || !elbow || length(*shoulder, *elbow) < 1e-6) {
    out.degenerate = true;
    return out;
  }

  const double upper_len = length(*shoulder, *elbow);
  const Point2 dir{(elbow->x - shoulder->x) / upper_len, (elbow->y - shoulder->y) / upper_len};
  // Without a wrist, assume a forearm as long as the upper arm, continuing straight.
  const Point2 wrist = pose.position(j.wrist).value_or(
      Point2{elbow->x + (elbow->x - shoulder->x), elbow->y + (elbow->y - shoulder->y)});
  const Point2 line = target == SleeveClass::kSleeveless
                          ? *shoulder
                          : Point2{(shoulder->x + elbow->x) / 2, (shoulder->y + elbow->y) / 2};
  const double radius = std::max<double>(opt.min_corridor_radius, opt.corridor_scale * upper_len);

  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      if (!sleeve_pixels.at(x, y)) continue;
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      if ((p.x - line.x) * dir.x + (p.y - line.y) * dir.y <= 0.0) continue;
      if (segment_distance(p, *shoulder, *elbow) <= radius ||
          segment_distance(p, *elbow, wrist) <= radius) {
        out.region.set(x, y, true);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> default_protected_labels() { return {"face"s, "hair"s}; }

void MaskSpec::validate() const {
  if (include_labels.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mask spec needs at least one include label");
  }
  if (limb_margin < 0) throw Error(ErrorCode::kInvalidArgument, "limb_margin must be >= 0");
  if (hand_radius < 0) throw Error(ErrorCode::kInvalidArgument, "hand_radius must be >= 0");
}

int default_limb_margin(int image_height) {
  return static_cast<int>(std::lround(8.0 * image_height / 1024.0));
}

int default_hand_radius(int image_height) {
  return std::max(1, static_cast<int>(std::lround(24.0 * image_height / 1024.0)));
}

MaskSpec dresscode_mask_spec(GarmentCategory category, int image_height) {
  MaskSpec spec;
  spec.category = category;
  spec.limb_margin = default_limb_margin(image_height);
  spec.hand_radius = default_hand_radius(image_height);
  switch (category) {
    case GarmentCategory::kUpper:
      spec.include_labels = upper_labels();
      spec.include_arms = true;
      spec.include_neck = true;
      break;
    case GarmentCategory::kLower:
      spec.include_labels = lower_labels();
      break;
    case GarmentCategory::kDress: {
      spec.include_labels = upper_labels();
      spec.include_labels.push_back("dress");
      for (auto& l : lower_labels()) spec.include_labels.push_back(l);
      spec.include_arms = true;
      spec.include_neck = true;
      break;
    }
  }
  return spec;
}

MaskSpec vitonhd_mask_spec(GarmentCategory category, int image_height) {
  MaskSpec spec = dresscode_mask_spec(GarmentCategory::kUpper, image_height);
  spec.category = category;
  return spec;
}

WithWarnings<BinaryMask> build_agnostic_mask(const ParseMap& parse, const PoseSkeleton& pose,
                                             const MaskSpec& spec) {
  spec.validate();
  WithWarnings<BinaryMask> out{BinaryMask(parse.width(), parse.height()), {}};

  BinaryMask region = parse.mask_of(spec.include_labels);
  if (region.none()) {
    out.warnings.push_back({WarningCode::kMissingRegion,
                            "no pixel carries any of the labels for category " +
                                std::string(to_string(spec.category))});
    return out;
  }
  if (spec.include_arms) {
    region = mask_union(region, parse.mask_of({labels::kLeftArm, labels::kRightArm}));
  }
  if (spec.include_neck) region = mask_union(region, parse.mask_of({labels::kNeck}));

  region = dilate(region, spec.limb_margin);
  region = mask_subtract(region, parse.mask_of(spec.protected_labels));
  if (spec.preserve_hands) {
    for (Joint wrist : {Joint::kRightWrist, Joint::kLeftWrist}) {
      if (auto p = pose.position(wrist)) {
        region = mask_subtract(region, rasterize_disk(parse.size(), *p, spec.hand_radius));
      }
    }
  }
  out.value = std::move(region);
  return out;
}

WithWarnings<BinaryMask> build_skin_inpaint_mask(const ParseMap& parse, const PoseSkeleton& pose,
                                                 SleeveClass target,
                                                 const SkinMaskOptions& options) {
  if (target == SleeveClass::kLongSleeve) {
    throw Error(ErrorCode::kInvalidArgument,
                "skin inpainting targets short_sleeve or sleeveless, not long_sleeve");
  }
  if (options.limb_margin < 0) throw Error(ErrorCode::kInvalidArgument, "limb_margin must be >= 0");
  const int hand_radius =
      options.hand_radius > 0 ? options.hand_radius : default_hand_radius(parse.height());
  const BinaryMask sleeve_pixels = parse.mask_of(options.sleeve_labels);

  WithWarnings<BinaryMask> out{BinaryMask(parse.width(), parse.height()), {}};
  BinaryMask hands(parse.width(), parse.height());
  int degenerate = 0;
  for (Side side : {Side::kRight, Side::kLeft}) {
    ArmMask arm = arm_skin_region(parse, pose, side, target, options, hand_radius, sleeve_pixels);
    if (arm.degenerate) {
      ++degenerate;
      out.warnings.push_back(
          {WarningCode::kDegeneratePose,
           std::string(side == Side::kRight ? "right" : "left") +
               " arm: shoulder or elbow not detected, falling back to the full arm-label region"});
    }
    out.value = mask_union(out.value, arm.region);
    hands = mask_union(hands, arm.hand);
  }
  if (degenerate == 2) {
    out.warnings.push_back({WarningCode::kDegeneratePose,
                            "no usable arm pose, skin mask is the full arm-label region"});
  }
  out.value = dilate(out.value, options.limb_margin);
  out.value = mask_subtract(out.value, hands);
  out.value = mask_subtract(out.value, parse.mask_of(options.protected_labels));
  return out;
}

double segment_distance(Point2 p, Point2 a, Point2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

BinaryMask rasterize_disk(Size size, Point2 center, double radius) {
  return rasterize_capsule(size, center, center, radius);
}

BinaryMask rasterize_capsule(Size size, Point2 a, Point2 b, double radius) {
  BinaryMask out(size.width, size.height);
  if (radius < 0.0) return out;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius)));
  const int x1 = std::min(size.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius)));
  const int y1 = std::min(size.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (segment_distance({double(x), double(y)}, a, b) <= radius) out.set(x, y, true);
    }
  }
  return out;
}

RasterImage overlay_mask(const RasterImage& img, const BinaryMask& mask, Rgb color, double alpha) {
  require_same_size(img.size(), mask.size(), "mask overlay");
  RasterImage out = img;
  auto blend = [alpha](std::uint8_t base, std::uint8_t top) {
    return static_cast<std::uint8_t>(std::lround((1.0 - alpha) * base + alpha * top));
  };
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const Rgb c = img.at(x, y);
      out.set(x, y, {blend(c.r, color.r), blend(c.g, color.g), blend(c.b, color.b)});
    }
  }
  return out;
}

}  // namespace capvton
