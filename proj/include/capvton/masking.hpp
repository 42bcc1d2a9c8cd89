#pragma once

#include <string>
#include <vector>

#include "capvton/error.hpp"
#include "capvton/image.hpp"
#include "capvton/parse_map.hpp"
#include "capvton/pose.hpp"
#include "capvton/types.hpp"

namespace capvton {

// Labels no mask may ever cover.
std::vector<std::string> default_protected_labels();

struct MaskSpec {
  GarmentCategory category = GarmentCategory::kUpper;
  std::vector<std::string> include_labels;
  int limb_margin = 0;
  bool include_arms = false;
  bool include_neck = false;
  // Keep a disk around each visible wrist out of the mask.
  bool preserve_hands = false;
  int hand_radius = 2;
  std::vector<std::string> protected_labels = default_protected_labels();

  void validate() const;
};

// 8 px at 1024 rows, scaled with image height.
int default_limb_margin(int image_height);
// 24 px at 1024 rows, scaled with image height, at least 1.
int default_hand_radius(int image_height);

// Multi-category masks in the DressCode style: upper garments take the arms
// and neck, lower garments the legs, dresses the union of both.
MaskSpec dresscode_mask_spec(GarmentCategory category, int image_height);
// Upper-body-only masking as done by VITON-HD models, whatever the category.
MaskSpec vitonhd_mask_spec(GarmentCategory category, int image_height);

// Mask of all include_labels pixels (plus arm/neck labels when flagged),
// dilated by limb_margin, minus protected labels. If no pixel carries any
// include label the mask is empty and MissingRegion is reported.
WithWarnings<BinaryMask> build_agnostic_mask(const ParseMap& parse, const PoseSkeleton& pose,
                                             const MaskSpec& spec);

struct SkinMaskOptions {
  // Disk kept out of the mask around each visible wrist; <= 0 picks
  // default_hand_radius for the image.
  int hand_radius = 0;
  // Sleeve corridor radius as a fraction of shoulder-elbow length.
  double corridor_scale = 0.5;
  int min_corridor_radius = 2;
  int limb_margin = 0;
  std::vector<std::string> sleeve_labels = {"upper-clothes", "coat", "dress"};
  std::vector<std::string> protected_labels = default_protected_labels();
};

// Pre-inpainting mask exposing skin for a shorter target sleeve. Per arm:
// sleeve-label pixels inside the arm corridor and past the sleeve line, plus
// that arm's label pixels. The sleeve line is perpendicular to shoulder->elbow
// through the shoulder (sleeveless) or the shoulder-elbow midpoint (short
// sleeve). Hands and protected labels are excluded. An arm whose shoulder or
// elbow is missing falls back to its arm-label pixels with DegeneratePose.
WithWarnings<BinaryMask> build_skin_inpaint_mask(const ParseMap& parse, const PoseSkeleton& pose,
                                                 SleeveClass target,
                                                 const SkinMaskOptions& options = {});

// Point-to-segment distance; shared with the corridor tests in metrics.
double segment_distance(Point2 p, Point2 a, Point2 b);
BinaryMask rasterize_disk(Size size, Point2 center, double radius);
BinaryMask rasterize_capsule(Size size, Point2 a, Point2 b, double radius);

// Blends `color` over masked pixels ("red highlighted regions").
RasterImage overlay_mask(const RasterImage& img, const BinaryMask& mask,
                         Rgb color = {255, 0, 0}, double alpha = 0.5);

}  // namespace capvton
