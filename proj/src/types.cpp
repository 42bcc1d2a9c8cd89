#include "capvton/types.hpp"

#include "capvton/error.hpp"

namespace capvton {

std::string_view to_string(GarmentCategory c) {
  switch (c) {
    case GarmentCategory::kUpper: return "upper";
    case GarmentCategory::kLower: return "lower";
    case GarmentCategory::kDress: return "dress";
  }
  return "upper";
}

std::string_view to_string(SleeveClass s) {
  switch (s) {
    case SleeveClass::kLongSleeve: return "long_sleeve";
    case SleeveClass::kShortSleeve: return "short_sleeve";
    case SleeveClass::kSleeveless: return "sleeveless";
  }
  return "long_sleeve";
}

GarmentCategory parse_category(std::string_view text) {
  if (text == "upper" || text == "upper_body") return GarmentCategory::kUpper;
  if (text == "lower" || text == "lower_body") return GarmentCategory::kLower;
  if (text == "dress" || text == "dresses") return GarmentCategory::kDress;
  throw Error(ErrorCode::kInvalidArgument, "unknown garment category '" + std::string(text) + "'");
}

SleeveClass parse_sleeve(std::string_view text) {
  if (text == "long_sleeve" || text == "long") return SleeveClass::kLongSleeve;
  if (text == "short_sleeve" || text == "short") return SleeveClass::kShortSleeve;
  if (text == "sleeveless") return SleeveClass::kSleeveless;
  throw Error(ErrorCode::kInvalidArgument, "unknown sleeve class '" + std::string(text) + "'");
}

}  // namespace capvton
