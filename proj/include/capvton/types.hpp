#pragma once

#include <string>
#include <string_view>

namespace capvton {

enum class GarmentCategory { kUpper, kLower, kDress };
enum class SleeveClass { kLongSleeve, kShortSleeve, kSleeveless };

std::string_view to_string(GarmentCategory c);
std::string_view to_string(SleeveClass s);

// Accepts the canonical names plus the CLI shorthands ("short", "long").
GarmentCategory parse_category(std::string_view text);
SleeveClass parse_sleeve(std::string_view text);

}  // namespace capvton
