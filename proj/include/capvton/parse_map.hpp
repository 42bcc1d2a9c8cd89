#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capvton/image.hpp"

namespace capvton {

// Canonical semantic names used by the masking and tone code. A schema maps
// these (and any others) onto integer label ids.
namespace labels {
inline constexpr std::string_view kBackground = "background";
inline constexpr std::string_view kHat = "hat";
inline constexpr std::string_view kHair = "hair";
inline constexpr std::string_view kFace = "face";
inline constexpr std::string_view kNeck = "neck";
inline constexpr std::string_view kUpperClothes = "upper-clothes";
inline constexpr std::string_view kCoat = "coat";
inline constexpr std::string_view kDress = "dress";
inline constexpr std::string_view kPants = "pants";
inline constexpr std::string_view kSkirt = "skirt";
inline constexpr std::string_view kLeftArm = "left-arm";
inline constexpr std::string_view kRightArm = "right-arm";
inline constexpr std::string_view kLeftLeg = "left-leg";
inline constexpr std::string_view kRightLeg = "right-leg";
}  // namespace labels

class LabelSchema {
 public:
  LabelSchema() = default;
  explicit LabelSchema(std::map<int, std::string> names);

  // LIP-style 20-label set as used by VITON-HD parse maps (id 10 is neck).
  static const LabelSchema& viton_default();

  bool has(int id) const { return names_.contains(id); }
  const std::string& name(int id) const;
  std::optional<int> id(std::string_view name) const;
  const std::map<int, std::string>& entries() const { return names_; }

  bool operator==(const LabelSchema&) const = default;

 private:
  std::map<int, std::string> names_;
};

class ParseMap {
 public:
  ParseMap() = default;
  ParseMap(int width, int height, std::vector<std::uint8_t> labels, LabelSchema schema);

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }
  const LabelSchema& schema() const { return schema_; }

  int at(int x, int y) const { return labels_[static_cast<std::size_t>(y) * size_.width + x]; }
  std::span<const std::uint8_t> labels() const { return labels_; }

  // Pixels whose label name is any of `names`; names the schema lacks match nothing.
  BinaryMask mask_of(std::initializer_list<std::string_view> names) const;
  BinaryMask mask_of(std::span<const std::string> names) const;

  bool operator==(const ParseMap&) const = default;

 private:
  Size size_;
  std::vector<std::uint8_t> labels_;
  LabelSchema schema_;
};

}  // namespace capvton
