#include "capvton/parse_map.hpp"

#include <algorithm>
#include <array>

namespace capvton {

LabelSchema::LabelSchema(std::map<int, std::string> names) : names_(std::move(names)) {
  for (const auto& [id, name] : names_) {
    if (id < 0 || id > 255) {
      throw Error(ErrorCode::kInvalidArgument, "label id out of 8-bit range: " + std::to_string(id));
    }
    if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "empty label name");
  }
}

const LabelSchema& LabelSchema::viton_default() {
  static const LabelSchema schema({
      {0, "background"}, {1, "hat"},        {2, "hair"},           {3, "glove"},
      {4, "sunglasses"}, {5, "upper-clothes"}, {6, "dress"},       {7, "coat"},
      {8, "socks"},      {9, "pants"},      {10, "neck"},          {11, "scarf"},
      {12, "skirt"},     {13, "face"},      {14, "left-arm"},      {15, "right-arm"},
      {16, "left-leg"},  {17, "right-leg"}, {18, "left-shoe"},     {19, "right-shoe"},
  });
  return schema;
}

const std::string& LabelSchema::name(int id) const {
  auto it = names_.find(id);
  if (it == names_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "label " + std::to_string(id) + " not in schema");
  }
  return it->second;
}

std::optional<int> LabelSchema::id(std::string_view name) const {
  for (const auto& [id, n] : names_) {
    if (n == name) return id;
  }
  return std::nullopt;
}

ParseMap::ParseMap(int width, int height, std::vector<std::uint8_t> labels, LabelSchema schema)
    : size_{width, height}, labels_(std::move(labels)), schema_(std::move(schema)) {
  if (width < 0 || height < 0) throw Error(ErrorCode::kInvalidArgument, "negative parse dimensions");
  if (labels_.size() != size_.area()) {
    throw Error(ErrorCode::kDimensionMismatch, "parse label buffer does not match dimensions");
  }
  std::array<bool, 256> seen{};
  for (auto l : labels_) seen[l] = true;
  for (int l = 0; l < 256; ++l) {
    if (seen[l] && !schema_.has(l)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "parse map uses label " + std::to_string(l) + " missing from schema");
    }
  }
}

namespace {

BinaryMask select(const ParseMap& p, const std::array<bool, 256>& wanted) {
  std::vector<std::uint8_t> bits(p.labels().size());
  std::transform(p.labels().begin(), p.labels().end(), bits.begin(),
                 [&](std::uint8_t l) { return wanted[l] ? 1 : 0; });
  return BinaryMask(p.width(), p.height(), std::move(bits));
}

}  // namespace

BinaryMask ParseMap::mask_of(std::initializer_list<std::string_view> names) const {
  std::array<bool, 256> wanted{};
  for (auto n : names) {
    if (auto id = schema_.id(n)) wanted[*id] = true;
  }
  return select(*this, wanted);
}

BinaryMask ParseMap::mask_of(std::span<const std::string> names) const {
  std::array<bool, 256> wanted{};
  for (const auto& n : names) {
    if (auto id = schema_.id(n)) wanted[*id] = true;
  }
  return select(*this, wanted);
}

}  // namespace capvton
