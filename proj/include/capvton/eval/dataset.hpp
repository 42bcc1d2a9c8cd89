#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "capvton/types.hpp"

namespace capvton::eval {

namespace fs = std::filesystem;

enum class Pairing { kPaired, kUnpaired };
std::string_view to_string(Pairing p);
Pairing parse_pairing(std::string_view s);

struct DatasetItem {
  // Person stem when paired, "<person>__<garment>" when unpaired.
  std::string id;
  std::string person_stem;
  std::string garment_stem;
  fs::path person;
  fs::path garment;
  std::optional<fs::path> parse;
  std::optional<fs::path> pose;
  // Category and garment sleeve follow the garment; person sleeve the person.
  GarmentCategory category = GarmentCategory::kUpper;
  std::optional<SleeveClass> person_sleeve;
  std::optional<SleeveClass> garment_sleeve;
};

struct DatasetIndex {
  fs::path root;
  Pairing pairing = Pairing::kPaired;
  std::uint64_t seed = 0;
  std::vector<DatasetItem> items;
};

// Layout: image/<stem>.{png,jpg,jpeg} persons, cloth/<stem>.* garments (one
// per person), optional image-parse-v3/<stem>.png and
// openpose_json/<stem>_keypoints.json, optional index.tsv with rows
// "stem<TAB>category<TAB>person_sleeve<TAB>garment_sleeve" ('#' comments,
// '-' for unknown). Items are sorted by stem. Unpaired assigns garments by a
// seeded derangement.
DatasetIndex build_index(const fs::path& root, Pairing pairing, std::uint64_t seed);

// Uniform draw in [0, bound) from a 64-bit engine by rejection; unlike
// std::uniform_int_distribution it gives the same sequence on every platform.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound);

// Permutation p of 0..n-1 with p[i] != i for all i, uniform over derangements
// (shuffle and reject). n must be >= 2.
std::vector<std::size_t> derangement(std::size_t n, std::uint64_t seed);

// Observer verdicts, rows "method<TAB>item_id<TAB>normal|abnormal"; method
// "*" applies to every method.
class HumanLabels {
 public:
  void set(const std::string& method, const std::string& item, bool normal);
  std::optional<bool> lookup(const std::string& method, const std::string& item) const;
  bool empty() const { return labels_.empty(); }

 private:
  std::map<std::pair<std::string, std::string>, bool> labels_;
};

HumanLabels read_human_labels(const fs::path& path);

}  // namespace capvton::eval
