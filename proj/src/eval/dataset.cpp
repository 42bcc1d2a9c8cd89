#include "capvton/eval/dataset.hpp"

#include <algorithm>
#include <sstream>

#include "capvton/error.hpp"
#include "capvton/io.hpp"

namespace capvton::eval {
namespace {

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::map<std::string, fs::path> images_in(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image(e.path())) out[e.path().stem().string()] = e.path();
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) out.push_back(field);
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \r\n\t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \r\n\t") - b + 1);
}

struct Meta {
  GarmentCategory category = GarmentCategory::kUpper;
  std::optional<SleeveClass> person_sleeve;
  std::optional<SleeveClass> garment_sleeve;
};

std::map<std::string, Meta> read_index_tsv(const fs::path& path) {
  std::map<std::string, Meta> out;
  if (!fs::exists(path)) return out;
  std::stringstream in(io::read_text(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto f = split_tabs(line);
    for (auto& s : f) s = trim(s);
    if (f.size() < 2 || f.size() > 4) {
      throw Error(ErrorCode::kFormatError, path.string() + ":" + std::to_string(lineno) +
                                               ": expected 2 to 4 tab-separated fields");
    }
    Meta m;
    try {
      m.category = parse_category(f[1]);
      if (f.size() > 2 && f[2] != "-") m.person_sleeve = parse_sleeve(f[2]);
      if (f.size() > 3 && f[3] != "-") m.garment_sleeve = parse_sleeve(f[3]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kFormatError,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out[f[0]] = m;
  }
  return out;
}

}  // namespace

std::string_view to_string(Pairing p) { return p == Pairing::kPaired ? "paired" : "unpaired"; }

Pairing parse_pairing(std::string_view s) {
  if (s == "paired") return Pairing::kPaired;
  if (s == "unpaired") return Pairing::kUnpaired;
  throw Error(ErrorCode::kInvalidArgument, "pairing must be paired or unpaired, got '" + std::string(s) + "'");
}

DatasetIndex build_index(const fs::path& root, Pairing pairing, std::uint64_t seed) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kMissingFile, "dataset root " + root.string() + " is not a directory");
  }
  const auto persons = images_in(root / "image");
  if (persons.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no person images under " + (root / "image").string());
  }
  const auto garments = images_in(root / "cloth");
  const auto meta = read_index_tsv(root / "index.tsv");

  struct Entry {
    std::string stem;
    fs::path person, garment;
    std::optional<fs::path> parse, pose;
    Meta meta;
  };
  std::vector<Entry> entries;
  for (const auto& [stem, person] : persons) {
    Entry e{stem, person, {}, {}, {}, {}};
    auto g = garments.find(stem);
    if (g == garments.end()) {
      throw Error(ErrorCode::kMissingFile, "no garment cloth/" + stem + ".* for person " + stem);
    }
    e.garment = g->second;
    if (fs::path p = root / "image-parse-v3" / (stem + ".png"); fs::exists(p)) e.parse = p;
    if (fs::path p = root / "openpose_json" / (stem + "_keypoints.json"); fs::exists(p)) e.pose = p;
    if (auto m = meta.find(stem); m != meta.end()) e.meta = m->second;
    entries.push_back(std::move(e));
  }

  DatasetIndex index{root, pairing, seed, {}};
  std::vector<std::size_t> garment_of(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) garment_of[i] = i;
  if (pairing == Pairing::kUnpaired) {
    if (entries.size() < 2) {
      throw Error(ErrorCode::kEmptyDataset, "unpaired evaluation needs at least 2 items");
    }
    garment_of = derangement(entries.size(), seed);
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& p = entries[i];
    const Entry& g = entries[garment_of[i]];
    DatasetItem item;
    item.person_stem = p.stem;
    item.garment_stem = g.stem;
    item.id = pairing == Pairing::kPaired ? p.stem : p.stem + "__" + g.stem;
    item.person = p.person;
    item.garment = g.garment;
    item.parse = p.parse;
    item.pose = p.pose;
    item.category = g.meta.category;
    item.person_sleeve = p.meta.person_sleeve;
    item.garment_sleeve = g.meta.garment_sleeve;
    index.items.push_back(std::move(item));
  }
  return index;
}

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "bounded_draw needs bound > 0");
  // Largest multiple of bound that fits, minus one; draws above it are rejected.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    const std::uint64_t v = rng();
    if (v <= limit) return v % bound;
  }
}

std::vector<std::size_t> derangement(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "a derangement needs n >= 2");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> p(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(p[i], p[bounded_draw(rng, i + 1)]);
    bool fixed = false;
    for (std::size_t i = 0; i < n && !fixed; ++i) fixed = p[i] == i;
    if (!fixed) return p;
  }
}

void HumanLabels::set(const std::string& method, const std::string& item, bool normal) {
  labels_[{method, item}] = normal;
}

std::optional<bool> HumanLabels::lookup(const std::string& method, const std::string& item) const {
  if (auto it = labels_.find({method, item}); it != labels_.end()) return it->second;
  if (auto it = labels_.find({"*", item}); it != labels_.end()) return it->second;
  return std::nullopt;
}

HumanLabels read_human_labels(const fs::path& path) {
  HumanLabels labels;
  std::stringstream in(io::read_text(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto f = split_tabs(line);
    for (auto& s : f) s = trim(s);
    if (f.size() != 3 || (f[2] != "normal" && f[2] != "abnormal")) {
      throw Error(ErrorCode::kFormatError, path.string() + ":" + std::to_string(lineno) +
                                               ": expected method<TAB>item<TAB>normal|abnormal");
    }
    labels.set(f[0], f[1], f[2] == "normal");
  }
  return labels;
}

}  // namespace capvton::eval
