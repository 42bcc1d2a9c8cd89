#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "capvton/config.hpp"
#include "capvton/image.hpp"
#include "capvton/io.hpp"
#include "capvton/parse_map.hpp"
#include "capvton/pose.hpp"

namespace capvton::test {

inline std::filesystem::path fixture_dir() { return CAPVTON_FIXTURE_DIR; }
inline std::filesystem::path dataset_dir() { return fixture_dir() / "dataset"; }
inline std::filesystem::path cli_path() { return CAPVTON_CLI; }

struct FixtureItem {
  RasterImage person;
  ParseMap parse;
  PoseSkeleton pose;
};

inline FixtureItem load_item(const std::string& stem) {
  const auto root = dataset_dir();
  return {io::read_image(root / "image" / (stem + ".png")),
          io::read_parse(root / "image-parse-v3" / (stem + ".png")),
          io::read_pose(root / "openpose_json" / (stem + "_keypoints.json"))};
}

inline RasterImage load_garment(const std::string& stem) {
  return io::read_image(dataset_dir() / "cloth" / (stem + ".png"));
}

inline PipelineConfig stub_config() { return load_config(fixture_dir() / "configs" / "stub.json"); }

// Parse and pose sidecars for every fixture person.
inline std::shared_ptr<SidecarRegistry> fixture_registry() {
  auto reg = std::make_shared<SidecarRegistry>();
  const auto root = dataset_dir();
  for (const char* stem : {"p0", "p1", "p2", "p3"}) {
    const RasterImage img = io::read_image(root / "image" / (std::string(stem) + ".png"));
    reg->add_parse(img, root / "image-parse-v3" / (std::string(stem) + ".png"));
    reg->add_pose(img, root / "openpose_json" / (std::string(stem) + "_keypoints.json"));
  }
  return reg;
}

inline BackendSet stub_backends(std::shared_ptr<SidecarRegistry> reg = fixture_registry()) {
  return make_backends(stub_config(), std::move(reg));
}

inline int label_id(std::string_view name) {
  return *LabelSchema::viton_default().id(name);
}

// Parse map filled with background, rectangles painted on demand.
class ParseBuilder {
 public:
  ParseBuilder(int w, int h) : w_(w), h_(h), labels_(static_cast<std::size_t>(w) * h, 0) {}

  ParseBuilder& rect(std::string_view name, int x0, int y0, int x1, int y1) {
    const int id = label_id(name);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) labels_[static_cast<std::size_t>(y) * w_ + x] = id;
    }
    return *this;
  }

  ParseMap build() const { return ParseMap(w_, h_, labels_, LabelSchema::viton_default()); }

 private:
  int w_, h_;
  std::vector<std::uint8_t> labels_;
};

inline PoseSkeleton pose_with(std::initializer_list<std::pair<Joint, Point2>> joints) {
  std::array<Keypoint, kJointCount> kp{};
  for (const auto& [j, p] : joints) kp[static_cast<int>(j)] = {p.x, p.y, 1.0};
  return PoseSkeleton(kp);
}

inline BinaryMask random_mask(int w, int h, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(p);
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, bit(rng));
  }
  return m;
}

inline RasterImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> v(0, 255);
  RasterImage img(w, h);
  for (auto& b : img.data()) b = static_cast<std::uint8_t>(v(rng));
  return img;
}

// O(pixels * r^2) Chebyshev dilation.
inline BinaryMask brute_dilate(const BinaryMask& m, int r) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool hit = false;
      for (int dy = -r; dy <= r && !hit; ++dy) {
        for (int dx = -r; dx <= r && !hit; ++dx) hit = m.contains(x + dx, y + dy);
      }
      out.set(x, y, hit);
    }
  }
  return out;
}

inline bool disjoint(const BinaryMask& a, const BinaryMask& b) {
  return mask_intersect(a, b).none();
}

}  // namespace capvton::test
