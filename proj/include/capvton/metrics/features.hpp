#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "capvton/image.hpp"

namespace capvton::metrics {

// Channel-major feature map: data[(c * height + y) * width + x].
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

// Image -> one flat embedding (the FID role).
class VectorExtractor {
 public:
  virtual ~VectorExtractor() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::vector<double> extract(const RasterImage& img) const = 0;
};

// Image -> per-layer feature maps, with per-layer, per-channel weights (the
// LPIPS role).
class LayerExtractor {
 public:
  virtual ~LayerExtractor() = default;
  virtual std::string name() const = 0;
  virtual const std::vector<std::vector<double>>& layer_weights() const = 0;
  virtual std::vector<FeatureMap> extract(const RasterImage& img) const = 0;
};

// Mean colour over a grid x grid tiling plus per-channel standard deviation,
// scaled to [0,1]. Desk-scale stand-in for an Inception embedding.
class GridColorExtractor final : public VectorExtractor {
 public:
  explicit GridColorExtractor(int grid = 4);
  std::string name() const override { return "grid-color-" + std::to_string(dim()); }
  std::size_t dim() const override { return static_cast<std::size_t>(grid_ * grid_ * 3 + 3); }
  std::vector<double> extract(const RasterImage& img) const override;

 private:
  int grid_;
};

// One layer: the RGB values scaled to [0,1] at full resolution.
class IdentityLayerExtractor final : public LayerExtractor {
 public:
  explicit IdentityLayerExtractor(std::vector<double> weights = {1.0, 1.0, 1.0});
  std::string name() const override { return "identity"; }
  const std::vector<std::vector<double>>& layer_weights() const override { return weights_; }
  std::vector<FeatureMap> extract(const RasterImage& img) const override;

 private:
  std::vector<std::vector<double>> weights_;
};

// `levels` layers of 2x average-pooled colour-plus-gradient maps (5 channels:
// R, G, B in [-1,1] and horizontal/vertical luminance differences).
class PyramidLayerExtractor final : public LayerExtractor {
 public:
  explicit PyramidLayerExtractor(int levels = 3);
  std::string name() const override { return "pyramid-" + std::to_string(weights_.size()); }
  const std::vector<std::vector<double>>& layer_weights() const override { return weights_; }
  std::vector<FeatureMap> extract(const RasterImage& img) const override;

 private:
  std::vector<std::vector<double>> weights_;
};

// Feature dump file: little-endian header {magic "CAPF", version u32,
// count u64, dim u64} then count*dim float32, row-major.
struct FeatureDump {
  std::size_t dim = 0;
  std::vector<std::vector<double>> rows;
};

inline constexpr std::uint32_t kFeatureDumpVersion = 1;

FeatureDump read_feature_dump(const std::filesystem::path& path);
void write_feature_dump(const std::filesystem::path& path, const FeatureDump& dump);

}  // namespace capvton::metrics
