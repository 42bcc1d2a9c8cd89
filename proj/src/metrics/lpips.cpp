#include "capvton/metrics/lpips.hpp"

#include <cmath>
#include <string>

#include "capvton/error.hpp"

namespace capvton::metrics {
namespace {

[[noreturn]] void contract(const std::string& what) {
  throw Error(ErrorCode::kExtractorContractViolation, what);
}

void check_layer(const FeatureMap& m, std::size_t channels, std::size_t layer) {
  if (m.channels <= 0 || m.height <= 0 || m.width <= 0 ||
      m.data.size() != static_cast<std::size_t>(m.channels) * m.height * m.width) {
    contract("layer " + std::to_string(layer) + " has an inconsistent shape");
  }
  if (static_cast<std::size_t>(m.channels) != channels) {
    contract("layer " + std::to_string(layer) + " has " + std::to_string(m.channels) +
             " channels but " + std::to_string(channels) + " weights");
  }
}

}  // namespace

double lpips_distance(const std::vector<FeatureMap>& fx, const std::vector<FeatureMap>& fy,
                      const std::vector<std::vector<double>>& weights) {
  if (fx.size() != fy.size() || fx.size() != weights.size()) {
    contract("layer counts differ between images and weights");
  }
  double total = 0.0;
  for (std::size_t l = 0; l < fx.size(); ++l) {
    const FeatureMap& a = fx[l];
    const FeatureMap& b = fy[l];
    const auto& w = weights[l];
    check_layer(a, w.size(), l);
    check_layer(b, w.size(), l);
    if (a.height != b.height || a.width != b.width) contract("layer shapes differ between images");

    double layer_sum = 0.0;
    for (int y = 0; y < a.height; ++y) {
      for (int x = 0; x < a.width; ++x) {
        double na = 0.0, nb = 0.0;
        for (int c = 0; c < a.channels; ++c) {
          na += a.at(c, y, x) * a.at(c, y, x);
          nb += b.at(c, y, x) * b.at(c, y, x);
        }
        na = std::sqrt(na) + kLpipsNormEps;
        nb = std::sqrt(nb) + kLpipsNormEps;
        double d2 = 0.0;
        for (int c = 0; c < a.channels; ++c) {
          const double d = w[c] * (a.at(c, y, x) / na - b.at(c, y, x) / nb);
          d2 += d * d;
        }
        layer_sum += d2;
      }
    }
    total += layer_sum / (static_cast<double>(a.height) * a.width);
  }
  return total;
}

double lpips(const RasterImage& x, const RasterImage& y, const LayerExtractor& extractor) {
  require_same_size(x.size(), y.size(), "LPIPS inputs");
  return lpips_distance(extractor.extract(x), extractor.extract(y), extractor.layer_weights());
}

}  // namespace capvton::metrics
