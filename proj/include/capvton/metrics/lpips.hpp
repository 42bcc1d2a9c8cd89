#pragma once

#include <vector>

#include "capvton/image.hpp"
#include "capvton/metrics/features.hpp"

namespace capvton::metrics {

inline constexpr double kLpipsNormEps = 1e-10;

// sum_l 1/(H_l W_l) sum_{h,w} || w_l * (f^x_l(h,w) - f^y_l(h,w)) ||^2 with
// each feature vector f(h,w) scaled to unit length across channels.
double lpips_distance(const std::vector<FeatureMap>& fx, const std::vector<FeatureMap>& fy,
                      const std::vector<std::vector<double>>& weights);

double lpips(const RasterImage& x, const RasterImage& y, const LayerExtractor& extractor);

}  // namespace capvton::metrics
