#pragma once

#include <vector>

#include "capvton/image.hpp"

namespace capvton::metrics {

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(int size, double sigma);

// Mean of the local SSIM map over every full window position ("valid"
// region) of every channel. Both images must share dimensions and be at least
// one window in each direction.
double ssim(const RasterImage& x, const RasterImage& y, const SsimParams& params = {});

}  // namespace capvton::metrics
