#include "capvton/metrics/ssim.hpp"

#include <cmath>
#include <string>

#include "capvton/error.hpp"

namespace capvton::metrics {
namespace {

// Valid-mode separable filtering of a w x h plane.
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h,
                                 const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int ow = w - k + 1, oh = h - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += taps[i] * in[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += taps[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

std::vector<double> gaussian_taps(int size, double sigma) {
  if (size < 1 || sigma <= 0.0) throw Error(ErrorCode::kInvalidArgument, "bad Gaussian window");
  std::vector<double> taps(size);
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    taps[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

double ssim(const RasterImage& x, const RasterImage& y, const SsimParams& params) {
  require_same_size(x.size(), y.size(), "SSIM inputs");
  const int w = x.width(), h = x.height();
  if (w < params.window || h < params.window) {
    throw Error(ErrorCode::kInvalidArgument, "SSIM needs images of at least " +
                                                 std::to_string(params.window) + " pixels a side");
  }
  const auto taps = gaussian_taps(params.window, params.sigma);
  const double c1 = params.c1(), c2 = params.c2();
  const std::size_t n = x.size().area();

  double total = 0.0;
  std::size_t positions = 0;
  std::vector<double> a(n), b(n), aa(n), bb(n), ab(n);
  for (int ch = 0; ch < 3; ++ch) {
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = x.data()[3 * i + ch];
      b[i] = y.data()[3 * i + ch];
      aa[i] = a[i] * a[i];
      bb[i] = b[i] * b[i];
      ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, w, h, taps);
    const auto mu_b = filter_valid(b, w, h, taps);
    const auto e_aa = filter_valid(aa, w, h, taps);
    const auto e_bb = filter_valid(bb, w, h, taps);
    const auto e_ab = filter_valid(ab, w, h, taps);
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
      const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
      total += num / den;
    }
    positions += mu_a.size();
  }
  return total / static_cast<double>(positions);
}

}  // namespace capvton::metrics
