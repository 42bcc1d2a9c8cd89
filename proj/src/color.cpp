#include "capvton/color.hpp"

#include <algorithm>
#include <cmath>

namespace capvton {
namespace {

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

YCrCb to_ycrcb(Rgb c) {
  using namespace bt601;
  const double r = c.r, g = c.g, b = c.b;
  return {kYr * r + kYg * g + kYb * b, kChromaOffset + kCrR * r + kCrG * g + kCrB * b,
          kChromaOffset + kCbR * r + kCbG * g + kCbB * b};
}

Rgb from_ycrcb(const YCrCb& c) {
  using namespace bt601;
  const double cr = c.cr - kChromaOffset;
  const double cb = c.cb - kChromaOffset;
  return {quantize(c.y + kRCr * cr), quantize(c.y + kGCb * cb + kGCr * cr),
          quantize(c.y + kBCb * cb)};
}

Hsv to_hsv(Rgb c) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double hi = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double chroma = hi - lo;
  Hsv out{0.0, 0.0, hi};
  if (hi <= 0.0 || chroma <= 0.0) return out;
  out.s = chroma / hi;
  double h;
  if (hi == r) {
    h = 60.0 * std::fmod((g - b) / chroma, 6.0);
  } else if (hi == g) {
    h = 60.0 * ((b - r) / chroma + 2.0);
  } else {
    h = 60.0 * ((r - g) / chroma + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

Rgb from_hsv(const Hsv& c) {
  const double s = std::clamp(c.s, 0.0, 1.0);
  const double v = std::clamp(c.v, 0.0, 1.0);
  double h = std::fmod(c.h, 360.0);
  if (h < 0.0) h += 360.0;
  const double chroma = v * s;
  const double hp = h / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = chroma, g = x; break;
    case 1: r = x, g = chroma; break;
    case 2: g = chroma, b = x; break;
    case 3: g = x, b = chroma; break;
    case 4: r = x, b = chroma; break;
    default: r = chroma, b = x; break;
  }
  const double m = v - chroma;
  return {quantize((r + m) * 255.0), quantize((g + m) * 255.0), quantize((b + m) * 255.0)};
}

YCrCbPlanes rgb_to_ycrcb(const RasterImage& img) {
  YCrCbPlanes out{img.size(), {}, {}, {}};
  const std::size_t n = img.size().area();
  out.y.resize(n);
  out.cr.resize(n);
  out.cb.resize(n);
  auto d = img.data();
  for (std::size_t i = 0; i < n; ++i) {
    const YCrCb c = to_ycrcb({d[3 * i], d[3 * i + 1], d[3 * i + 2]});
    out.y[i] = c.y;
    out.cr[i] = c.cr;
    out.cb[i] = c.cb;
  }
  return out;
}

HsvPlanes rgb_to_hsv(const RasterImage& img) {
  HsvPlanes out{img.size(), {}, {}, {}};
  const std::size_t n = img.size().area();
  out.h.resize(n);
  out.s.resize(n);
  out.v.resize(n);
  auto d = img.data();
  for (std::size_t i = 0; i < n; ++i) {
    const Hsv c = to_hsv({d[3 * i], d[3 * i + 1], d[3 * i + 2]});
    out.h[i] = c.h;
    out.s[i] = c.s;
    out.v[i] = c.v;
  }
  return out;
}

}  // namespace capvton
