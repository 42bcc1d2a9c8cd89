#pragma once

#include <vector>

#include "capvton/image.hpp"

namespace capvton {

// BT.601 full-range (JFIF) coefficients. Chroma is offset by 128.
namespace bt601 {
inline constexpr double kYr = 0.299;
inline constexpr double kYg = 0.587;
inline constexpr double kYb = 0.114;
inline constexpr double kCrR = 0.5;
inline constexpr double kCrG = -0.418688;
inline constexpr double kCrB = -0.081312;
inline constexpr double kCbR = -0.168736;
inline constexpr double kCbG = -0.331264;
inline constexpr double kCbB = 0.5;
inline constexpr double kRCr = 1.402;
inline constexpr double kGCb = -0.344136;
inline constexpr double kGCr = -0.714136;
inline constexpr double kBCb = 1.772;
inline constexpr double kChromaOffset = 128.0;
}  // namespace bt601

struct YCrCb {
  double y = 0.0;
  double cr = 0.0;
  double cb = 0.0;
};

// H in degrees [0,360); S, V in [0,1]. Achromatic pixels carry H = 0.
struct Hsv {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

YCrCb to_ycrcb(Rgb c);
// Rounds and clamps to 8 bits.
Rgb from_ycrcb(const YCrCb& c);

Hsv to_hsv(Rgb c);
Rgb from_hsv(const Hsv& c);

struct YCrCbPlanes {
  Size size;
  std::vector<double> y;
  std::vector<double> cr;
  std::vector<double> cb;
};

struct HsvPlanes {
  Size size;
  std::vector<double> h;
  std::vector<double> s;
  std::vector<double> v;
};

YCrCbPlanes rgb_to_ycrcb(const RasterImage& img);
HsvPlanes rgb_to_hsv(const RasterImage& img);

}  // namespace capvton
