#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "capvton/error.hpp"

namespace capvton {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

struct Size {
  int width = 0;
  int height = 0;

  bool operator==(const Size&) const = default;
  std::size_t area() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

// 8-bit interleaved RGB raster, row-major.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {});
  RasterImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }
  bool empty() const { return size_.area() == 0; }

  Rgb at(int x, int y) const {
    const std::uint8_t* p = &data_[offset(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    std::uint8_t* p = &data_[offset(x, y)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * size_.width + x) * 3;
  }

  Size size_;
  std::vector<std::uint8_t> data_;
};

// Per-pixel region indicator; true marks pixels to inpaint or replace.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v) { bits_[index(x, y)] = v ? 1 : 0; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < size_.width && y < size_.height && at(x, y);
  }

  std::size_t count() const;
  bool none() const { return count() == 0; }

  // One byte per pixel, each 0 or 1.
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * size_.width + x;
  }

  Size size_;
  std::vector<std::uint8_t> bits_;
};

void require_same_size(Size a, Size b, const char* what);

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersect(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_subtract(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_invert(const BinaryMask& m);
bool is_subset(const BinaryMask& sub, const BinaryMask& super);

// Chebyshev (square) dilation: a pixel is set iff some set pixel lies within
// max(|dx|,|dy|) <= radius. Runs in O(pixels) regardless of radius.
BinaryMask dilate(const BinaryMask& mask, int radius);

// Copies `source` pixels into `target` wherever `where` is false.
RasterImage copy_outside(const RasterImage& target, const RasterImage& source,
                         const BinaryMask& where);

// Nearest-neighbour resample.
RasterImage resize_nearest(const RasterImage& img, int width, int height);

// FNV-1a over dimensions and pixel bytes. Used to key precomputed sidecars and
// to record provenance in manifests.
std::uint64_t fingerprint(const RasterImage& img);
std::uint64_t fingerprint(const BinaryMask& mask);

}  // namespace capvton
