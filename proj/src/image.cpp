#include "capvton/image.hpp"

#include <algorithm>
#include <string>

namespace capvton {
namespace {

void check_dims(int width, int height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative image dimensions");
  }
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv_mix(std::uint64_t h, std::span<const std::uint8_t> bytes) {
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t fnv_mix_dims(std::uint64_t h, Size s) {
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(s.width),
                                 static_cast<std::uint32_t>(s.height)};
  return fnv_mix(h, std::span(reinterpret_cast<const std::uint8_t*>(dims), sizeof dims));
}

// 1-D "any set within radius" along one axis, via prefix counts.
void dilate_line(std::vector<int>& prefix, const std::uint8_t* in, std::size_t stride,
                 std::uint8_t* out, int n, int radius) {
  prefix.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (in[i * stride] ? 1 : 0);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - radius);
    const int hi = std::min(n, i + radius + 1);
    out[i * stride] = prefix[hi] - prefix[lo] > 0 ? 1 : 0;
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, Rgb fill) : size_{width, height} {
  check_dims(width, height);
  data_.resize(size_.area() * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> data)
    : size_{width, height}, data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != size_.area() * 3) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pixel buffer holds " + std::to_string(data_.size()) + " bytes, expected " +
                    std::to_string(size_.area() * 3));
  }
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : size_{width, height}, bits_(size_.area(), fill ? 1 : 0) {
  check_dims(width, height);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : size_{width, height}, bits_(std::move(bits)) {
  check_dims(width, height);
  if (bits_.size() != size_.area()) {
    throw Error(ErrorCode::kDimensionMismatch, "mask buffer size does not match dimensions");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

void require_same_size(Size a, Size b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": " + std::to_string(a.width) + "x" +
                    std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                    std::to_string(b.height));
  }
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op, const char* what) {
  require_same_size(a.size(), b.size(), what);
  std::vector<std::uint8_t> out(a.bits().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = op(a.bits()[i] != 0, b.bits()[i] != 0) ? 1 : 0;
  }
  return BinaryMask(a.width(), a.height(), std::move(out));
}

}  // namespace

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x || y; }, "mask union");
}

BinaryMask mask_intersect(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x && y; }, "mask intersection");
}

BinaryMask mask_subtract(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x && !y; }, "mask subtraction");
}

BinaryMask mask_invert(const BinaryMask& m) {
  std::vector<std::uint8_t> out(m.bits().begin(), m.bits().end());
  for (auto& b : out) b = b ? 0 : 1;
  return BinaryMask(m.width(), m.height(), std::move(out));
}

bool is_subset(const BinaryMask& sub, const BinaryMask& super) {
  require_same_size(sub.size(), super.size(), "mask subset test");
  for (std::size_t i = 0; i < sub.bits().size(); ++i) {
    if (sub.bits()[i] && !super.bits()[i]) return false;
  }
  return true;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius < 0) throw Error(ErrorCode::kInvalidArgument, "dilation radius must be >= 0");
  if (radius == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> tmp(mask.bits().size());
  std::vector<std::uint8_t> out(mask.bits().size());
  std::vector<int> prefix;
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    dilate_line(prefix, mask.bits().data() + row, 1, tmp.data() + row, w, radius);
  }
  for (int x = 0; x < w; ++x) {
    dilate_line(prefix, tmp.data() + x, static_cast<std::size_t>(w), out.data() + x, h, radius);
  }
  return BinaryMask(w, h, std::move(out));
}

RasterImage copy_outside(const RasterImage& target, const RasterImage& source,
                         const BinaryMask& where) {
  require_same_size(target.size(), source.size(), "copy-back images");
  require_same_size(target.size(), where.size(), "copy-back mask");
  RasterImage out = target;
  auto dst = out.data();
  auto src = source.data();
  auto bits = where.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) continue;
    dst[3 * i] = src[3 * i];
    dst[3 * i + 1] = src[3 * i + 1];
    dst[3 * i + 2] = src[3 * i + 2];
  }
  return out;
}

RasterImage resize_nearest(const RasterImage& img, int width, int height) {
  if (img.size() == Size{width, height}) return img;
  if (img.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot resize an empty image");
  RasterImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(img.height() - 1,
                            static_cast<int>((static_cast<long long>(y) * img.height()) / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(img.width() - 1,
                              static_cast<int>((static_cast<long long>(x) * img.width()) / width));
      out.set(x, y, img.at(sx, sy));
    }
  }
  return out;
}

std::uint64_t fingerprint(const RasterImage& img) {
  return fnv_mix(fnv_mix_dims(kFnvOffset, img.size()), img.data());
}

std::uint64_t fingerprint(const BinaryMask& mask) {
  return fnv_mix(fnv_mix_dims(kFnvOffset ^ 0x6d61736bULL, mask.size()), mask.bits());
}

}  // namespace capvton
