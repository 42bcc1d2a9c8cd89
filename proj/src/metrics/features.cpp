#include "capvton/metrics/features.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "capvton/error.hpp"
#include "capvton/io.hpp"

namespace capvton::metrics {
namespace {

constexpr char kMagic[4] = {'C', 'A', 'P', 'F'};

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

FeatureMap rgb_map(const RasterImage& img, double scale, double offset) {
  FeatureMap m{3, img.height(), img.width(), {}};
  m.data.resize(3 * img.size().area());
  const std::size_t plane = img.size().area();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb c = img.at(x, y);
      const std::size_t i = static_cast<std::size_t>(y) * img.width() + x;
      m.data[i] = c.r * scale + offset;
      m.data[plane + i] = c.g * scale + offset;
      m.data[2 * plane + i] = c.b * scale + offset;
    }
  }
  return m;
}

FeatureMap pool2(const FeatureMap& in) {
  FeatureMap out{in.channels, in.height / 2, in.width / 2, {}};
  out.data.resize(static_cast<std::size_t>(out.channels) * out.height * out.width);
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const double s = in.at(c, 2 * y, 2 * x) + in.at(c, 2 * y, 2 * x + 1) +
                         in.at(c, 2 * y + 1, 2 * x) + in.at(c, 2 * y + 1, 2 * x + 1);
        out.data[(static_cast<std::size_t>(c) * out.height + y) * out.width + x] = s / 4.0;
      }
    }
  }
  return out;
}

// RGB in [-1,1] plus forward luminance differences.
FeatureMap with_gradients(const FeatureMap& rgb) {
  FeatureMap out{5, rgb.height, rgb.width, rgb.data};
  const std::size_t plane = static_cast<std::size_t>(rgb.height) * rgb.width;
  out.data.resize(5 * plane, 0.0);
  auto lum = [&](int y, int x) {
    return 0.299 * rgb.at(0, y, x) + 0.587 * rgb.at(1, y, x) + 0.114 * rgb.at(2, y, x);
  };
  for (int y = 0; y < rgb.height; ++y) {
    for (int x = 0; x < rgb.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * rgb.width + x;
      if (x + 1 < rgb.width) out.data[3 * plane + i] = lum(y, x + 1) - lum(y, x);
      if (y + 1 < rgb.height) out.data[4 * plane + i] = lum(y + 1, x) - lum(y, x);
    }
  }
  return out;
}

}  // namespace

GridColorExtractor::GridColorExtractor(int grid) : grid_(grid) {
  if (grid < 1) throw Error(ErrorCode::kInvalidArgument, "grid must be >= 1");
}

std::vector<double> GridColorExtractor::extract(const RasterImage& img) const {
  if (img.width() < grid_ || img.height() < grid_) {
    throw Error(ErrorCode::kExtractorContractViolation,
                "image smaller than the " + std::to_string(grid_) + "x" + std::to_string(grid_) +
                    " feature grid");
  }
  std::vector<double> out(dim(), 0.0);
  std::array<double, 3> sum{}, sum2{};
  for (int gy = 0; gy < grid_; ++gy) {
    const int y0 = gy * img.height() / grid_, y1 = (gy + 1) * img.height() / grid_;
    for (int gx = 0; gx < grid_; ++gx) {
      const int x0 = gx * img.width() / grid_, x1 = (gx + 1) * img.width() / grid_;
      std::array<double, 3> cell{};
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const Rgb c = img.at(x, y);
          const double v[3] = {c.r / 255.0, c.g / 255.0, c.b / 255.0};
          for (int k = 0; k < 3; ++k) {
            cell[k] += v[k];
            sum[k] += v[k];
            sum2[k] += v[k] * v[k];
          }
        }
      }
      const double n = static_cast<double>((y1 - y0) * (x1 - x0));
      for (int k = 0; k < 3; ++k) out[(gy * grid_ + gx) * 3 + k] = cell[k] / n;
    }
  }
  const double n = static_cast<double>(img.size().area());
  for (int k = 0; k < 3; ++k) {
    const double mean = sum[k] / n;
    out[grid_ * grid_ * 3 + k] = std::sqrt(std::max(0.0, sum2[k] / n - mean * mean));
  }
  return out;
}

IdentityLayerExtractor::IdentityLayerExtractor(std::vector<double> weights)
    : weights_{std::move(weights)} {
  if (weights_[0].size() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "identity extractor takes 3 channel weights");
  }
}

std::vector<FeatureMap> IdentityLayerExtractor::extract(const RasterImage& img) const {
  return {rgb_map(img, 1.0 / 255.0, 0.0)};
}

PyramidLayerExtractor::PyramidLayerExtractor(int levels) {
  if (levels < 1) throw Error(ErrorCode::kInvalidArgument, "pyramid needs >= 1 level");
  for (int l = 0; l < levels; ++l) weights_.push_back(std::vector<double>(5, 1.0));
}

std::vector<FeatureMap> PyramidLayerExtractor::extract(const RasterImage& img) const {
  const int levels = static_cast<int>(weights_.size());
  const int min_side = 1 << (levels - 1);
  if (img.width() < min_side || img.height() < min_side) {
    throw Error(ErrorCode::kExtractorContractViolation,
                "image too small for a " + std::to_string(levels) + "-level pyramid");
  }
  std::vector<FeatureMap> out;
  FeatureMap rgb = rgb_map(img, 1.0 / 127.5, -1.0);
  for (int l = 0; l < levels; ++l) {
    if (l > 0) rgb = pool2(rgb);
    out.push_back(with_gradients(rgb));
  }
  return out;
}

FeatureDump read_feature_dump(const std::filesystem::path& path) {
  const std::string bytes = io::read_text(path);
  constexpr std::size_t kHeader = 4 + 4 + 8 + 8;
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kFormatError, path.string() + ": not a CAPF feature dump");
  }
  const auto version = get_le(bytes, 4, 4);
  if (version != kFeatureDumpVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported feature dump version " + std::to_string(version));
  }
  const std::uint64_t count = get_le(bytes, 8, 8);
  const std::uint64_t dim = get_le(bytes, 16, 8);
  if (dim == 0 || count > (bytes.size() - kHeader) / 4 / dim ||
      bytes.size() != kHeader + count * dim * 4) {
    throw Error(ErrorCode::kFormatError, "feature dump size does not match its header");
  }
  FeatureDump dump{dim, std::vector<std::vector<double>>(count, std::vector<double>(dim))};
  std::size_t pos = kHeader;
  for (auto& row : dump.rows) {
    for (auto& v : row) {
      v = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes, pos, 4)));
      pos += 4;
    }
  }
  return dump;
}

void write_feature_dump(const std::filesystem::path& path, const FeatureDump& dump) {
  std::string out(kMagic, 4);
  put_le(out, kFeatureDumpVersion, 4);
  put_le(out, dump.rows.size(), 8);
  put_le(out, dump.dim, 8);
  for (const auto& row : dump.rows) {
    if (row.size() != dump.dim) {
      throw Error(ErrorCode::kDimensionMismatch, "feature row length differs from dump dim");
    }
    for (double v : row) put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
  }
  io::write_text_atomic(path, out);
}

}  // namespace capvton::metrics
