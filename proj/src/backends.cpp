#include "capvton/backends.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <deque>

#include "capvton/io.hpp"
#include "capvton/skin_tone.hpp"

namespace capvton {
namespace {

template <typename Fn>
auto guarded(const std::string& backend, Fn&& fn) {
  try {
    return fn();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBackendUnavailable, backend + ": " + e.what());
  }
}

void expect_size(const std::string& backend, Size got, Size want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::kContractViolation,
                backend + " returned a " + std::to_string(got.width) + "x" +
                    std::to_string(got.height) + " " + what + " for a " +
                    std::to_string(want.width) + "x" + std::to_string(want.height) + " input");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint8_t clamp_u8(long v) { return static_cast<std::uint8_t>(std::clamp(v, 0L, 255L)); }

int chebyshev(Rgb a, Rgb b) {
  return std::max({std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
}

int squared_distance(Rgb a, Rgb b) {
  const int dr = a.r - b.r, dg = a.g - b.g, db = a.b - b.b;
  return dr * dr + dg * dg + db * db;
}

// 4-connected components of `mask`; returns per-pixel component id (-1 off-mask)
// and the size of each component.
std::pair<std::vector<int>, std::vector<std::size_t>> components(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> comp(mask.size().area(), -1);
  std::vector<std::size_t> sizes;
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || comp[y * w + x] >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      sizes.push_back(0);
      comp[y * w + x] = id;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        ++sizes[id];
        const int nbr[4][2] = {{cx + 1, cy}, {cx - 1, cy}, {cx, cy + 1}, {cx, cy - 1}};
        for (auto [nx, ny] : nbr) {
          if (mask.contains(nx, ny) && comp[ny * w + nx] < 0) {
            comp[ny * w + nx] = id;
            queue.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return {std::move(comp), std::move(sizes)};
}

}  // namespace

// ---- dispatch ----------------------------------------------------------------

ParseMap run_parser(ParserBackend& backend, const RasterImage& img) {
  ParseMap out = guarded(backend.name(), [&] { return backend.parse(img); });
  expect_size(backend.name(), out.size(), img.size(), "parse map");
  return out;
}

PoseSkeleton run_pose(PoseBackend& backend, const RasterImage& img) {
  return guarded(backend.name(), [&] { return backend.estimate(img); });
}

RasterImage run_inpaint(InpaintBackend& backend, const InpaintRequest& request) {
  require_same_size(request.image.size(), request.mask.size(), "inpaint image/mask");
  if (request.steps < 1) throw Error(ErrorCode::kInvalidArgument, "inpaint steps must be >= 1");
  RasterImage out = guarded(backend.name(), [&] { return backend.inpaint(request); });
  expect_size(backend.name(), out.size(), request.image.size(), "image");
  return out;
}

RasterImage run_tryon(TryOnBackend& backend, const TryOnRequest& request) {
  require_same_size(request.person.size(), request.mask.size(), "try-on person/mask");
  if (request.garment.empty()) throw Error(ErrorCode::kInvalidArgument, "empty garment image");
  RasterImage out = guarded(backend.name(), [&] { return backend.synthesize(request); });
  expect_size(backend.name(), out.size(), request.person.size(), "image");
  return out;
}

// ---- sidecars ----------------------------------------------------------------

void SidecarRegistry::add_parse(const RasterImage& img, std::filesystem::path parse_png) {
  parses_[fingerprint(img)] = std::move(parse_png);
}

void SidecarRegistry::add_pose(const RasterImage& img, std::filesystem::path pose_json) {
  poses_[fingerprint(img)] = std::move(pose_json);
}

const std::filesystem::path* SidecarRegistry::parse_for(const RasterImage& img) const {
  auto it = parses_.find(fingerprint(img));
  return it == parses_.end() ? nullptr : &it->second;
}

const std::filesystem::path* SidecarRegistry::pose_for(const RasterImage& img) const {
  auto it = poses_.find(fingerprint(img));
  return it == poses_.end() ? nullptr : &it->second;
}

SidecarParser::SidecarParser(std::unique_ptr<ParserBackend> inner,
                             std::shared_ptr<const SidecarRegistry> registry)
    : inner_(std::move(inner)), registry_(std::move(registry)) {
  if (!inner_) throw Error(ErrorCode::kInvalidArgument, "sidecar parser needs an inner backend");
}

std::string SidecarParser::name() const { return "sidecar+" + inner_->name(); }

ParseMap SidecarParser::parse(const RasterImage& img) {
  if (registry_) {
    if (const auto* path = registry_->parse_for(img)) return io::read_parse(*path, inner_->schema());
  }
  return inner_->parse(img);
}

SidecarPose::SidecarPose(std::unique_ptr<PoseBackend> inner,
                         std::shared_ptr<const SidecarRegistry> registry)
    : inner_(std::move(inner)), registry_(std::move(registry)) {}

std::string SidecarPose::name() const {
  return inner_ ? "sidecar+" + inner_->name() : "sidecar-pose";
}

PoseSkeleton SidecarPose::estimate(const RasterImage& img) {
  if (registry_) {
    if (const auto* path = registry_->pose_for(img)) return io::read_pose(*path);
  }
  if (!inner_) {
    throw Error(ErrorCode::kBackendUnavailable,
                "no pose sidecar registered for this image and no pose estimator configured");
  }
  return inner_->estimate(img);
}

// ---- palette parser ----------------------------------------------------------

PaletteParser::PaletteParser(std::vector<PaletteEntry> palette, LabelSchema schema, int tolerance)
    : palette_(std::move(palette)), schema_(std::move(schema)), tolerance_(tolerance) {
  if (palette_.empty()) throw Error(ErrorCode::kInvalidArgument, "palette parser needs colours");
  for (const auto& e : palette_) {
    if (!schema_.has(e.label)) {
      throw Error(ErrorCode::kInvalidArgument, "palette label " + std::to_string(e.label) +
                                                   " missing from schema");
    }
  }
}

std::vector<PaletteEntry> PaletteParser::fixture_palette() {
  return {
      {{250, 250, 250}, 0},  // background
      {{45, 30, 20}, 2},     // hair
      {{224, 172, 140}, 13}, // face
      {{208, 158, 126}, 10}, // neck
      {{40, 70, 160}, 5},    // upper-clothes
      {{150, 40, 90}, 6},    // dress
      {{90, 90, 60}, 7},     // coat
      {{60, 60, 70}, 9},     // pants
      {{120, 80, 40}, 12},   // skirt
      {{214, 164, 132}, 14}, // left-arm
      {{212, 162, 130}, 15}, // right-arm
      {{200, 150, 118}, 16}, // left-leg
      {{198, 148, 116}, 17}, // right-leg
  };
}

ParseMap PaletteParser::parse(const RasterImage& img) {
  const int w = img.width(), h = img.height();
  const auto face = schema_.id(labels::kFace);
  const auto left_arm = schema_.id(labels::kLeftArm);
  const auto right_arm = schema_.id(labels::kRightArm);
  const SkinBox box;

  std::vector<std::uint8_t> lab(img.size().area());
  std::vector<std::uint8_t> unmatched_skin(img.size().area(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb c = img.at(x, y);
      const PaletteEntry* best = nullptr;
      int best_d = INT_MAX;
      bool matched = false;
      for (const auto& e : palette_) {
        if (chebyshev(c, e.color) <= tolerance_) {
          best = &e;
          matched = true;
          break;
        }
        if (int d = squared_distance(c, e.color); d < best_d) {
          best_d = d;
          best = &e;
        }
      }
      lab[y * w + x] = static_cast<std::uint8_t>(best->label);
      if (!matched && box.contains(to_ycrcb(c))) unmatched_skin[y * w + x] = 1;
    }
  }

  // Locate the face: largest connected face component, centroid column.
  double face_cx = w / 2.0;
  int main_face = -1;
  std::vector<int> face_comp;
  if (face) {
    std::vector<std::uint8_t> bits(lab.size());
    for (std::size_t i = 0; i < lab.size(); ++i) bits[i] = lab[i] == *face ? 1 : 0;
    auto [comp, sizes] = components(BinaryMask(w, h, std::move(bits)));
    if (!sizes.empty()) {
      // Prefer components bordering hair; restored arm skin can outgrow the face.
      const auto hair = schema_.id(labels::kHair);
      std::vector<std::size_t> score = sizes;
      if (hair) {
        std::vector<char> touches(sizes.size(), 0);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const int c = comp[y * w + x];
            if (c < 0 || touches[c]) continue;
            const int nbr[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
            for (auto [nx, ny] : nbr) {
              if (nx >= 0 && ny >= 0 && nx < w && ny < h && lab[ny * w + nx] == *hair) touches[c] = 1;
            }
          }
        }
        if (std::find(touches.begin(), touches.end(), 1) != touches.end()) {
          for (std::size_t c = 0; c < sizes.size(); ++c) score[c] = touches[c] ? sizes[c] : 0;
        }
      }
      main_face = static_cast<int>(std::max_element(score.begin(), score.end()) - score.begin());
      double sx = 0;
      std::size_t n = 0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (comp[y * w + x] == main_face) sx += x, ++n;
        }
      }
      face_cx = sx / static_cast<double>(n);
    }
    face_comp = std::move(comp);
  }

  if (left_arm && right_arm) {
    // The person's right arm appears on the image's left.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const bool stray_face = face && lab[i] == *face && face_comp[i] != main_face;
        if (stray_face || unmatched_skin[i]) {
          lab[i] = static_cast<std::uint8_t>(x < face_cx ? *right_arm : *left_arm);
        }
      }
    }
  }
  return ParseMap(w, h, std::move(lab), schema_);
}

// ---- stub inpainter / try-on -------------------------------------------------

int hashed_jitter(std::uint64_t seed, int x, int y, int channel, int amplitude) {
  if (amplitude <= 0) return 0;
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32 |
                          static_cast<std::uint32_t>(y)));
  key = splitmix64(key ^ static_cast<std::uint64_t>(channel));
  const std::uint64_t span = 2 * static_cast<std::uint64_t>(amplitude) + 1;
  return static_cast<int>(key % span) - amplitude;
}

StubSkinInpainter::StubSkinInpainter(Rgb base_tone, int jitter)
    : base_tone_(base_tone), jitter_(jitter) {
  if (jitter < 0) throw Error(ErrorCode::kInvalidArgument, "jitter amplitude must be >= 0");
}

RasterImage StubSkinInpainter::inpaint(const InpaintRequest& request) {
  RasterImage out = request.image;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!request.mask.at(x, y)) continue;
      out.set(x, y,
              {clamp_u8(base_tone_.r + hashed_jitter(request.seed, x, y, 0, jitter_)),
               clamp_u8(base_tone_.g + hashed_jitter(request.seed, x, y, 1, jitter_)),
               clamp_u8(base_tone_.b + hashed_jitter(request.seed, x, y, 2, jitter_))});
    }
  }
  return out;
}

StubTryOn::StubTryOn(std::string name, double mix, int jitter)
    : name_(std::move(name)), mix_(mix), jitter_(jitter) {
  if (!(mix >= 0.0 && mix <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "mix must be in [0,1]");
  if (jitter < 0) throw Error(ErrorCode::kInvalidArgument, "jitter amplitude must be >= 0");
}

RasterImage StubTryOn::synthesize(const TryOnRequest& request) {
  RasterImage out = request.person;
  const BinaryMask& m = request.mask;
  int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return out;
  const RasterImage pasted = resize_nearest(request.garment, x1 - x0 + 1, y1 - y0 + 1);
  const Rgb backdrop = request.garment.at(0, 0);
  auto mixch = [this](std::uint8_t person, std::uint8_t garment, int jitter) {
    return clamp_u8(std::lround(mix_ * garment + (1.0 - mix_) * person) + jitter);
  };
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (!m.at(x, y)) continue;
      const Rgb p = request.person.at(x, y);
      const Rgb g = pasted.at(x - x0, y - y0);
      if (chebyshev(g, backdrop) <= kBackdropTolerance) continue;
      out.set(x, y,
              {mixch(p.r, g.r, hashed_jitter(request.seed, x, y, 0, jitter_)),
               mixch(p.g, g.g, hashed_jitter(request.seed, x, y, 1, jitter_)),
               mixch(p.b, g.b, hashed_jitter(request.seed, x, y, 2, jitter_))});
    }
  }
  return out;
}

TryOnBackend& BackendSet::synthesizer(const std::string& id) const {
  auto it = synthesizers.find(id);
  if (it == synthesizers.end() || !it->second) {
    throw Error(ErrorCode::kInvalidArgument, "no synthesizer configured under '" + id + "'");
  }
  return *it->second;
}

}  // namespace capvton
