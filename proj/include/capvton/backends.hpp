#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "capvton/image.hpp"
#include "capvton/parse_map.hpp"
#include "capvton/pose.hpp"
#include "capvton/types.hpp"

namespace capvton {

// ---- model roles -------------------------------------------------------------

class ParserBackend {
 public:
  virtual ~ParserBackend() = default;
  virtual std::string name() const = 0;
  virtual const LabelSchema& schema() const = 0;
  virtual ParseMap parse(const RasterImage& img) = 0;
};

class PoseBackend {
 public:
  virtual ~PoseBackend() = default;
  virtual std::string name() const = 0;
  virtual PoseSkeleton estimate(const RasterImage& img) = 0;
};

struct InpaintRequest {
  const RasterImage& image;
  const BinaryMask& mask;
  // Conditioning skeleton; rendering it for a pose ControlNet is the adapter's job.
  const PoseSkeleton& pose;
  std::string prompt;
  int steps = 30;
  std::uint64_t seed = 0;
};

class InpaintBackend {
 public:
  virtual ~InpaintBackend() = default;
  virtual std::string name() const = 0;
  virtual RasterImage inpaint(const InpaintRequest& request) = 0;
};

struct TryOnRequest {
  const RasterImage& person;
  const RasterImage& garment;
  const BinaryMask& mask;
  const PoseSkeleton& pose;
  GarmentCategory category = GarmentCategory::kUpper;
  std::uint64_t seed = 0;
};

class TryOnBackend {
 public:
  virtual ~TryOnBackend() = default;
  virtual std::string name() const = 0;
  virtual RasterImage synthesize(const TryOnRequest& request) = 0;
};

// ---- contract-checking dispatch ---------------------------------------------
// Non-Error exceptions from a backend surface as BackendUnavailable; results
// breaking the role contract raise ContractViolation.

ParseMap run_parser(ParserBackend& backend, const RasterImage& img);
PoseSkeleton run_pose(PoseBackend& backend, const RasterImage& img);
RasterImage run_inpaint(InpaintBackend& backend, const InpaintRequest& request);
RasterImage run_tryon(TryOnBackend& backend, const TryOnRequest& request);

// ---- precomputed sidecars ----------------------------------------------------

// Maps image fingerprints to precomputed parse/pose files (dataset
// image-parse-v3/ and openpose_json/ entries, or CLI --parse/--pose). Built
// before workers start, read-only afterwards.
class SidecarRegistry {
 public:
  void add_parse(const RasterImage& img, std::filesystem::path parse_png);
  void add_pose(const RasterImage& img, std::filesystem::path pose_json);

  const std::filesystem::path* parse_for(const RasterImage& img) const;
  const std::filesystem::path* pose_for(const RasterImage& img) const;

 private:
  std::map<std::uint64_t, std::filesystem::path> parses_;
  std::map<std::uint64_t, std::filesystem::path> poses_;
};

// Returns the registered parse when the image has one, else asks `inner`.
class SidecarParser final : public ParserBackend {
 public:
  SidecarParser(std::unique_ptr<ParserBackend> inner,
                std::shared_ptr<const SidecarRegistry> registry);
  std::string name() const override;
  const LabelSchema& schema() const override { return inner_->schema(); }
  ParseMap parse(const RasterImage& img) override;

 private:
  std::unique_ptr<ParserBackend> inner_;
  std::shared_ptr<const SidecarRegistry> registry_;
};

// Registered pose when available, else `inner`; with no inner backend an
// unregistered image is BackendUnavailable.
class SidecarPose final : public PoseBackend {
 public:
  SidecarPose(std::unique_ptr<PoseBackend> inner, std::shared_ptr<const SidecarRegistry> registry);
  std::string name() const override;
  PoseSkeleton estimate(const RasterImage& img) override;

 private:
  std::unique_ptr<PoseBackend> inner_;
  std::shared_ptr<const SidecarRegistry> registry_;
};

// ---- deterministic stubs -----------------------------------------------------

struct PaletteEntry {
  Rgb color;
  int label = 0;
};

// Colour-keyed parser for painted fixtures. A pixel takes the label of a
// palette colour within `tolerance` (per channel). Unmatched pixels that pass
// the YCrCb skin test become arm skin, others take the nearest palette colour.
// The face is the largest face-coloured component bordering hair (the
// largest overall when none does). Face-labelled pixels outside it are re-assigned to
// the arm on their side of the face, which is how freshly inpainted,
// face-toned arm skin gets parsed.
class PaletteParser final : public ParserBackend {
 public:
  PaletteParser(std::vector<PaletteEntry> palette, LabelSchema schema, int tolerance = 0);
  // Colours the fixture generator paints with, over the VITON default schema.
  static std::vector<PaletteEntry> fixture_palette();

  std::string name() const override { return "stub-palette-parser"; }
  const LabelSchema& schema() const override { return schema_; }
  ParseMap parse(const RasterImage& img) override;

 private:
  std::vector<PaletteEntry> palette_;
  LabelSchema schema_;
  int tolerance_;
};

// Fills masked pixels with `base_tone` plus per-pixel jitter in
// [-jitter, jitter] derived from (seed, x, y, channel) by hashing, so the
// result is independent of evaluation order. Unmasked pixels are returned as-is.
class StubSkinInpainter final : public InpaintBackend {
 public:
  explicit StubSkinInpainter(Rgb base_tone = {180, 140, 120}, int jitter = 0);
  std::string name() const override { return "stub-skin-inpainter"; }
  RasterImage inpaint(const InpaintRequest& request) override;

 private:
  Rgb base_tone_;
  int jitter_;
};

// Pastes the garment, stretched over the mask's bounding box, into masked
// pixels, mixed with the person pixel by `mix`. Garment pixels within
// kBackdropTolerance of the garment image's top-left colour count as backdrop
// and leave the person pixel in place, so whatever the person shows under the
// mask outside the garment's shape (skin, or an old sleeve) survives.
inline constexpr int kBackdropTolerance = 8;

class StubTryOn final : public TryOnBackend {
 public:
  explicit StubTryOn(std::string name = "stub-tryon", double mix = 1.0, int jitter = 0);
  std::string name() const override { return name_; }
  RasterImage synthesize(const TryOnRequest& request) override;

 private:
  std::string name_;
  double mix_;
  int jitter_;
};

// Deterministic jitter in [-amplitude, amplitude].
int hashed_jitter(std::uint64_t seed, int x, int y, int channel, int amplitude);

// ---- backend sets ------------------------------------------------------------

// One worker's backends. Not shared between threads.
struct BackendSet {
  std::unique_ptr<ParserBackend> parser;
  std::unique_ptr<PoseBackend> pose;
  std::unique_ptr<InpaintBackend> inpainter;
  std::map<std::string, std::unique_ptr<TryOnBackend>> synthesizers;

  TryOnBackend& synthesizer(const std::string& id) const;
};

}  // namespace capvton
