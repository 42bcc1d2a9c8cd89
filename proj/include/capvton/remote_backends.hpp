#pragma once

#include <map>
#include <memory>
#include <string>

#include "capvton/backends.hpp"

namespace capvton {

// What a remote call carries: named binary inputs (PNG images/masks, the pose
// document) plus scalar fields. The reply is the raw output file.
struct RemotePayload {
  std::string role;
  std::map<std::string, std::string> files;
  std::map<std::string, std::string> fields;
  // Extension of the expected reply ("png" or "json").
  std::string output_ext = "png";
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string describe() const = 0;
  virtual std::string invoke(const RemotePayload& payload) = 0;
};

// Runs `command_template` through /bin/sh once per call inside a fresh temp
// directory. Placeholders: {image} {mask} {pose} {garment} (input paths, when
// present), {output}, {workdir}, {request} (a JSON echo of all fields), and
// each field by name ({prompt} {steps} {seed} {category}). Substituted values
// are single-quoted. A non-zero exit, a timeout or a missing output file is
// BackendUnavailable.
std::unique_ptr<Transport> make_process_transport(std::string command_template,
                                                  double timeout_s);

// POSTs multipart/form-data (one part per file, one per field) to `url`; a
// 200 reply body is the output file.
std::unique_ptr<Transport> make_http_transport(std::string url, double timeout_s);

class RemoteParser final : public ParserBackend {
 public:
  RemoteParser(std::unique_ptr<Transport> transport, LabelSchema schema);
  std::string name() const override { return "remote-parser(" + transport_->describe() + ")"; }
  const LabelSchema& schema() const override { return schema_; }
  ParseMap parse(const RasterImage& img) override;

 private:
  std::unique_ptr<Transport> transport_;
  LabelSchema schema_;
};

class RemotePose final : public PoseBackend {
 public:
  explicit RemotePose(std::unique_ptr<Transport> transport) : transport_(std::move(transport)) {}
  std::string name() const override { return "remote-pose(" + transport_->describe() + ")"; }
  PoseSkeleton estimate(const RasterImage& img) override;

 private:
  std::unique_ptr<Transport> transport_;
};

class RemoteInpainter final : public InpaintBackend {
 public:
  explicit RemoteInpainter(std::unique_ptr<Transport> transport)
      : transport_(std::move(transport)) {}
  std::string name() const override { return "remote-inpainter(" + transport_->describe() + ")"; }
  RasterImage inpaint(const InpaintRequest& request) override;

 private:
  std::unique_ptr<Transport> transport_;
};

class RemoteTryOn final : public TryOnBackend {
 public:
  explicit RemoteTryOn(std::unique_ptr<Transport> transport) : transport_(std::move(transport)) {}
  std::string name() const override { return "remote-tryon(" + transport_->describe() + ")"; }
  RasterImage synthesize(const TryOnRequest& request) override;

 private:
  std::unique_ptr<Transport> transport_;
};

}  // namespace capvton
