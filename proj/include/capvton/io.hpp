#pragma once

#include <filesystem>
#include <string>

#include "capvton/image.hpp"
#include "capvton/parse_map.hpp"
#include "capvton/pose.hpp"

namespace capvton::io {

namespace fs = std::filesystem;

// PNG or baseline JPEG, detected by signature. Grayscale/paletted inputs are
// expanded to RGB, 16-bit is reduced to 8, alpha is dropped.
RasterImage read_image(const fs::path& path);
void write_png(const fs::path& path, const RasterImage& img);
std::string encode_png(const RasterImage& img);
RasterImage decode_image(const std::string& bytes);

// Single-channel 8-bit PNG holding exactly 0 and 255.
BinaryMask read_mask(const fs::path& path);
void write_mask(const fs::path& path, const BinaryMask& mask);
std::string encode_mask_png(const BinaryMask& mask);
BinaryMask decode_mask(const std::string& bytes);

// Label schema sidecar: one "id = name" per line, '#' starts a comment.
LabelSchema parse_label_schema(const std::string& text);
std::string format_label_schema(const LabelSchema& schema);
LabelSchema read_label_schema(const fs::path& path);
void write_label_schema(const fs::path& path, const LabelSchema& schema);
// "<dir>/<stem>.labels.txt", falling back to "<dir>/labels.txt".
fs::path schema_sidecar_path(const fs::path& parse_png);

// Paletted (or 8-bit gray) PNG whose pixel values are label ids. The schema is
// taken from the sidecar when present, else `fallback`.
ParseMap read_parse(const fs::path& path,
                    const LabelSchema& fallback = LabelSchema::viton_default());
void write_parse(const fs::path& path, const ParseMap& parse, bool write_sidecar = true);
std::string encode_parse_png(const ParseMap& parse);
ParseMap decode_parse(const std::string& bytes, const LabelSchema& schema);

// OpenPose-style keypoint document: {"people":[{"pose_keypoints_2d":[54 numbers]}]}.
// A document with no people yields an all-zero-confidence skeleton.
PoseSkeleton parse_pose_json(const std::string& text);
std::string format_pose_json(const PoseSkeleton& pose);
PoseSkeleton read_pose(const fs::path& path);
void write_pose(const fs::path& path, const PoseSkeleton& pose);

std::string read_text(const fs::path& path);
// Writes via a temporary sibling and rename, so readers never see partial files.
void write_text_atomic(const fs::path& path, const std::string& text);

}  // namespace capvton::io
