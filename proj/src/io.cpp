#include "capvton/io.hpp"

#include <png.h>
#include <csetjmp>
#include <cstdio>
#include <jpeglib.h>

#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include "json.hpp"
#include <sstream>

namespace capvton::io {
namespace {

using json = nlohmann::json;

[[noreturn]] void format_error(const std::string& what) {
  throw Error(ErrorCode::kFormatError, what);
}

// ---- libpng plumbing ---------------------------------------------------------

struct PngReadBuffer {
  const std::string* bytes;
  std::size_t pos = 0;
};

void png_read_from_buffer(png_structp png, png_bytep out, png_size_t len) {
  auto* buf = static_cast<PngReadBuffer*>(png_get_io_ptr(png));
  if (buf->pos + len > buf->bytes->size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, buf->bytes->data() + buf->pos, len);
  buf->pos += len;
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), len);
}

void png_flush_noop(png_structp) {}

void png_throw(png_structp, png_const_charp msg) { format_error(std::string("PNG: ") + msg); }
void png_warn(png_structp, png_const_charp) {}

class PngReader {
 public:
  explicit PngReader(const std::string& bytes) : buffer_{&bytes} {
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8)) {
      format_error("not a PNG stream");
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_warn);
    info_ = png_create_info_struct(png_);
    png_set_read_fn(png_, &buffer_, png_read_from_buffer);
    png_read_info(png_, info_);
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }
  int width() const { return static_cast<int>(png_get_image_width(png_, info_)); }
  int height() const { return static_cast<int>(png_get_image_height(png_, info_)); }
  int color_type() const { return png_get_color_type(png_, info_); }
  int bit_depth() const { return png_get_bit_depth(png_, info_); }

  // Reads rows after transforms are set; expects `channels` bytes per pixel.
  std::vector<std::uint8_t> read(int channels) {
    png_read_update_info(png_, info_);
    const std::size_t rowbytes = png_get_rowbytes(png_, info_);
    if (rowbytes != static_cast<std::size_t>(width()) * channels) {
      format_error("unexpected PNG row layout");
    }
    std::vector<std::uint8_t> data(rowbytes * height());
    std::vector<png_bytep> rows(height());
    for (int y = 0; y < height(); ++y) rows[y] = data.data() + y * rowbytes;
    png_read_image(png_, rows.data());
    png_read_end(png_, nullptr);
    return data;
  }

 private:
  PngReadBuffer buffer_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngWriter {
 public:
  PngWriter() {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_warn);
    info_ = png_create_info_struct(png_);
    png_set_write_fn(png_, &out_, png_write_to_string, png_flush_noop);
  }
  ~PngWriter() { png_destroy_write_struct(&png_, &info_); }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

  std::string write(int width, int height, int color_type, const std::uint8_t* data,
                    std::size_t rowbytes) {
    if (width <= 0 || height <= 0) format_error("cannot encode an empty PNG");
    png_set_IHDR(png_, info_, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png_, info_);
    for (int y = 0; y < height; ++y) {
      png_write_row(png_, const_cast<png_bytep>(data + y * rowbytes));
    }
    png_write_end(png_, nullptr);
    return std::move(out_);
  }

 private:
  std::string out_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

// ---- libjpeg plumbing --------------------------------------------------------

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

RasterImage decode_jpeg(const std::string& bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> data;
  int width = 0, height = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    format_error(std::string("JPEG: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  data.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = data.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return RasterImage(width, height, std::move(data));
}

// Pascal-VOC colour map, the palette SCHP writes its label PNGs with.
std::array<png_color, 256> label_palette() {
  std::array<png_color, 256> pal{};
  for (int i = 0; i < 256; ++i) {
    int lab = i;
    int r = 0, g = 0, b = 0;
    for (int k = 0; lab; ++k, lab >>= 3) {
      r |= ((lab >> 0) & 1) << (7 - k);
      g |= ((lab >> 1) & 1) << (7 - k);
      b |= ((lab >> 2) & 1) << (7 - k);
    }
    pal[i] = {static_cast<png_byte>(r), static_cast<png_byte>(g), static_cast<png_byte>(b)};
  }
  return pal;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---- RGB images --------------------------------------------------------------

RasterImage decode_image(const std::string& bytes) {
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
      static_cast<unsigned char>(bytes[1]) == 0xD8) {
    return decode_jpeg(bytes);
  }
  PngReader r(bytes);
  png_structp png = r.png();
  if (r.color_type() == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (r.color_type() == PNG_COLOR_TYPE_GRAY && r.bit_depth() < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, r.info(), PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (r.bit_depth() == 16) png_set_strip_16(png);
  if (r.color_type() == PNG_COLOR_TYPE_GRAY || r.color_type() == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_strip_alpha(png);
  return RasterImage(r.width(), r.height(), r.read(3));
}

RasterImage read_image(const fs::path& path) { return decode_image(read_text(path)); }

std::string encode_png(const RasterImage& img) {
  PngWriter w;
  return w.write(img.width(), img.height(), PNG_COLOR_TYPE_RGB, img.data().data(),
                 static_cast<std::size_t>(img.width()) * 3);
}

void write_png(const fs::path& path, const RasterImage& img) {
  write_text_atomic(path, encode_png(img));
}

// ---- masks -------------------------------------------------------------------

BinaryMask decode_mask(const std::string& bytes) {
  PngReader r(bytes);
  if (r.color_type() != PNG_COLOR_TYPE_GRAY || r.bit_depth() != 8) {
    format_error("mask PNG must be 8-bit single-channel");
  }
  std::vector<std::uint8_t> px = r.read(1);
  for (auto& v : px) {
    if (v != 0 && v != 255) format_error("mask PNG holds a value other than 0/255");
    v = v ? 1 : 0;
  }
  return BinaryMask(r.width(), r.height(), std::move(px));
}

BinaryMask read_mask(const fs::path& path) { return decode_mask(read_text(path)); }

std::string encode_mask_png(const BinaryMask& mask) {
  std::vector<std::uint8_t> px(mask.bits().begin(), mask.bits().end());
  for (auto& v : px) v = v ? 255 : 0;
  PngWriter w;
  return w.write(mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, px.data(),
                 static_cast<std::size_t>(mask.width()));
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
  write_text_atomic(path, encode_mask_png(mask));
}

// ---- label schema + parse maps ----------------------------------------------

LabelSchema parse_label_schema(const std::string& text) {
  std::map<int, std::string> names;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      format_error("label schema line " + std::to_string(lineno) + ": expected 'id = name'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      format_error("label schema line " + std::to_string(lineno) + ": bad id '" + key + "'");
    }
    if (!names.emplace(id, value).second) {
      format_error("label schema line " + std::to_string(lineno) + ": duplicate id");
    }
  }
  return LabelSchema(std::move(names));
}

std::string format_label_schema(const LabelSchema& schema) {
  std::string out = "# label id = semantic name\n";
  for (const auto& [id, name] : schema.entries()) {
    out += std::to_string(id) + " = " + name + "\n";
  }
  return out;
}

LabelSchema read_label_schema(const fs::path& path) { return parse_label_schema(read_text(path)); }

void write_label_schema(const fs::path& path, const LabelSchema& schema) {
  write_text_atomic(path, format_label_schema(schema));
}

fs::path schema_sidecar_path(const fs::path& parse_png) {
  fs::path own = parse_png.parent_path() / (parse_png.stem().string() + ".labels.txt");
  if (fs::exists(own)) return own;
  return parse_png.parent_path() / "labels.txt";
}

ParseMap decode_parse(const std::string& bytes, const LabelSchema& schema) {
  PngReader r(bytes);
  const int ct = r.color_type();
  if (ct != PNG_COLOR_TYPE_PALETTE && ct != PNG_COLOR_TYPE_GRAY) {
    format_error("parse PNG must be paletted or single-channel");
  }
  if (r.bit_depth() == 16) format_error("parse PNG must be at most 8-bit");
  if (r.bit_depth() < 8) png_set_packing(r.png());
  std::vector<std::uint8_t> px = r.read(1);
  return ParseMap(r.width(), r.height(), std::move(px), schema);
}

ParseMap read_parse(const fs::path& path, const LabelSchema& fallback) {
  const fs::path sidecar = schema_sidecar_path(path);
  const LabelSchema schema = fs::exists(sidecar) ? read_label_schema(sidecar) : fallback;
  return decode_parse(read_text(path), schema);
}

std::string encode_parse_png(const ParseMap& parse) {
  static const std::array<png_color, 256> kPalette = label_palette();
  PngWriter w;
  png_set_PLTE(w.png(), w.info(), kPalette.data(), 256);
  return w.write(parse.width(), parse.height(), PNG_COLOR_TYPE_PALETTE, parse.labels().data(),
                 static_cast<std::size_t>(parse.width()));
}

void write_parse(const fs::path& path, const ParseMap& parse, bool write_sidecar) {
  write_text_atomic(path, encode_parse_png(parse));
  if (write_sidecar) {
    write_label_schema(path.parent_path() / (path.stem().string() + ".labels.txt"),
                       parse.schema());
  }
}

// ---- pose documents ----------------------------------------------------------

PoseSkeleton parse_pose_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    format_error(std::string("pose document: ") + e.what());
  }
  if (!doc.contains("people") || !doc["people"].is_array()) {
    format_error("pose document lacks a 'people' array");
  }
  if (doc["people"].empty()) return PoseSkeleton{};
  const json& kp = doc["people"][0]["pose_keypoints_2d"];
  if (!kp.is_array()) format_error("pose document lacks 'pose_keypoints_2d'");
  std::vector<double> flat;
  flat.reserve(kp.size());
  for (const auto& v : kp) {
    if (!v.is_number()) format_error("non-numeric keypoint value");
    flat.push_back(v.get<double>());
  }
  return PoseSkeleton::from_flat(flat);
}

std::string format_pose_json(const PoseSkeleton& pose) {
  const auto flat = pose.to_flat();
  json doc = {{"version", 1.3},
              {"people", json::array({json{{"pose_keypoints_2d", flat}}})}};
  return doc.dump(1) + "\n";
}

PoseSkeleton read_pose(const fs::path& path) { return parse_pose_json(read_text(path)); }

void write_pose(const fs::path& path, const PoseSkeleton& pose) {
  write_text_atomic(path, format_pose_json(pose));
}

}  // namespace capvton::io
