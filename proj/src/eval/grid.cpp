#include "capvton/eval/grid.hpp"

#include "capvton/error.hpp"

namespace capvton::eval {

RasterImage emit_grid(std::span<const GridRow> rows, int gutter, Rgb gutter_color) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "comparison grid needs at least one row");
  if (gutter < 0) throw Error(ErrorCode::kInvalidArgument, "gutter must be >= 0");
  const std::size_t methods = rows.front().outputs.size();
  for (const auto& r : rows) {
    if (r.outputs.size() != methods) {
      throw Error(ErrorCode::kInvalidArgument, "every grid row needs the same number of outputs");
    }
  }
  const Size cell = rows.front().input.size();
  if (cell.area() == 0) throw Error(ErrorCode::kEmptyInput, "grid cell size is zero");
  const int cols = static_cast<int>(methods) + 2;
  const int n = static_cast<int>(rows.size());
  RasterImage out(cols * (cell.width + gutter) - gutter, n * (cell.height + gutter) - gutter,
                  gutter_color);

  auto paste = [&](const RasterImage& img, int col, int row) {
    const RasterImage scaled =
        img.size() == cell ? img : resize_nearest(img, cell.width, cell.height);
    const int x0 = col * (cell.width + gutter), y0 = row * (cell.height + gutter);
    for (int y = 0; y < cell.height; ++y) {
      for (int x = 0; x < cell.width; ++x) out.set(x0 + x, y0 + y, scaled.at(x, y));
    }
  };
  for (int r = 0; r < n; ++r) {
    paste(rows[r].input, 0, r);
    paste(rows[r].garment, 1, r);
    for (std::size_t m = 0; m < methods; ++m) paste(rows[r].outputs[m], static_cast<int>(m) + 2, r);
  }
  return out;
}

}  // namespace capvton::eval
