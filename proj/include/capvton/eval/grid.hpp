#pragma once

#include <span>
#include <vector>

#include "capvton/image.hpp"

namespace capvton::eval {

struct GridRow {
  RasterImage input;
  RasterImage garment;
  std::vector<RasterImage> outputs;
};

// One row per item: input | garment | outputs..., every cell resized
// (nearest) to the first input's size, cells separated by `gutter` pixels of
// `gutter_color`. Size: cols*(w+g)-g by rows*(h+g)-g. EmptyInput without rows.
RasterImage emit_grid(std::span<const GridRow> rows, int gutter = 4,
                      Rgb gutter_color = {255, 255, 255});

}  // namespace capvton::eval
