#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "petmap/errors.hpp"

namespace petmap {

using Rgb = std::array<uint8_t, 3>;

struct ColorMapSpec {
  enum class Kind { kLogarithmic, kLinear };
  Kind kind = Kind::kLogarithmic;
  Rgb low_color{255, 0, 0};    // short PET = hazardous
  Rgb high_color{255, 255, 255};
  double domain_min = 0.2;
  double domain_max = 30.0;
  Rgb absent_color{0, 0, 0};
};

struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major RGB

  RasterImage() = default;
  RasterImage(int w, int h)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 0) {}

  Rgb at(int row, int col) const {
    const size_t i = (static_cast<size_t>(row) * width + col) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int row, int col, const Rgb &c) {
    const size_t i = (static_cast<size_t>(row) * width + col) * 3;
    pixels[i] = c[0];
    pixels[i + 1] = c[1];
    pixels[i + 2] = c[2];
  }
};

/// Matrix with NaN marking absent values.
struct ValueMatrix {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major
};

/// Interpolation parameter for one value under the colormap; clamps to the
/// domain. Exposed for monotonicity checks.
double colormap_t(double value, const ColorMapSpec &spec);

RasterImage render_heatmap(const ValueMatrix &values, const ColorMapSpec &spec);

/// Per-pixel alpha blend; pixels equal to the absent color pass the
/// background through untouched.
RasterImage composite_over_background(const RasterImage &heatmap, const RasterImage &background,
                                      double alpha, const Rgb &absent_color);

void write_png(const std::string &path, const RasterImage &image);
RasterImage read_png(const std::string &path);

/// Text form: "width height" header line, then one row of values per line,
/// absent written as "nan".
void write_matrix_text(const std::string &path, const ValueMatrix &matrix);
ValueMatrix read_matrix_text(const std::string &path);

}  // namespace petmap
