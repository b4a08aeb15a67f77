#include "petmap/render.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace petmap {

double colormap_t(double value, const ColorMapSpec &spec) {
  double v = std::min(std::max(value, spec.domain_min), spec.domain_max);
  double lo = spec.domain_min, hi = spec.domain_max;
  if (spec.kind == ColorMapSpec::Kind::kLogarithmic) {
    v = std::log(v);
    lo = std::log(spec.domain_min);
    hi = std::log(spec.domain_max);
  }
  return (v - lo) / (hi - lo);
}

RasterImage render_heatmap(const ValueMatrix &values, const ColorMapSpec &spec) {
  if (!(spec.domain_min < spec.domain_max) ||
      (spec.kind == ColorMapSpec::Kind::kLogarithmic && spec.domain_min <= 0)) {
    throw InvalidDomain("colormap domain must have min < max (and min > 0 for log)");
  }
  if (values.width <= 0 || values.height <= 0) {
    throw InvalidDomain("value matrix is empty");
  }
  RasterImage img(values.width, values.height);
  for (int r = 0; r < values.height; ++r) {
    for (int c = 0; c < values.width; ++c) {
      const double v = values.values[static_cast<size_t>(r) * values.width + c];
      if (std::isnan(v)) {
        img.set(r, c, spec.absent_color);
        continue;
      }
      const double t = colormap_t(v, spec);
      Rgb out;
      for (int ch = 0; ch < 3; ++ch) {
        const double mixed = spec.low_color[ch] + t * (spec.high_color[ch] - spec.low_color[ch]);
        out[ch] = static_cast<uint8_t>(std::lround(mixed));
      }
      img.set(r, c, out);
    }
  }
  return img;
}

RasterImage composite_over_background(const RasterImage &heatmap, const RasterImage &background,
                                      double alpha, const Rgb &absent_color) {
  if (heatmap.width != background.width || heatmap.height != background.height) {
    throw DimensionMismatch("heatmap and background dimensions differ");
  }
  RasterImage out(background.width, background.height);
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      const Rgb h = heatmap.at(r, c);
      const Rgb b = background.at(r, c);
      if (h == absent_color) {
        out.set(r, c, b);
        continue;
      }
      Rgb mixed;
      for (int ch = 0; ch < 3; ++ch) {
        mixed[ch] = static_cast<uint8_t>(std::lround(alpha * h[ch] + (1.0 - alpha) * b[ch]));
      }
      out.set(r, c, mixed);
    }
  }
  return out;
}

void write_png(const std::string &path, const RasterImage &image) {
  std::FILE *fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw StorageFailure("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw StorageFailure("png write failed for " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < image.height; ++r) {
    png_write_row(png, const_cast<png_bytep>(
                           image.pixels.data() + static_cast<size_t>(r) * image.width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

RasterImage read_png(const std::string &path) {
  std::FILE *fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw StorageFailure("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    std::fclose(fp);
    throw StorageFailure("png read failed for " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  // Normalize any input layout to 8-bit RGB.
  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);
  RasterImage img(static_cast<int>(png_get_image_width(png, info)),
                  static_cast<int>(png_get_image_height(png, info)));
  for (int r = 0; r < img.height; ++r) {
    png_read_row(png, img.pixels.data() + static_cast<size_t>(r) * img.width * 3, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

void write_matrix_text(const std::string &path, const ValueMatrix &matrix) {
  std::ofstream out(path);
  if (!out) throw StorageFailure("cannot open " + path + " for writing");
  out << matrix.width << " " << matrix.height << "\n";
  out.precision(10);
  for (int r = 0; r < matrix.height; ++r) {
    for (int c = 0; c < matrix.width; ++c) {
      if (c) out << " ";
      const double v = matrix.values[static_cast<size_t>(r) * matrix.width + c];
      if (std::isnan(v)) {
        out << "nan";
      } else {
        out << v;
      }
    }
    out << "\n";
  }
  if (!out) throw StorageFailure("write failed for " + path);
}

ValueMatrix read_matrix_text(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw StorageFailure("cannot open " + path);
  ValueMatrix m;
  in >> m.width >> m.height;
  if (!in || m.width <= 0 || m.height <= 0) {
    throw StorageFailure("bad matrix header in " + path);
  }
  m.values.resize(static_cast<size_t>(m.width) * m.height);
  for (auto &v : m.values) {
    std::string tok;
    if (!(in >> tok)) throw StorageFailure("truncated matrix in " + path);
    v = tok == "nan" ? std::nan("") : std::stod(tok);
  }
  return m;
}

}  // namespace petmap
