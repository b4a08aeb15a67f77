#include "petmap/render.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"

using namespace petmap;

namespace {

ValueMatrix matrix(int w, int h, double fill = std::nan("")) {
  ValueMatrix m;
  m.width = w;
  m.height = h;
  m.values.assign(static_cast<size_t>(w) * h, fill);
  return m;
}

}  // namespace

TEST_CASE("all-absent matrix renders uniform absent color") {
  ColorMapSpec spec;
  spec.absent_color = {10, 20, 30};
  const RasterImage img = render_heatmap(matrix(8, 6), spec);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 8; ++c) CHECK(img.at(r, c) == Rgb{10, 20, 30});
}

TEST_CASE("domain endpoints map to the endpoint colors") {
  ColorMapSpec spec;
  spec.kind = ColorMapSpec::Kind::kLinear;
  spec.domain_min = 1.0;
  spec.domain_max = 5.0;
  ValueMatrix m = matrix(2, 1);
  m.values = {1.0, 5.0};
  const RasterImage img = render_heatmap(m, spec);
  CHECK(img.at(0, 0) == spec.low_color);
  CHECK(img.at(0, 1) == spec.high_color);

  // Out-of-domain values clamp to the nearest endpoint.
  m.values = {0.01, 99.0};
  const RasterImage clamped = render_heatmap(m, spec);
  CHECK(clamped.at(0, 0) == spec.low_color);
  CHECK(clamped.at(0, 1) == spec.high_color);
}

TEST_CASE("log colormap interpolation parameter") {
  ColorMapSpec spec;
  spec.kind = ColorMapSpec::Kind::kLogarithmic;
  spec.domain_min = 1.0;
  spec.domain_max = 100.0;
  CHECK(colormap_t(1.0, spec) == doctest::Approx(0.0));
  CHECK(colormap_t(10.0, spec) == doctest::Approx(0.5));
  CHECK(colormap_t(100.0, spec) == doctest::Approx(1.0));
}

TEST_CASE("interpolation parameter is monotone under both kinds") {
  for (const auto kind : {ColorMapSpec::Kind::kLinear, ColorMapSpec::Kind::kLogarithmic}) {
    ColorMapSpec spec;
    spec.kind = kind;
    spec.domain_min = 0.2;
    spec.domain_max = 40.0;
    double prev = -1.0;
    for (int i = 0; i < 500; ++i) {
      const double v = 0.05 + i * 0.1;
      const double t = colormap_t(v, spec);
      CHECK(t >= prev);
      prev = t;
    }
  }
}

TEST_CASE("invalid domains are rejected") {
  ColorMapSpec spec;
  spec.domain_min = 5.0;
  spec.domain_max = 5.0;
  CHECK_THROWS_AS(render_heatmap(matrix(2, 2), spec), InvalidDomain);
  spec.kind = ColorMapSpec::Kind::kLogarithmic;
  spec.domain_min = 0.0;
  spec.domain_max = 1.0;
  CHECK_THROWS_AS(render_heatmap(matrix(2, 2), spec), InvalidDomain);
}

TEST_CASE("composite blends and passes absent pixels through") {
  RasterImage heat(2, 2), back(2, 2);
  const Rgb absent{0, 0, 0};
  heat.set(0, 0, {200, 100, 50});
  heat.set(0, 1, absent);
  back.set(0, 0, {20, 40, 60});
  back.set(0, 1, {1, 2, 3});

  const RasterImage zero = composite_over_background(heat, back, 0.0, absent);
  CHECK(zero.at(0, 0) == back.at(0, 0));

  const RasterImage one = composite_over_background(heat, back, 1.0, absent);
  CHECK(one.at(0, 0) == heat.at(0, 0));
  CHECK(one.at(0, 1) == back.at(0, 1));  // absent is transparent even at alpha 1

  const RasterImage half = composite_over_background(heat, back, 0.5, absent);
  CHECK(half.at(0, 0) == Rgb{110, 70, 55});

  RasterImage wrong(3, 2);
  CHECK_THROWS_AS(composite_over_background(heat, wrong, 0.5, absent), DimensionMismatch);
}

TEST_CASE("png round trip and determinism") {
  const auto dir = std::filesystem::temp_directory_path() / "petmap_render_test";
  std::filesystem::create_directories(dir);
  RasterImage img(17, 9);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 17; ++c)
      img.set(r, c, {static_cast<uint8_t>(r * 20), static_cast<uint8_t>(c * 10), 128});

  const auto p1 = dir / "a.png";
  const auto p2 = dir / "b.png";
  write_png(p1.string(), img);
  write_png(p2.string(), img);

  const RasterImage back = read_png(p1.string());
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  CHECK(back.pixels == img.pixels);

  // Bit-identical output for identical input.
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("matrix text round trip keeps NaN sentinels") {
  const auto dir = std::filesystem::temp_directory_path() / "petmap_matrix_test";
  std::filesystem::create_directories(dir);
  ValueMatrix m = matrix(3, 2);
  m.values = {1.5, std::nan(""), 0.25, 100.125, 3.0, std::nan("")};
  const auto path = (dir / "m.txt").string();
  write_matrix_text(path, m);
  const ValueMatrix back = read_matrix_text(path);
  REQUIRE(back.width == 3);
  REQUIRE(back.height == 2);
  for (size_t i = 0; i < m.values.size(); ++i) {
    if (std::isnan(m.values[i])) {
      CHECK(std::isnan(back.values[i]));
    } else {
      CHECK(back.values[i] == doctest::Approx(m.values[i]).epsilon(1e-12));
    }
  }
  std::filesystem::remove_all(dir);
}
