#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "petmap/errors.hpp"

namespace petmap {

// Degeneracy / point-at-infinity epsilon in normalized coordinates.
inline constexpr double kGeomEps = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point2 &a, const Point2 &b) { return a.x == b.x && a.y == b.y; }

using Polygon = std::vector<Point2>;

/// 3x3 plane homography, row-major. Normalized so m[8] == 1 when the
/// bottom-right entry is nonzero, otherwise to unit Frobenius norm.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double at(int row, int col) const { return m[static_cast<size_t>(row) * 3 + col]; }
  double &at(int row, int col) { return m[static_cast<size_t>(row) * 3 + col]; }

  static Homography identity() { return Homography{}; }
  static Homography from_rows(const std::array<double, 9> &rows);

  Homography inverse() const;
  double determinant() const;
};

/// Rotated rectangle. angle_deg is the direction of the "width" edge against
/// the grid x-axis, normalized into [0, 90); width is the extent along that
/// direction, height the perpendicular extent.
struct RotatedRect {
  Point2 center;
  double width = 0.0;
  double height = 0.0;
  double angle_deg = 0.0;

  double area() const { return width * height; }
  double long_side() const { return width > height ? width : height; }
  double short_side() const { return width > height ? height : width; }
  /// Corners in CCW order.
  std::array<Point2, 4> corners() const;
  bool contains(const Point2 &p, double slack = 0.0) const;
  static RotatedRect from_corners(const std::array<Point2, 4> &corners);
};

/// Row-major occupancy bits; pixel (row i, col j) has center (j+0.5, i+0.5).
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<size_t>(w) * h, 0) {}

  bool test(int row, int col) const { return bits[static_cast<size_t>(row) * width + col] != 0; }
  void set(int row, int col, bool v = true) {
    bits[static_cast<size_t>(row) * width + col] = v ? 1 : 0;
  }
  size_t count() const;
};

using Correspondence = std::pair<Point2, Point2>;  // source -> target

/// Normalized DLT over all correspondences (least squares for n > 4).
Homography estimate_homography(const std::vector<Correspondence> &correspondences);

Point2 project_point(const Homography &h, const Point2 &p);
Polygon project_polygon(const Homography &h, const Polygon &poly);

double polygon_signed_area(const Polygon &poly);
double polygon_area(const Polygon &poly);
double polygon_perimeter(const Polygon &poly);
bool point_in_polygon(const Polygon &poly, const Point2 &p);  // even-odd rule

/// CCW hull with collinear points stripped. Throws DegenerateConfiguration
/// when all points are collinear.
Polygon convex_hull(std::vector<Point2> points);

/// Minimum-area enclosing rotated rectangle (rotating calipers over hull edges).
RotatedRect min_area_rect(const std::vector<Point2> &points);

/// Even-odd scanline fill sampled at pixel centers; out-of-grid parts clipped.
BinaryMask rasterize_polygon(const Polygon &poly, int width, int height);
void rasterize_polygon_into(const Polygon &poly, BinaryMask &mask);

/// Outer contour per 8-connected component, vertices at boundary pixel centers.
std::vector<Polygon> extract_contours(const BinaryMask &mask);

}  // namespace petmap
