#include "petmap/geometry.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace petmap;

namespace {

std::mt19937_64 rng(20240817);

Point2 random_point(double lo = -100, double hi = 100) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng), d(rng)};
}

Homography random_homography() {
  // Near-affine with a small projective part; always invertible by test.
  std::uniform_real_distribution<double> a(-1.0, 1.0);
  std::uniform_real_distribution<double> t(-50.0, 50.0);
  std::uniform_real_distribution<double> p(-1e-4, 1e-4);
  for (;;) {
    Homography h = Homography::from_rows({1.0 + 0.3 * a(rng), 0.3 * a(rng), t(rng),
                                          0.3 * a(rng), 1.0 + 0.3 * a(rng), t(rng),
                                          p(rng), p(rng), 1.0});
    if (std::abs(h.determinant()) > 1e-3) return h;
  }
}

// Independent oracle: plain 3x3 multiply and divide, no library code.
Point2 project_oracle(const Homography &h, const Point2 &p) {
  const double x = h.m[0] * p.x + h.m[1] * p.y + h.m[2];
  const double y = h.m[3] * p.x + h.m[4] * p.y + h.m[5];
  const double w = h.m[6] * p.x + h.m[7] * p.y + h.m[8];
  return {x / w, y / w};
}

double sweep_min_area(const std::vector<Point2> &pts) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 900; ++k) {
    const double rad = k * 0.1 * M_PI / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    double minu = 1e300, maxu = -1e300, minv = 1e300, maxv = -1e300;
    for (const auto &p : pts) {
      const double u = p.x * c + p.y * s;
      const double v = -p.x * s + p.y * c;
      minu = std::min(minu, u);
      maxu = std::max(maxu, u);
      minv = std::min(minv, v);
      maxv = std::max(maxv, v);
    }
    best = std::min(best, (maxu - minu) * (maxv - minv));
  }
  return best;
}

}  // namespace

TEST_CASE("estimate_homography identity and scaling") {
  const std::vector<Correspondence> identity = {
      {{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{1, 1}, {1, 1}}, {{0, 1}, {0, 1}}};
  const Homography hi = estimate_homography(identity);
  for (int i = 0; i < 9; ++i) {
    CHECK(hi.m[i] == doctest::Approx(i % 4 == 0 ? 1.0 : 0.0).epsilon(1e-9));
  }

  const std::vector<Correspondence> scaling = {
      {{0, 0}, {0, 0}}, {{1, 0}, {2, 0}}, {{1, 1}, {2, 2}}, {{0, 1}, {0, 2}}};
  const Homography hs = estimate_homography(scaling);
  CHECK(hs.m[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(hs.m[4] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(hs.m[8] == doctest::Approx(1.0));
  CHECK(std::abs(hs.m[1]) < 1e-9);
  CHECK(std::abs(hs.m[2]) < 1e-9);
}

TEST_CASE("estimate_homography recovers a random homography from 20 points") {
  for (int trial = 0; trial < 20; ++trial) {
    const Homography truth = random_homography();
    std::vector<Correspondence> pairs;
    for (int i = 0; i < 20; ++i) {
      const Point2 p = random_point();
      pairs.emplace_back(p, project_oracle(truth, p));
    }
    const Homography est = estimate_homography(pairs);
    double max_err = 0;
    for (const auto &[src, dst] : pairs) {
      const Point2 q = project_point(est, src);
      max_err = std::max(max_err, std::hypot(q.x - dst.x, q.y - dst.y));
    }
    CHECK(max_err < 1e-6);
  }
}

TEST_CASE("estimate_homography error paths") {
  std::vector<Correspondence> three = {{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}};
  CHECK_THROWS_AS(estimate_homography(three), TooFewPoints);

  std::vector<Correspondence> collinear = {
      {{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{2, 0}, {2, 0}}, {{0, 1}, {0, 1}}};
  CHECK_THROWS_AS(estimate_homography(collinear), DegenerateConfiguration);

  std::vector<Correspondence> duplicated = {
      {{0, 0}, {0, 0}}, {{0, 0}, {1, 0}}, {{1, 1}, {1, 1}}, {{0, 1}, {0, 1}}};
  CHECK_THROWS_AS(estimate_homography(duplicated), DegenerateConfiguration);
}

TEST_CASE("project_point basics and oracle match") {
  CHECK(project_point(Homography::identity(), {5, 7}).x == doctest::Approx(5));
  CHECK(project_point(Homography::identity(), {5, 7}).y == doctest::Approx(7));

  const Homography scale = Homography::from_rows({2, 0, 0, 0, 2, 0, 0, 0, 1});
  const Point2 q = project_point(scale, {3, 4});
  CHECK(q.x == doctest::Approx(6));
  CHECK(q.y == doctest::Approx(8));

  for (int i = 0; i < 200; ++i) {
    const Homography h = random_homography();
    const Point2 p = random_point();
    const Point2 got = project_point(h, p);
    const Point2 want = project_oracle(h, p);
    CHECK(got.x == doctest::Approx(want.x).epsilon(1e-12));
    CHECK(got.y == doctest::Approx(want.y).epsilon(1e-12));
  }
}

TEST_CASE("project_point at infinity") {
  const Homography h = Homography::from_rows({1, 0, 0, 0, 1, 0, 1, 0, 0});
  CHECK_THROWS_AS(project_point(h, {0, 5}), PointAtInfinity);
}

TEST_CASE("project_polygon preserves order and propagates per vertex") {
  const Polygon square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const Homography scale = Homography::from_rows({2, 0, 0, 0, 2, 0, 0, 0, 1});
  const Polygon out = project_polygon(scale, square);
  REQUIRE(out.size() == 4);
  CHECK(out[2].x == doctest::Approx(2));
  CHECK(out[2].y == doctest::Approx(2));

  for (int i = 0; i < 50; ++i) {
    const Homography h = random_homography();
    Polygon quad;
    for (int v = 0; v < 4; ++v) quad.push_back(random_point());
    const Polygon got = project_polygon(h, quad);
    for (size_t v = 0; v < 4; ++v) {
      const Point2 want = project_oracle(h, quad[v]);
      CHECK(got[v].x == doctest::Approx(want.x).epsilon(1e-12));
      CHECK(got[v].y == doctest::Approx(want.y).epsilon(1e-12));
    }
  }
}

TEST_CASE("homography round trip and scale invariance") {
  for (int i = 0; i < 50; ++i) {
    const Homography h = random_homography();
    const Homography inv = h.inverse();
    const Point2 p = random_point();
    const Point2 back = project_point(inv, project_point(h, p));
    CHECK(std::hypot(back.x - p.x, back.y - p.y) < 1e-6);

    // Scaling all entries before normalization changes nothing.
    std::array<double, 9> scaled = h.m;
    for (auto &v : scaled) v *= -3.7;
    const Homography h2 = Homography::from_rows(scaled);
    const Point2 a = project_point(h, p);
    const Point2 b = project_point(h2, p);
    CHECK(std::hypot(a.x - b.x, a.y - b.y) < 1e-9);
  }
}

TEST_CASE("convex_hull basics") {
  const Polygon hull =
      convex_hull({{0, 0}, {4, 0}, {4, 4}, {0, 4}, {2, 2}});
  CHECK(hull.size() == 4);
  CHECK(polygon_signed_area(hull) > 0);  // CCW

  const Polygon tri = convex_hull({{0, 0}, {3, 1}, {1, 4}});
  CHECK(tri.size() == 3);
  CHECK(polygon_signed_area(tri) > 0);

  CHECK_THROWS_AS(convex_hull({{0, 0}, {1, 1}, {2, 2}}), DegenerateConfiguration);
}

TEST_CASE("convex_hull contains all inputs") {
  std::vector<Point2> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(random_point());
  const Polygon hull = convex_hull(pts);
  for (const auto &p : pts) {
    // On-hull points fail strict point-in-polygon; accept boundary via a
    // tiny inward nudge toward the centroid.
    Point2 c{0, 0};
    for (const auto &v : hull) {
      c.x += v.x / hull.size();
      c.y += v.y / hull.size();
    }
    const Point2 nudged{p.x + (c.x - p.x) * 1e-9, p.y + (c.y - p.y) * 1e-9};
    CHECK(point_in_polygon(hull, nudged));
  }
}

TEST_CASE("min_area_rect axis-aligned and rotated") {
  const std::vector<Point2> box = {{0, 0}, {4, 0}, {4, 2}, {0, 2}};
  const RotatedRect r = min_area_rect(box);
  CHECK(r.center.x == doctest::Approx(2));
  CHECK(r.center.y == doctest::Approx(1));
  CHECK(r.width == doctest::Approx(4));
  CHECK(r.height == doctest::Approx(2));
  CHECK(r.angle_deg == doctest::Approx(0).epsilon(1e-9));

  const double rad = 30.0 * M_PI / 180.0;
  std::vector<Point2> rotated;
  for (const auto &p : box) {
    rotated.push_back({p.x * std::cos(rad) - p.y * std::sin(rad),
                       p.x * std::sin(rad) + p.y * std::cos(rad)});
  }
  const RotatedRect rr = min_area_rect(rotated);
  CHECK(rr.long_side() == doctest::Approx(4).epsilon(1e-6));
  CHECK(rr.short_side() == doctest::Approx(2).epsilon(1e-6));
  CHECK(rr.angle_deg == doctest::Approx(30).epsilon(1e-6));
}

TEST_CASE("min_area_rect contains inputs and matches the angle sweep") {
  std::uniform_int_distribution<int> npts(3, 40);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point2> pts;
    const int n = npts(rng);
    for (int i = 0; i < n; ++i) pts.push_back(random_point());
    RotatedRect r;
    try {
      r = min_area_rect(pts);
    } catch (const DegenerateConfiguration &) {
      continue;
    }
    for (const auto &p : pts) CHECK(r.contains(p, 1e-9));
    const double oracle = sweep_min_area(pts);
    CHECK(std::abs(r.area() - oracle) <= 0.005 * oracle);
  }
}

TEST_CASE("min_area_rect translation and rotation equivariance") {
  std::vector<Point2> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(random_point());
  const RotatedRect base = min_area_rect(pts);

  std::vector<Point2> shifted;
  for (const auto &p : pts) shifted.push_back({p.x + 13.5, p.y - 7.25});
  const RotatedRect tr = min_area_rect(shifted);
  CHECK(tr.center.x == doctest::Approx(base.center.x + 13.5).epsilon(1e-9));
  CHECK(tr.center.y == doctest::Approx(base.center.y - 7.25).epsilon(1e-9));
  CHECK(tr.angle_deg == doctest::Approx(base.angle_deg).epsilon(1e-9));

  const double theta = 25.0 * M_PI / 180.0;
  std::vector<Point2> rotated;
  for (const auto &p : pts) {
    rotated.push_back({p.x * std::cos(theta) - p.y * std::sin(theta),
                       p.x * std::sin(theta) + p.y * std::cos(theta)});
  }
  const RotatedRect rot = min_area_rect(rotated);
  CHECK(rot.area() == doctest::Approx(base.area()).epsilon(1e-9));
  const double expected = std::fmod(base.angle_deg + 25.0, 90.0);
  const double diff = std::abs(rot.angle_deg - expected);
  CHECK(std::min(diff, 90.0 - diff) < 1e-6);
  // The side pair is preserved even when the width/height roles swap.
  CHECK(rot.long_side() == doctest::Approx(base.long_side()).epsilon(1e-9));
  CHECK(rot.short_side() == doctest::Approx(base.short_side()).epsilon(1e-9));
}

TEST_CASE("rasterize_polygon exact square and off-grid clip") {
  const BinaryMask m = rasterize_polygon({{0, 0}, {10, 0}, {10, 10}, {0, 10}}, 20, 20);
  CHECK(m.count() == 100);

  const BinaryMask empty = rasterize_polygon({{30, 30}, {40, 30}, {40, 40}, {30, 40}}, 20, 20);
  CHECK(empty.count() == 0);
}

TEST_CASE("rasterize_polygon matches the per-pixel oracle") {
  for (int trial = 0; trial < 30; ++trial) {
    // Random convex polygon from hull of random points inside the grid.
    std::vector<Point2> pts;
    for (int i = 0; i < 12; ++i) pts.push_back(random_point(5, 55));
    const Polygon poly = convex_hull(pts);
    const BinaryMask m = rasterize_polygon(poly, 64, 64);
    size_t oracle_count = 0;
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        const bool inside = point_in_polygon(poly, {c + 0.5, r + 0.5});
        if (inside) ++oracle_count;
        CHECK(m.test(r, c) == inside);
      }
    }
    CHECK(m.count() == oracle_count);
    CHECK(std::abs(static_cast<double>(m.count()) - polygon_area(poly)) <=
          polygon_perimeter(poly));
  }
}

TEST_CASE("extract_contours basics") {
  CHECK(extract_contours(BinaryMask(16, 16)).empty());

  BinaryMask block(16, 16);
  for (int r = 3; r < 8; ++r)
    for (int c = 4; c < 9; ++c) block.set(r, c);
  const auto contours = extract_contours(block);
  REQUIRE(contours.size() == 1);
  // Boundary of a 5x5 block has 16 pixels.
  CHECK(contours[0].size() == 16);
  for (const auto &v : contours[0]) {
    const int c = static_cast<int>(v.x);
    const int r = static_cast<int>(v.y);
    CHECK(block.test(r, c));
    const bool interior = r > 3 && r < 7 && c > 4 && c < 8;
    CHECK(!interior);
  }
}

TEST_CASE("extract_contours round trip within a one-pixel band") {
  BinaryMask mask(40, 40);
  // Two disjoint blobs, one of them L-shaped.
  for (int r = 2; r < 12; ++r)
    for (int c = 2; c < 10; ++c) mask.set(r, c);
  for (int r = 20; r < 30; ++r)
    for (int c = 15; c < 35; ++c) mask.set(r, c);
  for (int r = 30; r < 36; ++r)
    for (int c = 15; c < 22; ++c) mask.set(r, c);

  const auto contours = extract_contours(mask);
  REQUIRE(contours.size() == 2);

  BinaryMask refilled(40, 40);
  for (const auto &contour : contours) rasterize_polygon_into(contour, refilled);
  for (int r = 0; r < 40; ++r) {
    for (int c = 0; c < 40; ++c) {
      if (refilled.test(r, c) == mask.test(r, c)) continue;
      // Mismatches must touch the blob boundary: some 8-neighbor differs.
      bool near_boundary = false;
      for (int dr = -1; dr <= 1 && !near_boundary; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int nr = r + dr, nc = c + dc;
          if (nr < 0 || nr >= 40 || nc < 0 || nc >= 40 ||
              mask.test(nr, nc) != mask.test(r, c)) {
            near_boundary = true;
            break;
          }
        }
      }
      CHECK(near_boundary);
    }
  }
}
