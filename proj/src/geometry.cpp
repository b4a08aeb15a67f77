#include "petmap/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace petmap {

namespace {

double cross(const Point2 &o, const Point2 &a, const Point2 &b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool collinear(const Point2 &a, const Point2 &b, const Point2 &c) {
  const double la = std::hypot(b.x - a.x, b.y - a.y);
  const double lb = std::hypot(c.x - a.x, c.y - a.y);
  return std::abs(cross(a, b, c)) <= kGeomEps * (1.0 + la * lb);
}

bool all_collinear(const std::vector<Point2> &pts) {
  // Anchor on the two most distant-looking points to keep the test stable.
  size_t i1 = 1;
  double best = -1.0;
  for (size_t i = 1; i < pts.size(); ++i) {
    const double d = std::hypot(pts[i].x - pts[0].x, pts[i].y - pts[0].y);
    if (d > best) {
      best = d;
      i1 = i;
    }
  }
  if (best <= kGeomEps) return true;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (!collinear(pts[0], pts[i1], pts[i])) return false;
  }
  return true;
}

Eigen::Matrix3d to_eigen(const Homography &h) {
  Eigen::Matrix3d m;
  m << h.m[0], h.m[1], h.m[2], h.m[3], h.m[4], h.m[5], h.m[6], h.m[7], h.m[8];
  return m;
}

Homography from_eigen(const Eigen::Matrix3d &m) {
  Homography h;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) h.at(r, c) = m(r, c);
  return h;
}

Homography normalize_homography(Eigen::Matrix3d m) {
  if (std::abs(m(2, 2)) > kGeomEps) {
    m /= m(2, 2);
  } else {
    m /= m.norm();
    // Fix the overall sign for determinism.
    for (int i = 0; i < 9; ++i) {
      const double v = m(i / 3, i % 3);
      if (std::abs(v) > kGeomEps) {
        if (v < 0) m = -m;
        break;
      }
    }
  }
  return from_eigen(m);
}

// Isotropic normalization: centroid to origin, RMS distance sqrt(2).
Eigen::Matrix3d normalizing_transform(const std::vector<Point2> &pts) {
  double cx = 0, cy = 0;
  for (const auto &p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double rms = 0;
  for (const auto &p : pts) {
    const double dx = p.x - cx, dy = p.y - cy;
    rms += dx * dx + dy * dy;
  }
  rms = std::sqrt(rms / static_cast<double>(pts.size()));
  const double s = rms > kGeomEps ? std::sqrt(2.0) / rms : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

}  // namespace

Homography Homography::from_rows(const std::array<double, 9> &rows) {
  Homography h;
  h.m = rows;
  return normalize_homography(to_eigen(h));
}

double Homography::determinant() const { return to_eigen(*this).determinant(); }

Homography Homography::inverse() const {
  const Eigen::Matrix3d m = to_eigen(*this);
  if (std::abs(m.determinant()) <= kGeomEps) {
    throw DegenerateConfiguration("homography is not invertible");
  }
  return normalize_homography(m.inverse());
}

Homography estimate_homography(const std::vector<Correspondence> &correspondences) {
  const size_t n = correspondences.size();
  if (n < 4) throw TooFewPoints("homography needs at least 4 correspondences");

  std::vector<Point2> src(n), dst(n);
  for (size_t i = 0; i < n; ++i) {
    src[i] = correspondences[i].first;
    dst[i] = correspondences[i].second;
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (std::hypot(src[i].x - src[j].x, src[i].y - src[j].y) <= kGeomEps ||
          std::hypot(dst[i].x - dst[j].x, dst[i].y - dst[j].y) <= kGeomEps) {
        throw DegenerateConfiguration("duplicated correspondence point");
      }
    }
  }
  if (n == 4) {
    // With a minimal set, any collinear triple kills the solution.
    for (size_t a = 0; a < 4; ++a)
      for (size_t b = a + 1; b < 4; ++b)
        for (size_t c = b + 1; c < 4; ++c) {
          if (collinear(src[a], src[b], src[c]) || collinear(dst[a], dst[b], dst[c])) {
            throw DegenerateConfiguration("three collinear points in a minimal set");
          }
        }
  } else if (all_collinear(src) || all_collinear(dst)) {
    throw DegenerateConfiguration("all points collinear");
  }

  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);

  Eigen::MatrixXd a(2 * n, 9);
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d p = ts * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
    const Eigen::Vector3d q = td * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
    const double x = p(0), y = p(1), u = q(0), v = q(1);
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto &sv = svd.singularValues();
  if (sv(7) <= kGeomEps * sv(0)) {
    throw DegenerateConfiguration("correspondence set does not determine a homography");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  const Eigen::Matrix3d full = td.inverse() * hn * ts;
  if (std::abs(full.determinant()) <= kGeomEps) {
    throw DegenerateConfiguration("estimated homography is singular");
  }
  return normalize_homography(full);
}

Point2 project_point(const Homography &h, const Point2 &p) {
  const double w = h.m[6] * p.x + h.m[7] * p.y + h.m[8];
  if (std::abs(w) <= kGeomEps) throw PointAtInfinity("point maps to infinity");
  return {(h.m[0] * p.x + h.m[1] * p.y + h.m[2]) / w,
          (h.m[3] * p.x + h.m[4] * p.y + h.m[5]) / w};
}

Polygon project_polygon(const Homography &h, const Polygon &poly) {
  Polygon out;
  out.reserve(poly.size());
  for (const auto &p : poly) out.push_back(project_point(h, p));
  return out;
}

double polygon_signed_area(const Polygon &poly) {
  double s = 0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const auto &a = poly[i];
    const auto &b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

double polygon_area(const Polygon &poly) { return std::abs(polygon_signed_area(poly)); }

double polygon_perimeter(const Polygon &poly) {
  double s = 0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const auto &a = poly[i];
    const auto &b = poly[(i + 1) % n];
    s += std::hypot(b.x - a.x, b.y - a.y);
  }
  return s;
}

bool point_in_polygon(const Polygon &poly, const Point2 &p) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto &a = poly[i];
    const auto &b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

Polygon convex_hull(std::vector<Point2> points) {
  if (points.size() < 3) throw DegenerateConfiguration("hull needs at least 3 points");
  std::sort(points.begin(), points.end(), [](const Point2 &a, const Point2 &b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const size_t n = points.size();
  std::vector<Point2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= kGeomEps) --k;
    hull[k++] = points[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && cross(hull[k - 2], hull[k - 1], points[i]) <= kGeomEps) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw DegenerateConfiguration("all points collinear");
  return hull;
}

namespace {

struct CanonicalRect {
  RotatedRect rect;
};

// Fold into the canonical representation: angle in [0, 90), width along the
// angle axis, height perpendicular.
RotatedRect canonical_rect(const Point2 &center, double extent_u, double extent_v,
                           double angle_u_deg) {
  double a = std::fmod(angle_u_deg, 180.0);
  if (a < 0) a += 180.0;
  RotatedRect r;
  r.center = center;
  if (a >= 90.0) {
    r.angle_deg = a - 90.0;
    r.width = extent_v;
    r.height = extent_u;
  } else {
    r.angle_deg = a;
    r.width = extent_u;
    r.height = extent_v;
  }
  if (r.angle_deg >= 90.0) r.angle_deg = 0.0;
  return r;
}

}  // namespace

std::array<Point2, 4> RotatedRect::corners() const {
  const double rad = angle_deg * M_PI / 180.0;
  const double ux = std::cos(rad), uy = std::sin(rad);
  const double vx = -uy, vy = ux;
  const double hw = width / 2.0, hh = height / 2.0;
  return {Point2{center.x - ux * hw - vx * hh, center.y - uy * hw - vy * hh},
          Point2{center.x + ux * hw - vx * hh, center.y + uy * hw - vy * hh},
          Point2{center.x + ux * hw + vx * hh, center.y + uy * hw + vy * hh},
          Point2{center.x - ux * hw + vx * hh, center.y - uy * hw + vy * hh}};
}

bool RotatedRect::contains(const Point2 &p, double slack) const {
  const double rad = angle_deg * M_PI / 180.0;
  const double ux = std::cos(rad), uy = std::sin(rad);
  const double dx = p.x - center.x, dy = p.y - center.y;
  const double du = dx * ux + dy * uy;
  const double dv = -dx * uy + dy * ux;
  return std::abs(du) <= width / 2.0 + slack && std::abs(dv) <= height / 2.0 + slack;
}

RotatedRect RotatedRect::from_corners(const std::array<Point2, 4> &c) {
  Point2 center{(c[0].x + c[1].x + c[2].x + c[3].x) / 4.0,
                (c[0].y + c[1].y + c[2].y + c[3].y) / 4.0};
  const double e1 = std::hypot(c[1].x - c[0].x, c[1].y - c[0].y);
  const double e2 = std::hypot(c[3].x - c[0].x, c[3].y - c[0].y);
  const double ang = std::atan2(c[1].y - c[0].y, c[1].x - c[0].x) * 180.0 / M_PI;
  return canonical_rect(center, e1, e2, ang);
}

RotatedRect min_area_rect(const std::vector<Point2> &points) {
  const Polygon hull = convex_hull(points);
  const size_t n = hull.size();
  double best_area = std::numeric_limits<double>::infinity();
  RotatedRect best;
  for (size_t i = 0; i < n; ++i) {
    const Point2 &a = hull[i];
    const Point2 &b = hull[(i + 1) % n];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len <= kGeomEps) continue;
    const double ux = (b.x - a.x) / len, uy = (b.y - a.y) / len;
    const double vx = -uy, vy = ux;
    double minu = std::numeric_limits<double>::infinity(), maxu = -minu;
    double minv = minu, maxv = -minu;
    for (const auto &p : hull) {
      const double pu = p.x * ux + p.y * uy;
      const double pv = p.x * vx + p.y * vy;
      minu = std::min(minu, pu);
      maxu = std::max(maxu, pu);
      minv = std::min(minv, pv);
      maxv = std::max(maxv, pv);
    }
    const double w = maxu - minu, h = maxv - minv;
    const double area = w * h;
    if (area < best_area) {
      best_area = area;
      const double cu = (minu + maxu) / 2.0, cv = (minv + maxv) / 2.0;
      const Point2 center{ux * cu + vx * cv, uy * cu + vy * cv};
      best = canonical_rect(center, w, h, std::atan2(uy, ux) * 180.0 / M_PI);
    }
  }
  if (!std::isfinite(best_area)) throw DegenerateConfiguration("degenerate point set");
  return best;
}

void rasterize_polygon_into(const Polygon &poly, BinaryMask &mask) {
  if (poly.size() < 3) return;
  double ymin = poly[0].y, ymax = poly[0].y;
  for (const auto &p : poly) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int row0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  const int row1 = std::min(mask.height - 1, static_cast<int>(std::ceil(ymax)));
  std::vector<double> xs;
  for (int row = row0; row <= row1; ++row) {
    const double y = row + 0.5;
    xs.clear();
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
      const auto &a = poly[i];
      const auto &b = poly[j];
      if ((a.y > y) != (b.y > y)) {
        xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (size_t k = 0; k + 1 < xs.size(); k += 2) {
      int c0 = static_cast<int>(std::ceil(xs[k] - 0.5));
      int c1 = static_cast<int>(std::ceil(xs[k + 1] - 0.5)) - 1;
      c0 = std::max(c0, 0);
      c1 = std::min(c1, mask.width - 1);
      for (int c = c0; c <= c1; ++c) mask.set(row, c);
    }
  }
}

BinaryMask rasterize_polygon(const Polygon &poly, int width, int height) {
  BinaryMask mask(width, height);
  rasterize_polygon_into(poly, mask);
  return mask;
}

size_t BinaryMask::count() const {
  return static_cast<size_t>(std::count(bits.begin(), bits.end(), uint8_t{1}));
}

namespace {

// Moore neighborhood, clockwise with y growing downward, starting north.
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

}  // namespace

std::vector<Polygon> extract_contours(const BinaryMask &mask) {
  std::vector<Polygon> contours;
  const int w = mask.width, h = mask.height;
  std::vector<int32_t> label(static_cast<size_t>(w) * h, 0);
  int32_t next_label = 0;

  auto idx = [w](int row, int col) { return static_cast<size_t>(row) * w + col; };
  auto set_at = [&](int row, int col) {
    return row >= 0 && row < h && col >= 0 && col < w && mask.test(row, col);
  };

  std::deque<std::pair<int, int>> queue;
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      if (!mask.test(row, col) || label[idx(row, col)] != 0) continue;
      ++next_label;
      // Flood-fill the component so later scan positions skip it.
      label[idx(row, col)] = next_label;
      queue.clear();
      queue.emplace_back(row, col);
      while (!queue.empty()) {
        auto [r, c] = queue.front();
        queue.pop_front();
        for (int d = 0; d < 8; ++d) {
          const int nr = r + kDy[d], nc = c + kDx[d];
          if (set_at(nr, nc) && label[idx(nr, nc)] == 0) {
            label[idx(nr, nc)] = next_label;
            queue.emplace_back(nr, nc);
          }
        }
      }

      // Moore boundary trace from the topmost-leftmost pixel, clockwise.
      Polygon contour;
      contour.push_back({col + 0.5, row + 0.5});
      int cr = row, cc = col;
      int back = 6;  // came from the west
      const int start_r = row, start_c = col, start_back = back;
      const size_t cap = static_cast<size_t>(w) * h * 4 + 8;
      for (size_t steps = 0; steps < cap; ++steps) {
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
          const int d = (back + k) % 8;
          if (set_at(cr + kDy[d], cc + kDx[d])) {
            found = d;
            break;
          }
        }
        if (found < 0) break;  // isolated pixel
        const int prev_free = (found + 7) % 8;
        cr += kDy[found];
        cc += kDx[found];
        back = (prev_free + 4) % 8;  // direction from new pixel toward the free one
        // Recompute relative to the new current pixel: the free neighbor we
        // passed just before entering sits at (old + prev_free); express it
        // as a direction index from the new position.
        {
          const int fr = cr - kDy[found] + kDy[prev_free];
          const int fc = cc - kDx[found] + kDx[prev_free];
          for (int d = 0; d < 8; ++d) {
            if (cr + kDy[d] == fr && cc + kDx[d] == fc) {
              back = d;
              break;
            }
          }
        }
        if (cr == start_r && cc == start_c && back == start_back) break;
        contour.push_back({cc + 0.5, cr + 0.5});
      }
      // Strip a duplicated closing vertex if the trace ended on the start.
      if (contour.size() > 1 && contour.front() == contour.back()) contour.pop_back();
      contours.push_back(std::move(contour));
    }
  }
  return contours;
}

}  // namespace petmap
