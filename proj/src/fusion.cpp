#include "petmap/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace petmap {

namespace {

// Scanline spans of a polygon at pixel centers, clipped to the grid.
template <typename SpanFn>
void for_each_span(const Polygon &poly, int width, int height, SpanFn &&fn) {
  if (poly.size() < 3) return;
  double ymin = poly[0].y, ymax = poly[0].y;
  for (const auto &p : poly) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int row0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  const int row1 = std::min(height - 1, static_cast<int>(std::ceil(ymax)));
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
      int c0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      int c1 = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1] - 0.5)) - 1);
      if (c0 <= c1) fn(row, c0, c1);
    }
  }
}

struct AxisStats {
  double du = 0.0, dv = 0.0;  // local rect coordinates of the pixel center
  float score = 0.0f;
};

// Pixel centers inside the rectangle with their local coordinates and scores.
std::vector<AxisStats> collect_rect_pixels(const OverlapGrid &grid, const RotatedRect &rect) {
  std::vector<AxisStats> out;
  const auto corners = rect.corners();
  double minx = corners[0].x, maxx = minx, miny = corners[0].y, maxy = miny;
  for (const auto &c : corners) {
    minx = std::min(minx, c.x);
    maxx = std::max(maxx, c.x);
    miny = std::min(miny, c.y);
    maxy = std::max(maxy, c.y);
  }
  const int r0 = std::max(0, static_cast<int>(std::floor(miny - 0.5)));
  const int r1 = std::min(grid.height - 1, static_cast<int>(std::ceil(maxy)));
  const int c0 = std::max(0, static_cast<int>(std::floor(minx - 0.5)));
  const int c1 = std::min(grid.width - 1, static_cast<int>(std::ceil(maxx)));
  const double rad = rect.angle_deg * M_PI / 180.0;
  const double ux = std::cos(rad), uy = std::sin(rad);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double dx = (c + 0.5) - rect.center.x;
      const double dy = (r + 0.5) - rect.center.y;
      const double du = dx * ux + dy * uy;
      const double dv = -dx * uy + dy * ux;
      if (std::abs(du) <= rect.width / 2.0 + 1e-9 &&
          std::abs(dv) <= rect.height / 2.0 + 1e-9) {
        out.push_back({du, dv, grid.score_at(r, c)});
      }
    }
  }
  return out;
}

RotatedRect snap_rect(const RotatedRect &rect, const FusionConfig &cfg) {
  if (rect.short_side() <= 0) return rect;
  const double aspect = rect.long_side() / rect.short_side();
  if (aspect < cfg.snap_aspect_min || rect.area() < cfg.min_rect_area_px) return rect;
  RotatedRect r = rect;
  if (r.angle_deg <= cfg.snap_angle_tol_deg) {
    r.angle_deg = 0.0;
  } else if (r.angle_deg >= 90.0 - cfg.snap_angle_tol_deg) {
    // Snapping up to 90 degrees re-enters the canonical range as 0 with the
    // sides swapped.
    r.angle_deg = 0.0;
    std::swap(r.width, r.height);
  }
  return r;
}

RotatedRect extend_rect(const RotatedRect &rect, const OverlapGrid &grid,
                        const FusionConfig &cfg) {
  RotatedRect r = rect;
  // Outward normals of the four grid borders.
  const double nx[4] = {-1, 1, 0, 0};
  const double ny[4] = {0, 0, -1, 1};
  for (int b = 0; b < 4; ++b) {
    const auto corners = r.corners();
    double minx = corners[0].x, maxx = minx, miny = corners[0].y, maxy = miny;
    for (const auto &c : corners) {
      minx = std::min(minx, c.x);
      maxx = std::max(maxx, c.x);
      miny = std::min(miny, c.y);
      maxy = std::max(maxy, c.y);
    }
    const double dist[4] = {minx, grid.width - maxx, miny, grid.height - maxy};
    if (dist[b] < 0.0 || dist[b] > cfg.edge_margin_px) continue;

    const double rad = r.angle_deg * M_PI / 180.0;
    double lx = std::cos(rad), ly = std::sin(rad);
    if (r.height > r.width) {  // long axis is the perpendicular one
      const double tx = -ly;
      ly = lx;
      lx = tx;
    }
    double dot = lx * nx[b] + ly * ny[b];
    if (std::abs(dot) < 1e-6) continue;  // long axis parallel to this border
    if (dot < 0) {
      lx = -lx;
      ly = -ly;
    }
    r.center.x += lx * cfg.edge_extend_px / 2.0;
    r.center.y += ly * cfg.edge_extend_px / 2.0;
    if (r.width >= r.height) {
      r.width += cfg.edge_extend_px;
    } else {
      r.height += cfg.edge_extend_px;
    }
  }
  return r;
}

struct Valley {
  bool found = false;
  int axis = 0;  // 0 = along width (u), 1 = along height (v)
  double position = 0.0;  // local coordinate of the valley
  double ratio = std::numeric_limits<double>::infinity();
};

Valley find_valley(const std::vector<AxisStats> &pixels, const RotatedRect &rect,
                   const FusionConfig &cfg) {
  Valley best;
  if (pixels.empty()) return best;
  double total = 0;
  for (const auto &p : pixels) total += p.score;
  const double overall_mean = total / static_cast<double>(pixels.size());
  if (overall_mean <= 0) return best;

  for (int axis = 0; axis < 2; ++axis) {
    const double extent = axis == 0 ? rect.width : rect.height;
    const int nbins = static_cast<int>(std::floor(extent));
    if (nbins < 5) continue;
    std::vector<double> sum(nbins, 0.0);
    std::vector<int> cnt(nbins, 0);
    for (const auto &p : pixels) {
      const double coord = (axis == 0 ? p.du : p.dv) + extent / 2.0;
      int bin = static_cast<int>(std::floor(coord));
      bin = std::clamp(bin, 0, nbins - 1);
      sum[bin] += p.score;
      cnt[bin] += 1;
    }
    // Interior only: the outer fifths always thin out toward the corners.
    const int lo = nbins / 5;
    const int hi = nbins - nbins / 5;
    for (int b = lo; b < hi; ++b) {
      if (cnt[b] == 0) continue;
      const double ratio = (sum[b] / cnt[b]) / overall_mean;
      if (ratio < best.ratio) {
        best.ratio = ratio;
        best.axis = axis;
        best.position = (b + 0.5) - extent / 2.0;
      }
    }
  }
  best.found = best.ratio < cfg.split_valley_ratio;
  return best;
}

void safeguard_recurse(const RotatedRect &rect, const OverlapGrid &grid,
                       const FusionConfig &cfg, int split_depth,
                       std::vector<RotatedRect> &out) {
  RotatedRect r = snap_rect(rect, cfg);
  r = extend_rect(r, grid, cfg);

  if (split_depth < 2 && r.area() > cfg.split_area_px) {
    const auto pixels = collect_rect_pixels(grid, r);
    const Valley valley = find_valley(pixels, r, cfg);
    if (valley.found) {
      const double rad = r.angle_deg * M_PI / 180.0;
      double ax = std::cos(rad), ay = std::sin(rad);
      if (valley.axis == 1) {
        const double t = -ay;
        ay = ax;
        ax = t;
      }
      const double extent = valley.axis == 0 ? r.width : r.height;
      const double t = valley.position;
      RotatedRect child1 = r, child2 = r;
      const double len1 = t + extent / 2.0;
      const double len2 = extent / 2.0 - t;
      const double off1 = (t - extent / 2.0) / 2.0;
      const double off2 = (t + extent / 2.0) / 2.0;
      if (valley.axis == 0) {
        child1.width = len1;
        child2.width = len2;
      } else {
        child1.height = len1;
        child2.height = len2;
      }
      child1.center = {r.center.x + ax * off1, r.center.y + ay * off1};
      child2.center = {r.center.x + ax * off2, r.center.y + ay * off2};
      if (len1 > 1.0 && len2 > 1.0) {
        safeguard_recurse(child1, grid, cfg, split_depth + 1, out);
        safeguard_recurse(child2, grid, cfg, split_depth + 1, out);
        return;
      }
    }
  }
  out.push_back(r);
}

}  // namespace

OverlapGrid build_overlap_grid(const FrameGroup &group, int width, int height,
                               const FusionConfig &cfg) {
  OverlapGrid grid(width, height);
  std::vector<uint8_t> stamp(static_cast<size_t>(width) * height, 0xFF);
  for (const auto &frame : group.frames) {
    const uint8_t cam = static_cast<uint8_t>(frame.camera_id);
    for (const auto &poly : frame.polygons) {
      for_each_span(poly, width, height, [&](int row, int c0, int c1) {
        const size_t base = static_cast<size_t>(row) * width;
        for (int c = c0; c <= c1; ++c) {
          // A camera contributes at most once per pixel even when its own
          // polygons overlap.
          if (stamp[base + c] != cam) {
            stamp[base + c] = cam;
            ++grid.counts[base + c];
          }
        }
      });
    }
  }
  const size_t total = grid.counts.size();
  for (size_t i = 0; i < total; ++i) {
    grid.scores[i] = static_cast<float>(cfg.point_values[grid.counts[i]]);
  }
  return grid;
}

BinaryMask high_overlap_mask(const OverlapGrid &grid, int min_count) {
  BinaryMask mask(grid.width, grid.height);
  const size_t total = grid.counts.size();
  for (size_t i = 0; i < total; ++i) {
    mask.bits[i] = grid.counts[i] >= min_count ? 1 : 0;
  }
  return mask;
}

double mean_score_in_rect(const OverlapGrid &grid, const RotatedRect &rect) {
  const auto pixels = collect_rect_pixels(grid, rect);
  if (pixels.empty()) return 0.0;
  double sum = 0;
  for (const auto &p : pixels) sum += p.score;
  return sum / static_cast<double>(pixels.size());
}

double mean_count_in_rect(const OverlapGrid &grid, const RotatedRect &rect) {
  const auto corners = rect.corners();
  double minx = corners[0].x, maxx = minx, miny = corners[0].y, maxy = miny;
  for (const auto &c : corners) {
    minx = std::min(minx, c.x);
    maxx = std::max(maxx, c.x);
    miny = std::min(miny, c.y);
    maxy = std::max(maxy, c.y);
  }
  const int r0 = std::max(0, static_cast<int>(std::floor(miny - 0.5)));
  const int r1 = std::min(grid.height - 1, static_cast<int>(std::ceil(maxy)));
  const int c0 = std::max(0, static_cast<int>(std::floor(minx - 0.5)));
  const int c1 = std::min(grid.width - 1, static_cast<int>(std::ceil(maxx)));
  double sum = 0;
  size_t n = 0;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (rect.contains({c + 0.5, r + 0.5}, 1e-9)) {
        sum += grid.count_at(r, c);
        ++n;
      }
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::vector<RotatedRect> apply_safeguards(const RotatedRect &rect, const OverlapGrid &grid,
                                          const FusionConfig &cfg) {
  std::vector<RotatedRect> out;
  safeguard_recurse(rect, grid, cfg, 0, out);
  return out;
}

std::vector<FittedRectangle> fit_rectangles(const OverlapGrid &grid, const FusionConfig &cfg,
                                            int64_t timestamp_ms, int camera_support) {
  std::vector<FittedRectangle> results;
  const BinaryMask mask = high_overlap_mask(grid, cfg.high_overlap_min);
  for (const auto &contour : extract_contours(mask)) {
    if (contour.size() < 3) continue;
    RotatedRect rect;
    try {
      rect = min_area_rect(contour);
    } catch (const DegenerateConfiguration &) {
      continue;
    }
    // Contour vertices are pixel centers; pad by half a pixel so the
    // rectangle covers the pixels themselves.
    rect.width += 1.0;
    rect.height += 1.0;
    if (rect.area() < cfg.min_rect_area_px) continue;
    if (mean_score_in_rect(grid, rect) < cfg.min_mean_score) continue;
    for (const auto &r : apply_safeguards(rect, grid, cfg)) {
      FittedRectangle fitted;
      fitted.rect = r;
      fitted.timestamp_ms = timestamp_ms;
      fitted.camera_support = camera_support;
      fitted.mean_score = mean_score_in_rect(grid, r);
      fitted.corners = r.corners();
      results.push_back(fitted);
    }
  }
  std::sort(results.begin(), results.end(),
            [](const FittedRectangle &a, const FittedRectangle &b) {
              if (a.rect.area() != b.rect.area()) return a.rect.area() > b.rect.area();
              if (a.rect.center.x != b.rect.center.x) return a.rect.center.x < b.rect.center.x;
              return a.rect.center.y < b.rect.center.y;
            });
  return results;
}

std::vector<FittedRectangle> fuse_group(const FrameGroup &group, int width, int height,
                                        const FusionConfig &cfg) {
  const OverlapGrid grid = build_overlap_grid(group, width, height, cfg);
  return fit_rectangles(grid, cfg, group.group_timestamp_ms,
                        static_cast<int>(group.frames.size()));
}

}  // namespace petmap
