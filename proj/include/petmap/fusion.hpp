#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "petmap/geometry.hpp"
#include "petmap/sync.hpp"

namespace petmap {

inline constexpr int kDefaultGridSize = 1600;

struct FusionConfig {
  // Point value per camera count; index = count (0..4).
  std::array<double, 5> point_values{0, 1, 2, 6, 8};
  int high_overlap_min = 3;
  double snap_angle_tol_deg = 5.0;
  double snap_aspect_min = 1.5;
  double edge_margin_px = 10.0;
  double edge_extend_px = 60.0;
  double split_area_px = 26000.0;
  double split_valley_ratio = 0.5;
  double min_rect_area_px = 1500.0;
  double min_mean_score = 4.0;
};

/// Per-pixel camera count (0..4) and derived point-value score.
struct OverlapGrid {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> counts;
  std::vector<float> scores;

  OverlapGrid() = default;
  OverlapGrid(int w, int h)
      : width(w), height(h), counts(static_cast<size_t>(w) * h, 0),
        scores(static_cast<size_t>(w) * h, 0.0f) {}

  uint8_t count_at(int row, int col) const {
    return counts[static_cast<size_t>(row) * width + col];
  }
  float score_at(int row, int col) const {
    return scores[static_cast<size_t>(row) * width + col];
  }
};

struct FittedRectangle {
  RotatedRect rect;
  int64_t timestamp_ms = 0;
  int camera_support = 0;  // 3 or 4
  double mean_score = 0.0;
  std::array<Point2, 4> corners{};  // CCW, derived from rect
};

OverlapGrid build_overlap_grid(const FrameGroup &group, int width, int height,
                               const FusionConfig &cfg = {});

BinaryMask high_overlap_mask(const OverlapGrid &grid, int min_count);

/// Mean point value over pixels whose centers fall inside the rectangle.
double mean_score_in_rect(const OverlapGrid &grid, const RotatedRect &rect);
double mean_count_in_rect(const OverlapGrid &grid, const RotatedRect &rect);

/// Snap / extend / split, in that order. Returns one or more rectangles.
std::vector<RotatedRect> apply_safeguards(const RotatedRect &rect, const OverlapGrid &grid,
                                          const FusionConfig &cfg);

std::vector<FittedRectangle> fit_rectangles(const OverlapGrid &grid, const FusionConfig &cfg,
                                            int64_t timestamp_ms = 0, int camera_support = 4);

/// build_overlap_grid + fit_rectangles for one synchronized group.
std::vector<FittedRectangle> fuse_group(const FrameGroup &group, int width, int height,
                                        const FusionConfig &cfg);

}  // namespace petmap
