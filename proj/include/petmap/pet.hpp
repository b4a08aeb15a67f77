#pragma once

#include <cstdint>
#include <vector>

#include "petmap/errors.hpp"
#include "petmap/fusion.hpp"
#include "petmap/geometry.hpp"

namespace petmap {

inline constexpr double kMinPetIntervalS = 0.2;
inline constexpr int kDefaultRoiOrigin = 400;
inline constexpr int kDefaultRoiSize = 800;

struct PetEvent {
  int row = 0;  // ROI-local indices
  int col = 0;
  double interval_s = 0.0;
  int64_t end_timestamp_ms = 0;
};

/// Per-pixel stopwatch state over the region of interest. Single writer with
/// strictly increasing timestamps.
class PetGrid {
 public:
  PetGrid(Point2 roi_origin, int roi_width, int roi_height,
          int grid_width = kDefaultGridSize, int grid_height = kDefaultGridSize);
  static PetGrid with_defaults();

  /// Advances time to timestamp_ms, accumulating vacancy on unoccupied pixels
  /// and closing intervals where a vehicle re-enters. First call only sets
  /// the time base (dt = 0).
  std::vector<PetEvent> update(const std::vector<FittedRectangle> &rectangles,
                               int64_t timestamp_ms);

  /// Mean PET per pixel (sum/count); NaN where no interval was observed.
  std::vector<double> mean_pet() const;
  /// Interval count per pixel.
  const std::vector<int32_t> &update_counts() const { return count_; }
  const std::vector<double> &interval_sums() const { return sum_s_; }
  const std::vector<double> &stopwatch() const { return stopwatch_s_; }

  Point2 roi_origin() const { return roi_origin_; }
  int roi_width() const { return roi_width_; }
  int roi_height() const { return roi_height_; }
  bool has_time_base() const { return has_time_base_; }
  int64_t last_update_ms() const { return last_update_ms_; }

 private:
  Point2 roi_origin_;
  int roi_width_;
  int roi_height_;
  std::vector<double> stopwatch_s_;
  std::vector<double> sum_s_;
  std::vector<int32_t> count_;
  std::vector<uint8_t> ever_occupied_;
  BinaryMask occupancy_;  // scratch, reused between updates
  bool has_time_base_ = false;
  int64_t last_update_ms_ = 0;
};

}  // namespace petmap
