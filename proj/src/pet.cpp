#include "petmap/pet.hpp"

#include <cmath>
#include <limits>

namespace petmap {

PetGrid::PetGrid(Point2 roi_origin, int roi_width, int roi_height, int grid_width,
                 int grid_height)
    : roi_origin_(roi_origin), roi_width_(roi_width), roi_height_(roi_height) {
  if (roi_width <= 0 || roi_height <= 0 || roi_origin.x < 0 || roi_origin.y < 0 ||
      roi_origin.x + roi_width > grid_width || roi_origin.y + roi_height > grid_height) {
    throw RoiOutOfBounds("ROI does not fit inside the global grid");
  }
  const size_t n = static_cast<size_t>(roi_width) * roi_height;
  stopwatch_s_.assign(n, 0.0);
  sum_s_.assign(n, 0.0);
  count_.assign(n, 0);
  ever_occupied_.assign(n, 0);
  occupancy_ = BinaryMask(roi_width, roi_height);
}

PetGrid PetGrid::with_defaults() {
  return PetGrid({kDefaultRoiOrigin, kDefaultRoiOrigin}, kDefaultRoiSize, kDefaultRoiSize);
}

std::vector<PetEvent> PetGrid::update(const std::vector<FittedRectangle> &rectangles,
                                      int64_t timestamp_ms) {
  if (has_time_base_ && timestamp_ms <= last_update_ms_) {
    throw NonMonotonicTimestamp("update timestamp must increase");
  }
  const double dt = has_time_base_ ? (timestamp_ms - last_update_ms_) / 1000.0 : 0.0;

  std::fill(occupancy_.bits.begin(), occupancy_.bits.end(), uint8_t{0});
  for (const auto &fitted : rectangles) {
    Polygon poly;
    poly.reserve(4);
    for (const auto &c : fitted.corners) {
      poly.push_back({c.x - roi_origin_.x, c.y - roi_origin_.y});
    }
    rasterize_polygon_into(poly, occupancy_);
  }

  std::vector<PetEvent> events;
  const size_t n = stopwatch_s_.size();
  for (size_t i = 0; i < n; ++i) {
    if (occupancy_.bits[i]) {
      if (ever_occupied_[i] && stopwatch_s_[i] >= kMinPetIntervalS) {
        PetEvent ev;
        ev.row = static_cast<int>(i) / roi_width_;
        ev.col = static_cast<int>(i) % roi_width_;
        ev.interval_s = stopwatch_s_[i];
        ev.end_timestamp_ms = timestamp_ms;
        events.push_back(ev);
        sum_s_[i] += stopwatch_s_[i];
        count_[i] += 1;
      }
      stopwatch_s_[i] = 0.0;
      ever_occupied_[i] = 1;
    } else {
      stopwatch_s_[i] += dt;
    }
  }
  has_time_base_ = true;
  last_update_ms_ = timestamp_ms;
  return events;
}

std::vector<double> PetGrid::mean_pet() const {
  std::vector<double> out(sum_s_.size(), std::numeric_limits<double>::quiet_NaN());
  for (size_t i = 0; i < sum_s_.size(); ++i) {
    if (count_[i] > 0) out[i] = sum_s_[i] / count_[i];
  }
  return out;
}

}  // namespace petmap
