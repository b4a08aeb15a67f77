#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "petmap/errors.hpp"
#include "petmap/geometry.hpp"

namespace petmap {

inline constexpr int kNumCameras = 4;
inline constexpr int64_t kDefaultSyncWindowMs = 350;

struct DetectionFrame {
  int camera_id = 0;  // 0..3
  int64_t timestamp_ms = 0;
  std::vector<Polygon> polygons;  // global grid coordinates
};

struct FrameGroup {
  std::vector<DetectionFrame> frames;  // 3 or 4, distinct cameras
  int64_t group_timestamp_ms = 0;
};

/// Mean of member timestamps rounded half away from zero.
int64_t group_timestamp(const std::vector<DetectionFrame> &frames);

/// Buffers per-camera frames and greedily emits groups whose earliest/latest
/// timestamps differ by at most the window. Single-writer; see module docs.
class SyncBuffer {
 public:
  explicit SyncBuffer(int64_t window_ms = kDefaultSyncWindowMs, size_t max_depth = 256)
      : window_ms_(window_ms), max_depth_(max_depth) {}

  /// Throws StaleFrame when the timestamp precedes the last consumed one for
  /// that camera.
  void ingest_frame(DetectionFrame frame);

  /// One matching attempt: anchor on the globally oldest frame, gather the
  /// nearest in-window frame per other camera. 4 or 3 members emit a group;
  /// fewer discard the anchor and return nothing.
  std::optional<FrameGroup> next_group();

  size_t pending(int camera_id) const { return queues_[camera_id].size(); }
  size_t pending_total() const;
  uint64_t overflow_dropped() const { return overflow_dropped_; }
  uint64_t skipped_anchors() const { return skipped_anchors_; }
  int64_t window_ms() const { return window_ms_; }

 private:
  int64_t window_ms_;
  size_t max_depth_;
  std::array<std::deque<DetectionFrame>, kNumCameras> queues_;
  std::array<int64_t, kNumCameras> last_consumed_{-1, -1, -1, -1};
  uint64_t overflow_dropped_ = 0;
  uint64_t skipped_anchors_ = 0;
};

}  // namespace petmap
