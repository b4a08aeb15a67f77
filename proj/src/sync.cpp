#include "petmap/sync.hpp"

#include <algorithm>
#include <cstdlib>

namespace petmap {

int64_t group_timestamp(const std::vector<DetectionFrame> &frames) {
  int64_t sum = 0;
  for (const auto &f : frames) sum += f.timestamp_ms;
  const int64_t n = static_cast<int64_t>(frames.size());
  const int64_t q = sum / n;
  const int64_t r = sum % n;
  // Round half away from zero; timestamps are positive but keep the sign
  // handling exact for the general contract.
  if (2 * std::llabs(r) >= n) return q + (sum >= 0 ? 1 : -1);
  return q;
}

void SyncBuffer::ingest_frame(DetectionFrame frame) {
  auto &queue = queues_[frame.camera_id];
  if (frame.timestamp_ms < last_consumed_[frame.camera_id]) {
    throw StaleFrame("frame older than last consumed timestamp for camera " +
                     std::to_string(frame.camera_id));
  }
  auto it = std::upper_bound(
      queue.begin(), queue.end(), frame.timestamp_ms,
      [](int64_t t, const DetectionFrame &f) { return t < f.timestamp_ms; });
  queue.insert(it, std::move(frame));
  if (queue.size() > max_depth_) {
    queue.pop_front();
    ++overflow_dropped_;
  }
}

size_t SyncBuffer::pending_total() const {
  size_t total = 0;
  for (const auto &q : queues_) total += q.size();
  return total;
}

std::optional<FrameGroup> SyncBuffer::next_group() {
  // Anchor: globally oldest unconsumed frame, ties to the lowest camera id.
  int anchor_cam = -1;
  int64_t anchor_ts = 0;
  for (int cam = 0; cam < kNumCameras; ++cam) {
    if (queues_[cam].empty()) continue;
    const int64_t ts = queues_[cam].front().timestamp_ms;
    if (anchor_cam < 0 || ts < anchor_ts) {
      anchor_cam = cam;
      anchor_ts = ts;
    }
  }
  if (anchor_cam < 0) return std::nullopt;

  // Every partner is >= the anchor, so the group disparity bound reduces to
  // partner - anchor <= window; the closest candidate is the earliest one.
  std::vector<int> members{anchor_cam};
  std::vector<size_t> member_pos{0};
  for (int cam = 0; cam < kNumCameras; ++cam) {
    if (cam == anchor_cam) continue;
    const auto &queue = queues_[cam];
    for (size_t i = 0; i < queue.size(); ++i) {
      const int64_t ts = queue[i].timestamp_ms;
      if (ts > anchor_ts + window_ms_) break;
      members.push_back(cam);
      member_pos.push_back(i);
      break;
    }
  }

  if (members.size() < 3) {
    queues_[anchor_cam].pop_front();
    last_consumed_[anchor_cam] = std::max(last_consumed_[anchor_cam], anchor_ts);
    ++skipped_anchors_;
    return std::nullopt;
  }

  FrameGroup group;
  for (size_t k = 0; k < members.size(); ++k) {
    const int cam = members[k];
    auto &queue = queues_[cam];
    DetectionFrame frame = std::move(queue[member_pos[k]]);
    queue.erase(queue.begin() + static_cast<ptrdiff_t>(member_pos[k]));
    last_consumed_[cam] = std::max(last_consumed_[cam], frame.timestamp_ms);
    group.frames.push_back(std::move(frame));
  }
  std::sort(group.frames.begin(), group.frames.end(),
            [](const DetectionFrame &a, const DetectionFrame &b) {
              return a.camera_id < b.camera_id;
            });
  group.group_timestamp_ms = group_timestamp(group.frames);
  return group;
}

}  // namespace petmap
