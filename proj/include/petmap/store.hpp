#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "petmap/errors.hpp"
#include "petmap/geometry.hpp"
#include "petmap/sync.hpp"

namespace petmap {

struct RectangleRecord {
  int64_t timestamp_ms = 0;
  std::array<Point2, 4> corners{};
  int camera_support = 4;  // 3 or 4
  double mean_score = 0.0;
};

struct DetectionRecord {
  int camera_id = 0;
  int64_t timestamp_ms = 0;
  std::vector<Polygon> polygons;
};

std::string detection_record_to_json(const DetectionRecord &record);
DetectionRecord detection_record_from_json(const std::string &text);
std::string rectangle_record_to_json(const RectangleRecord &record);
RectangleRecord rectangle_record_from_json(const std::string &text);

/// One detection frame per file, named `<unix_ms>.json`.
void write_detection_file(const std::filesystem::path &dir, const DetectionRecord &record);
DetectionRecord read_detection_file(const std::filesystem::path &file);

/// Append-only record store: newline-delimited JSON in daily segment files
/// under one directory. Single writer, readers see flushed records only;
/// a torn trailing line (no newline) is ignored on read.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path dir);

  /// Batches must be timestamp-ordered internally.
  void append_rectangles(const std::vector<RectangleRecord> &records);
  void append_detections(const std::vector<DetectionRecord> &records);

  /// Half-open range [t0, t1), ascending by timestamp, ties in insertion order.
  std::vector<RectangleRecord> query_rectangles(int64_t t0_ms, int64_t t1_ms) const;
  std::vector<DetectionRecord> query_detections(int64_t t0_ms, int64_t t1_ms) const;

  const std::filesystem::path &dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace petmap
