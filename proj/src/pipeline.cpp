#include "petmap/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace petmap {

using nlohmann::json;

PipelineConfig pipeline_config_from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception &e) {
    throw InvalidConfig(std::string("config parse error: ") + e.what());
  }
  PipelineConfig cfg;
  cfg.grid_width = j.value("grid_width", cfg.grid_width);
  cfg.grid_height = j.value("grid_height", cfg.grid_height);
  cfg.roi_x = j.value("roi_x", cfg.roi_x);
  cfg.roi_y = j.value("roi_y", cfg.roi_y);
  cfg.roi_width = j.value("roi_width", cfg.roi_width);
  cfg.roi_height = j.value("roi_height", cfg.roi_height);
  cfg.window_ms = j.value("window_ms", cfg.window_ms);
  cfg.roi_width_m = j.value("roi_width_m", cfg.roi_width_m);
  auto &f = cfg.fusion;
  if (j.contains("point_values")) {
    const auto pv = j["point_values"].get<std::vector<double>>();
    if (pv.size() != 4) throw InvalidConfig("point_values must list scores for counts 1..4");
    for (size_t i = 0; i < 4; ++i) f.point_values[i + 1] = pv[i];
  }
  f.high_overlap_min = j.value("high_overlap_min", f.high_overlap_min);
  f.snap_angle_tol_deg = j.value("snap_angle_tol_deg", f.snap_angle_tol_deg);
  f.snap_aspect_min = j.value("snap_aspect_min", f.snap_aspect_min);
  f.edge_margin_px = j.value("edge_margin_px", f.edge_margin_px);
  f.edge_extend_px = j.value("edge_extend_px", f.edge_extend_px);
  f.split_area_px = j.value("split_area_px", f.split_area_px);
  f.split_valley_ratio = j.value("split_valley_ratio", f.split_valley_ratio);
  f.min_rect_area_px = j.value("min_rect_area_px", f.min_rect_area_px);
  f.min_mean_score = j.value("min_mean_score", f.min_mean_score);
  if (cfg.grid_width <= 0 || cfg.grid_height <= 0 || cfg.roi_width <= 0 ||
      cfg.roi_height <= 0 || cfg.window_ms <= 0) {
    throw InvalidConfig("grid, ROI, and window values must be positive");
  }
  if (f.high_overlap_min < 2 || f.high_overlap_min > 4) {
    throw InvalidConfig("high_overlap_min must be 2, 3, or 4");
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return pipeline_config_from_json(buf.str());
}

RectangleRecord to_record(const FittedRectangle &fitted) {
  RectangleRecord record;
  record.timestamp_ms = fitted.timestamp_ms;
  record.corners = fitted.corners;
  record.camera_support = fitted.camera_support;
  record.mean_score = fitted.mean_score;
  return record;
}

FittedRectangle from_record(const RectangleRecord &record) {
  FittedRectangle fitted;
  fitted.timestamp_ms = record.timestamp_ms;
  fitted.corners = record.corners;
  fitted.camera_support = record.camera_support;
  fitted.mean_score = record.mean_score;
  fitted.rect = RotatedRect::from_corners(record.corners);
  return fitted;
}

std::vector<RectangleRecord> run_fusion(const std::vector<DetectionFrame> &frames,
                                        const PipelineConfig &cfg, FuseStats *stats) {
  SyncBuffer buffer(cfg.window_ms);
  std::vector<DetectionFrame> sorted = frames;
  std::sort(sorted.begin(), sorted.end(),
            [](const DetectionFrame &a, const DetectionFrame &b) {
              return a.timestamp_ms < b.timestamp_ms;
            });
  for (auto &frame : sorted) buffer.ingest_frame(std::move(frame));

  FuseStats local;
  std::vector<RectangleRecord> records;
  while (buffer.pending_total() > 0) {
    auto group = buffer.next_group();
    if (!group) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const auto fitted = fuse_group(*group, cfg.grid_width, cfg.grid_height, cfg.fusion);
    const auto t1 = std::chrono::steady_clock::now();
    local.total_fuse_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (group->frames.size() == 4) {
      ++local.groups_4cam;
    } else {
      ++local.groups_3cam;
    }
    for (const auto &f : fitted) records.push_back(to_record(f));
    local.rectangles += fitted.size();
  }
  local.skipped = buffer.skipped_anchors();
  // Group timestamps are non-decreasing by construction; keep the record
  // stream strictly batch-ordered for the store.
  std::stable_sort(records.begin(), records.end(),
                   [](const RectangleRecord &a, const RectangleRecord &b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });
  if (stats) *stats = local;
  return records;
}

size_t replay_pet(const std::vector<RectangleRecord> &records, PetGrid &grid) {
  size_t events = 0;
  std::vector<FittedRectangle> batch;
  size_t i = 0;
  while (i < records.size()) {
    const int64_t ts = records[i].timestamp_ms;
    batch.clear();
    while (i < records.size() && records[i].timestamp_ms == ts) {
      batch.push_back(from_record(records[i]));
      ++i;
    }
    events += grid.update(batch, ts).size();
  }
  return events;
}

std::vector<DetectionFrame> load_detection_dir(const std::filesystem::path &dir,
                                               size_t *parse_errors) {
  std::vector<DetectionFrame> frames;
  size_t errors = 0;
  if (!std::filesystem::is_directory(dir)) {
    throw StorageFailure("detection directory not found: " + dir.string());
  }
  for (const auto &sub : std::filesystem::directory_iterator(dir)) {
    if (!sub.is_directory()) continue;
    for (const auto &entry : std::filesystem::directory_iterator(sub.path())) {
      if (entry.path().extension() != ".json") continue;
      try {
        const DetectionRecord record = read_detection_file(entry.path());
        frames.push_back({record.camera_id, record.timestamp_ms, record.polygons});
      } catch (const std::exception &) {
        ++errors;
      }
    }
  }
  if (parse_errors) *parse_errors = errors;
  return frames;
}

}  // namespace petmap
