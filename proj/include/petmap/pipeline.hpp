#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "petmap/fusion.hpp"
#include "petmap/pet.hpp"
#include "petmap/store.hpp"
#include "petmap/sync.hpp"

namespace petmap {

struct PipelineConfig {
  int grid_width = kDefaultGridSize;
  int grid_height = kDefaultGridSize;
  double roi_x = kDefaultRoiOrigin;
  double roi_y = kDefaultRoiOrigin;
  int roi_width = kDefaultRoiSize;
  int roi_height = kDefaultRoiSize;
  int64_t window_ms = kDefaultSyncWindowMs;
  double roi_width_m = 26.2;
  FusionConfig fusion;

  double cm_per_pixel() const { return roi_width_m / roi_width * 100.0; }
};

PipelineConfig pipeline_config_from_json(const std::string &text);
PipelineConfig load_pipeline_config(const std::filesystem::path &path);

struct FuseStats {
  uint64_t groups_4cam = 0;
  uint64_t groups_3cam = 0;
  uint64_t skipped = 0;
  uint64_t rectangles = 0;
  double total_fuse_ms = 0.0;

  uint64_t groups() const { return groups_4cam + groups_3cam; }
  double mean_latency_ms() const {
    return groups() ? total_fuse_ms / static_cast<double>(groups()) : 0.0;
  }
};

RectangleRecord to_record(const FittedRectangle &fitted);
FittedRectangle from_record(const RectangleRecord &record);

/// Ingests every frame, drains the sync buffer, and fuses each group.
std::vector<RectangleRecord> run_fusion(const std::vector<DetectionFrame> &frames,
                                        const PipelineConfig &cfg, FuseStats *stats = nullptr);

/// Replays timestamp-ordered rectangle records through a PET grid; records
/// sharing one timestamp form one update.
size_t replay_pet(const std::vector<RectangleRecord> &records, PetGrid &grid);

/// Loads `<unix_ms>.json` detection files from per-camera subdirectories
/// (any directory whose name ends in the camera digit, e.g. cam0..cam3).
std::vector<DetectionFrame> load_detection_dir(const std::filesystem::path &dir,
                                               size_t *parse_errors = nullptr);

}  // namespace petmap
