#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "petmap/errors.hpp"
#include "petmap/geometry.hpp"
#include "petmap/sync.hpp"

namespace petmap {

// Grid scale matching the default configuration: 800 px across 26.2 m.
inline constexpr double kDefaultMetersPerPixel = 26.2 / 800.0;

struct SimCamera {
  int camera_id = 0;
  Homography global_from_camera;  // calibration ground truth
  Polygon view_polygon;           // global coords; empty = full grid coverage
};

struct SimLane {
  std::vector<Point2> waypoints;  // global px, straight or turning polyline
};

struct SimVehicle {
  int lane = 0;
  double entry_time_s = 0.0;
  double length_m = 4.6;
  double width_m = 1.8;
  double speed_mps = 8.0;
};

struct SimNoise {
  double vertex_jitter_px = 0.0;
  double timestamp_jitter_ms = 0.0;
  double dropout_prob = 0.0;
};

struct SimConfig {
  uint64_t seed = 1;
  double duration_s = 10.0;
  int64_t frame_interval_ms = 350;  // mid-range of the observed 300-400 ms cadence
  int64_t start_time_ms = 1700000000000;
  int grid_width = 1600;
  int grid_height = 1600;
  double meters_per_pixel = kDefaultMetersPerPixel;
  std::vector<SimCamera> cameras;
  std::vector<SimLane> lanes;
  std::vector<SimVehicle> vehicles;
  SimNoise noise;

  double cm_per_pixel() const { return meters_per_pixel * 100.0; }
};

struct GroundTruthVehicle {
  int vehicle_id = 0;
  RotatedRect rect;
};

struct GroundTruthFrame {
  int64_t timestamp_ms = 0;
  std::vector<GroundTruthVehicle> vehicles;
};

struct SimOutput {
  std::vector<GroundTruthFrame> ground_truth;
  std::vector<std::vector<DetectionFrame>> camera_frames;  // indexed by camera
};

SimOutput simulate(const SimConfig &cfg);

struct OracleRoi {
  Point2 origin{400, 400};
  int width = 800;
  int height = 800;
};

/// Mean PET and interval counts computed directly from ground-truth
/// occupancy timelines, independent of the sync/fusion/pet pipeline.
std::pair<std::vector<double>, std::vector<int32_t>> oracle_pet(
    const std::vector<GroundTruthFrame> &frames, const OracleRoi &roi,
    double min_interval_s = 0.2);

/// Camera px -> global px pairs sampled from the camera's true homography.
std::vector<Correspondence> calibration_correspondences(const SimCamera &camera,
                                                        int samples_per_side = 4);

SimConfig sim_config_from_json(const std::string &text);
std::string sim_config_to_json(const SimConfig &cfg);

/// Two crossing lanes through the ROI center with four full-coverage cameras.
SimConfig default_crossing_scenario(uint64_t seed, double duration_s, int vehicle_count);

}  // namespace petmap
