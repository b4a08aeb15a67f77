#include "petmap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

namespace petmap {

using nlohmann::json;

namespace {

double polyline_length(const std::vector<Point2> &pts) {
  double len = 0;
  for (size_t i = 1; i < pts.size(); ++i) {
    len += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  }
  return len;
}

// Position and heading at arc length s along the polyline.
bool polyline_at(const std::vector<Point2> &pts, double s, Point2 &pos, double &heading_rad) {
  if (s < 0) return false;
  for (size_t i = 1; i < pts.size(); ++i) {
    const double dx = pts[i].x - pts[i - 1].x;
    const double dy = pts[i].y - pts[i - 1].y;
    const double seg = std::hypot(dx, dy);
    if (s <= seg) {
      const double f = seg > 0 ? s / seg : 0.0;
      pos = {pts[i - 1].x + f * dx, pts[i - 1].y + f * dy};
      heading_rad = std::atan2(dy, dx);
      return true;
    }
    s -= seg;
  }
  return false;
}

RotatedRect vehicle_rect(const Point2 &center, double heading_rad, double length_px,
                         double width_px) {
  const double ux = std::cos(heading_rad), uy = std::sin(heading_rad);
  const double vx = -uy, vy = ux;
  const double hl = length_px / 2.0, hw = width_px / 2.0;
  return RotatedRect::from_corners(
      {Point2{center.x - ux * hl - vx * hw, center.y - uy * hl - vy * hw},
       Point2{center.x + ux * hl - vx * hw, center.y + uy * hl - vy * hw},
       Point2{center.x + ux * hl + vx * hw, center.y + uy * hl + vy * hw},
       Point2{center.x - ux * hl + vx * hw, center.y - uy * hl + vy * hw}});
}

bool rect_in_view(const RotatedRect &rect, const Polygon &view) {
  if (view.empty()) return true;
  if (point_in_polygon(view, rect.center)) return true;
  for (const auto &c : rect.corners()) {
    if (point_in_polygon(view, c)) return true;
  }
  return false;
}

void validate(const SimConfig &cfg) {
  if (cfg.frame_interval_ms <= 0) throw InvalidConfig("frame_interval_ms must be positive");
  if (cfg.duration_s < 0) throw InvalidConfig("duration_s must be non-negative");
  if (cfg.meters_per_pixel <= 0) throw InvalidConfig("meters_per_pixel must be positive");
  if (cfg.cameras.size() > static_cast<size_t>(kNumCameras)) {
    throw InvalidConfig("at most 4 cameras");
  }
  for (const auto &v : cfg.vehicles) {
    if (v.lane < 0 || static_cast<size_t>(v.lane) >= cfg.lanes.size()) {
      throw InvalidConfig("vehicle references unknown lane");
    }
    if (v.speed_mps <= 0 || v.length_m <= 0 || v.width_m <= 0) {
      throw InvalidConfig("vehicle dimensions and speed must be positive");
    }
  }
}

}  // namespace

SimOutput simulate(const SimConfig &cfg) {
  validate(cfg);
  SimOutput out;
  out.camera_frames.resize(cfg.cameras.size());

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> vertex_jitter(0.0, 1.0);
  std::normal_distribution<double> ts_jitter(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const int64_t steps = static_cast<int64_t>(cfg.duration_s * 1000.0) / cfg.frame_interval_ms;
  for (int64_t k = 0; k <= steps; ++k) {
    const int64_t t_ms = cfg.start_time_ms + k * cfg.frame_interval_ms;
    const double t_s = static_cast<double>(k * cfg.frame_interval_ms) / 1000.0;

    GroundTruthFrame gt;
    gt.timestamp_ms = t_ms;
    for (size_t vi = 0; vi < cfg.vehicles.size(); ++vi) {
      const auto &v = cfg.vehicles[vi];
      const double s_px = (t_s - v.entry_time_s) * v.speed_mps / cfg.meters_per_pixel;
      Point2 pos;
      double heading = 0;
      if (t_s < v.entry_time_s || !polyline_at(cfg.lanes[v.lane].waypoints, s_px, pos, heading)) {
        continue;
      }
      GroundTruthVehicle gtv;
      gtv.vehicle_id = static_cast<int>(vi);
      gtv.rect = vehicle_rect(pos, heading, v.length_m / cfg.meters_per_pixel,
                              v.width_m / cfg.meters_per_pixel);
      gt.vehicles.push_back(gtv);
    }

    for (size_t ci = 0; ci < cfg.cameras.size(); ++ci) {
      const auto &cam = cfg.cameras[ci];
      const bool dropped = cfg.noise.dropout_prob > 0 && uniform(rng) < cfg.noise.dropout_prob;
      int64_t ts = t_ms;
      if (cfg.noise.timestamp_jitter_ms > 0) {
        ts += static_cast<int64_t>(std::llround(ts_jitter(rng) * cfg.noise.timestamp_jitter_ms));
      }
      if (dropped) continue;
      DetectionFrame frame;
      frame.camera_id = cam.camera_id;
      frame.timestamp_ms = ts;
      for (const auto &gtv : gt.vehicles) {
        if (!rect_in_view(gtv.rect, cam.view_polygon)) continue;
        Polygon poly;
        for (const auto &c : gtv.rect.corners()) {
          double x = c.x, y = c.y;
          if (cfg.noise.vertex_jitter_px > 0) {
            x += vertex_jitter(rng) * cfg.noise.vertex_jitter_px;
            y += vertex_jitter(rng) * cfg.noise.vertex_jitter_px;
          }
          poly.push_back({x, y});
        }
        frame.polygons.push_back(std::move(poly));
      }
      out.camera_frames[ci].push_back(std::move(frame));
    }
    out.ground_truth.push_back(std::move(gt));
  }
  return out;
}

std::pair<std::vector<double>, std::vector<int32_t>> oracle_pet(
    const std::vector<GroundTruthFrame> &frames, const OracleRoi &roi,
    double min_interval_s) {
  const size_t n = static_cast<size_t>(roi.width) * roi.height;
  std::vector<double> stopwatch(n, 0.0), sum(n, 0.0);
  std::vector<int32_t> count(n, 0);
  std::vector<uint8_t> ever(n, 0);
  BinaryMask occ(roi.width, roi.height);

  bool have_base = false;
  int64_t last_ms = 0;
  for (const auto &frame : frames) {
    const double dt = have_base ? (frame.timestamp_ms - last_ms) / 1000.0 : 0.0;
    std::fill(occ.bits.begin(), occ.bits.end(), uint8_t{0});
    for (const auto &gtv : frame.vehicles) {
      Polygon poly;
      for (const auto &c : gtv.rect.corners()) {
        poly.push_back({c.x - roi.origin.x, c.y - roi.origin.y});
      }
      rasterize_polygon_into(poly, occ);
    }
    for (size_t i = 0; i < n; ++i) {
      if (occ.bits[i]) {
        if (ever[i] && stopwatch[i] >= min_interval_s) {
          sum[i] += stopwatch[i];
          count[i] += 1;
        }
        stopwatch[i] = 0.0;
        ever[i] = 1;
      } else {
        stopwatch[i] += dt;
      }
    }
    have_base = true;
    last_ms = frame.timestamp_ms;
  }

  std::vector<double> mean(n, std::numeric_limits<double>::quiet_NaN());
  for (size_t i = 0; i < n; ++i) {
    if (count[i] > 0) mean[i] = sum[i] / count[i];
  }
  return {std::move(mean), std::move(count)};
}

std::vector<Correspondence> calibration_correspondences(const SimCamera &camera,
                                                        int samples_per_side) {
  const Homography global_to_camera = camera.global_from_camera.inverse();
  std::vector<Correspondence> out;
  for (int i = 0; i < samples_per_side; ++i) {
    for (int j = 0; j < samples_per_side; ++j) {
      const Point2 global{100.0 + 1400.0 * j / (samples_per_side - 1),
                          100.0 + 1400.0 * i / (samples_per_side - 1)};
      out.emplace_back(project_point(global_to_camera, global), global);
    }
  }
  return out;
}

namespace {

json point_to_json(const Point2 &p) { return json::array({p.x, p.y}); }
Point2 point_from_json(const json &j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

std::string sim_config_to_json(const SimConfig &cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["duration_s"] = cfg.duration_s;
  j["frame_interval_ms"] = cfg.frame_interval_ms;
  j["start_time_ms"] = cfg.start_time_ms;
  j["grid_width"] = cfg.grid_width;
  j["grid_height"] = cfg.grid_height;
  j["meters_per_pixel"] = cfg.meters_per_pixel;
  j["cameras"] = json::array();
  for (const auto &cam : cfg.cameras) {
    json jc;
    jc["camera_id"] = cam.camera_id;
    jc["global_from_camera"] = cam.global_from_camera.m;
    jc["view_polygon"] = json::array();
    for (const auto &p : cam.view_polygon) jc["view_polygon"].push_back(point_to_json(p));
    j["cameras"].push_back(std::move(jc));
  }
  j["lanes"] = json::array();
  for (const auto &lane : cfg.lanes) {
    json jl = json::array();
    for (const auto &p : lane.waypoints) jl.push_back(point_to_json(p));
    j["lanes"].push_back(std::move(jl));
  }
  j["vehicles"] = json::array();
  for (const auto &v : cfg.vehicles) {
    j["vehicles"].push_back({{"lane", v.lane},
                             {"entry_time_s", v.entry_time_s},
                             {"length_m", v.length_m},
                             {"width_m", v.width_m},
                             {"speed_mps", v.speed_mps}});
  }
  j["noise"] = {{"vertex_jitter_px", cfg.noise.vertex_jitter_px},
                {"timestamp_jitter_ms", cfg.noise.timestamp_jitter_ms},
                {"dropout_prob", cfg.noise.dropout_prob}};
  return j.dump(2);
}

SimConfig sim_config_from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception &e) {
    throw InvalidConfig(std::string("scenario parse error: ") + e.what());
  }
  SimConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.duration_s = j.value("duration_s", cfg.duration_s);
  cfg.frame_interval_ms = j.value("frame_interval_ms", cfg.frame_interval_ms);
  cfg.start_time_ms = j.value("start_time_ms", cfg.start_time_ms);
  cfg.grid_width = j.value("grid_width", cfg.grid_width);
  cfg.grid_height = j.value("grid_height", cfg.grid_height);
  cfg.meters_per_pixel = j.value("meters_per_pixel", cfg.meters_per_pixel);
  if (j.contains("cameras")) {
    for (const auto &jc : j["cameras"]) {
      SimCamera cam;
      cam.camera_id = jc.at("camera_id").get<int>();
      if (jc.contains("global_from_camera")) {
        cam.global_from_camera =
            Homography::from_rows(jc["global_from_camera"].get<std::array<double, 9>>());
      }
      if (jc.contains("view_polygon")) {
        for (const auto &jp : jc["view_polygon"]) cam.view_polygon.push_back(point_from_json(jp));
      }
      cfg.cameras.push_back(std::move(cam));
    }
  }
  if (j.contains("lanes")) {
    for (const auto &jl : j["lanes"]) {
      SimLane lane;
      for (const auto &jp : jl) lane.waypoints.push_back(point_from_json(jp));
      cfg.lanes.push_back(std::move(lane));
    }
  }
  if (j.contains("vehicles")) {
    for (const auto &jv : j["vehicles"]) {
      SimVehicle v;
      v.lane = jv.value("lane", 0);
      v.entry_time_s = jv.value("entry_time_s", 0.0);
      v.length_m = jv.value("length_m", v.length_m);
      v.width_m = jv.value("width_m", v.width_m);
      v.speed_mps = jv.value("speed_mps", v.speed_mps);
      cfg.vehicles.push_back(v);
    }
  }
  if (j.contains("noise")) {
    const auto &jn = j["noise"];
    cfg.noise.vertex_jitter_px = jn.value("vertex_jitter_px", 0.0);
    cfg.noise.timestamp_jitter_ms = jn.value("timestamp_jitter_ms", 0.0);
    cfg.noise.dropout_prob = jn.value("dropout_prob", 0.0);
  }
  validate(cfg);
  return cfg;
}

SimConfig default_crossing_scenario(uint64_t seed, double duration_s, int vehicle_count) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.duration_s = duration_s;

  // Four full-coverage cameras with mildly differing perspectives.
  for (int i = 0; i < kNumCameras; ++i) {
    SimCamera cam;
    cam.camera_id = i;
    const double k = 1e-5 * (i + 1);
    cam.global_from_camera = Homography::from_rows(
        {1.0 + 0.05 * i, 0.01 * i, 20.0 * i, -0.01 * i, 1.0 - 0.02 * i, 10.0 * i, k, -k, 1.0});
    cam.view_polygon = {{0, 0},
                        {static_cast<double>(cfg.grid_width), 0},
                        {static_cast<double>(cfg.grid_width), static_cast<double>(cfg.grid_height)},
                        {0, static_cast<double>(cfg.grid_height)}};
    cfg.cameras.push_back(std::move(cam));
  }

  // One west-east lane and one north-south lane crossing at the ROI center,
  // plus offset parallels so vehicles spread over the ROI.
  cfg.lanes.push_back({{{200, 760}, {1400, 760}}});
  cfg.lanes.push_back({{{840, 200}, {840, 1400}}});
  cfg.lanes.push_back({{{1400, 900}, {200, 900}}});
  cfg.lanes.push_back({{{700, 1400}, {700, 200}}});

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> speed(6.0, 12.0);
  for (int i = 0; i < vehicle_count; ++i) {
    SimVehicle v;
    v.lane = i % static_cast<int>(cfg.lanes.size());
    v.entry_time_s = 0.8 * i;
    v.speed_mps = speed(rng);
    cfg.vehicles.push_back(v);
  }
  return cfg;
}

}  // namespace petmap
