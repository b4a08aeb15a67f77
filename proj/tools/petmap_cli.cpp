// Multi-camera vehicle fusion and Post-Encroachment-Time analytics CLI.
//
// Subcommands: calibrate, simulate, fuse, pet, heatmap, query.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "petmap/pipeline.hpp"
#include "petmap/render.hpp"
#include "petmap/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace petmap;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string slurp(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw StorageFailure("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

PipelineConfig load_config_or_default(const std::string &path) {
  if (path.empty()) return PipelineConfig{};
  return load_pipeline_config(path);
}

int cmd_calibrate(const std::string &input, const std::string &output) {
  const json j = json::parse(slurp(input));
  json out = json::array();
  for (const auto &jc : j) {
    const int camera_id = jc.at("camera_id").get<int>();
    std::vector<Correspondence> pairs;
    for (const auto &jp : jc.at("points")) {
      pairs.push_back({{jp.at("camera_x").get<double>(), jp.at("camera_y").get<double>()},
                       {jp.at("global_x").get<double>(), jp.at("global_y").get<double>()}});
    }
    const Homography h = estimate_homography(pairs);
    double max_err = 0;
    for (const auto &[src, dst] : pairs) {
      const Point2 q = project_point(h, src);
      max_err = std::max(max_err, std::hypot(q.x - dst.x, q.y - dst.y));
    }
    std::cout << "camera " << camera_id << ": max reprojection error " << max_err
              << " px\n";
    json rec;
    rec["camera_id"] = camera_id;
    rec["homography"] = h.m;
    rec["max_reprojection_error_px"] = max_err;
    out.push_back(std::move(rec));
  }
  std::ofstream of(output);
  if (!of) throw StorageFailure("cannot open " + output);
  of << out.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const SimConfig &cfg, const std::string &out_dir) {
  const SimOutput out = simulate(cfg);
  for (size_t ci = 0; ci < out.camera_frames.size(); ++ci) {
    const fs::path sub = fs::path(out_dir) / ("cam" + std::to_string(ci));
    for (const auto &frame : out.camera_frames[ci]) {
      write_detection_file(sub, {frame.camera_id, frame.timestamp_ms, frame.polygons});
    }
  }
  fs::create_directories(out_dir);
  std::ofstream gt(fs::path(out_dir) / "ground_truth.jsonl");
  for (const auto &frame : out.ground_truth) {
    json j;
    j["timestamp_ms"] = frame.timestamp_ms;
    j["vehicles"] = json::array();
    for (const auto &v : frame.vehicles) {
      json corners = json::array();
      for (const auto &c : v.rect.corners()) corners.push_back({c.x, c.y});
      j["vehicles"].push_back({{"vehicle_id", v.vehicle_id}, {"corners", corners}});
    }
    gt << j.dump() << "\n";
  }
  std::cout << "frames " << out.ground_truth.size() << " cameras "
            << out.camera_frames.size() << "\n";
  return 0;
}

int cmd_fuse(const std::string &detections_dir, const std::string &store_dir,
             const PipelineConfig &cfg) {
  size_t parse_errors = 0;
  const auto frames = load_detection_dir(detections_dir, &parse_errors);
  if (parse_errors > 0) {
    std::cerr << "warning: skipped " << parse_errors << " unparsable detection files\n";
  }
  FuseStats stats;
  const auto records = run_fusion(frames, cfg, &stats);
  RecordStore store(store_dir);
  store.append_rectangles(records);
  std::cout << "groups 4-cam " << stats.groups_4cam << ", 3-cam " << stats.groups_3cam
            << ", skipped " << stats.skipped << "\n"
            << "rectangles " << stats.rectangles << "\n"
            << "mean fuse latency " << stats.mean_latency_ms() << " ms/group\n";
  return 0;
}

int cmd_pet(const std::string &store_dir, int64_t from_ms, int64_t to_ms,
            const PipelineConfig &cfg, const std::string &out_prefix, bool heatmaps,
            bool log_colormap, const std::string &background) {
  RecordStore store(store_dir);
  const auto records = store.query_rectangles(from_ms, to_ms);
  PetGrid grid({cfg.roi_x, cfg.roi_y}, cfg.roi_width, cfg.roi_height,
               cfg.grid_width, cfg.grid_height);
  const size_t events = replay_pet(records, grid);

  ValueMatrix mean{grid.roi_width(), grid.roi_height(), grid.mean_pet()};
  ValueMatrix counts{grid.roi_width(), grid.roi_height(), {}};
  counts.values.reserve(mean.values.size());
  for (const auto c : grid.update_counts()) counts.values.push_back(c);

  write_matrix_text(out_prefix + "_mean.txt", mean);
  write_matrix_text(out_prefix + "_counts.txt", counts);
  std::cout << "records " << records.size() << " events " << events << "\n"
            << "scale " << cfg.cm_per_pixel() << " cm/px over " << cfg.roi_width
            << " px = " << cfg.roi_width_m << " m\n";

  if (heatmaps) {
    ColorMapSpec pet_spec;
    pet_spec.kind = log_colormap ? ColorMapSpec::Kind::kLogarithmic
                                 : ColorMapSpec::Kind::kLinear;
    // Domain max: 99th percentile of observed means, floor at 1 s.
    std::vector<double> present;
    for (const double v : mean.values) {
      if (!std::isnan(v)) present.push_back(v);
    }
    if (!present.empty()) {
      std::sort(present.begin(), present.end());
      pet_spec.domain_max =
          std::max(1.0, present[static_cast<size_t>(0.99 * (present.size() - 1))]);
    }
    RasterImage pet_img = render_heatmap(mean, pet_spec);
    if (!background.empty()) {
      pet_img = composite_over_background(pet_img, read_png(background), 0.6,
                                          pet_spec.absent_color);
    }
    write_png(out_prefix + "_mean.png", pet_img);

    ColorMapSpec count_spec;
    count_spec.kind = ColorMapSpec::Kind::kLinear;
    count_spec.low_color = {255, 255, 255};
    count_spec.high_color = {255, 0, 0};  // red = more vehicles
    double max_count = 1.0;
    for (const double v : counts.values) max_count = std::max(max_count, v);
    count_spec.domain_min = 1e-9;
    count_spec.domain_max = max_count;
    ValueMatrix count_vals = counts;
    for (auto &v : count_vals.values) {
      if (v == 0.0) v = std::nan("");
    }
    write_png(out_prefix + "_counts.png", render_heatmap(count_vals, count_spec));
  }
  return 0;
}

int cmd_heatmap(const std::string &matrix_path, const std::string &out_path,
                bool log_colormap, double domain_min, double domain_max) {
  const ValueMatrix m = read_matrix_text(matrix_path);
  ColorMapSpec spec;
  spec.kind = log_colormap ? ColorMapSpec::Kind::kLogarithmic : ColorMapSpec::Kind::kLinear;
  spec.domain_min = domain_min;
  spec.domain_max = domain_max;
  write_png(out_path, render_heatmap(m, spec));
  return 0;
}

int cmd_query(const std::string &store_dir, int64_t from_ms, int64_t to_ms, bool detections) {
  RecordStore store(store_dir);
  if (detections) {
    for (const auto &r : store.query_detections(from_ms, to_ms)) {
      std::cout << detection_record_to_json(r) << "\n";
    }
  } else {
    for (const auto &r : store.query_rectangles(from_ms, to_ms)) {
      std::cout << rectangle_record_to_json(r) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multi-camera vehicle fusion and per-pixel PET analytics"};
  app.require_subcommand(1);

  std::string config_path, input, output, store_dir, out_prefix = "pet";
  std::string background, matrix_path;
  int64_t from_ms = 0, to_ms = std::numeric_limits<int64_t>::max();
  bool heatmaps = false, log_colormap = false, detections = false;
  double domain_min = 0.2, domain_max = 30.0;

  auto *calibrate = app.add_subcommand("calibrate", "Fit per-camera homographies");
  calibrate->add_option("input", input, "correspondence file (json)")->required();
  calibrate->add_option("-o,--out", output, "calibration output file")
      ->default_val("calibration.json");

  uint64_t sim_seed = 1;
  double sim_duration = 30.0;
  int sim_vehicles = 8;
  auto *sim = app.add_subcommand("simulate", "Generate synthetic detections + ground truth");
  auto *scenario_opt = sim->add_option("scenario", input, "scenario file (json)");
  sim->add_option("-o,--out", output, "output directory")->required();
  sim->add_option("--seed", sim_seed, "preset scenario seed")->excludes(scenario_opt);
  sim->add_option("--duration-s", sim_duration, "preset duration")->excludes(scenario_opt);
  sim->add_option("--vehicles", sim_vehicles, "preset vehicle count")->excludes(scenario_opt);

  auto *fuse = app.add_subcommand("fuse", "Sync and fuse detections into rectangles");
  fuse->add_option("detections", input, "detections directory (cam0..cam3)")->required();
  fuse->add_option("--store", store_dir, "record store directory")->required();
  fuse->add_option("--config", config_path, "pipeline config file");

  auto *pet = app.add_subcommand("pet", "Replay rectangles into PET exports");
  pet->add_option("--store", store_dir, "record store directory")->required();
  pet->add_option("--from-ms", from_ms, "range start (inclusive)");
  pet->add_option("--to-ms", to_ms, "range end (exclusive)");
  pet->add_option("--out", out_prefix, "output path prefix");
  pet->add_option("--config", config_path, "pipeline config file");
  pet->add_flag("--heatmap", heatmaps, "also render png heatmaps");
  pet->add_flag("--log-colormap", log_colormap, "logarithmic PET colormap");
  pet->add_option("--background", background, "background png to composite under the heatmap");

  auto *heat = app.add_subcommand("heatmap", "Render a matrix export as a png");
  heat->add_option("matrix", matrix_path, "matrix text file")->required();
  heat->add_option("-o,--out", output, "output png")->required();
  heat->add_flag("--log-colormap", log_colormap, "logarithmic colormap");
  heat->add_option("--min", domain_min, "domain minimum");
  heat->add_option("--max", domain_max, "domain maximum");

  auto *query = app.add_subcommand("query", "Print stored records in a time range");
  query->add_option("--store", store_dir, "record store directory")->required();
  query->add_option("--from-ms", from_ms, "range start (inclusive)");
  query->add_option("--to-ms", to_ms, "range end (exclusive)");
  query->add_flag("--detections", detections, "query detection records instead of rectangles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;  // help exits 0, usage errors 1
  }

  try {
    if (calibrate->parsed()) return cmd_calibrate(input, output);
    if (sim->parsed()) {
      const SimConfig cfg =
          input.empty()
              ? default_crossing_scenario(sim_seed, sim_duration, sim_vehicles)
              : sim_config_from_json(slurp(input));
      return cmd_simulate(cfg, output);
    }
    if (fuse->parsed()) {
      return cmd_fuse(input, store_dir, load_config_or_default(config_path));
    }
    if (pet->parsed()) {
      return cmd_pet(store_dir, from_ms, to_ms, load_config_or_default(config_path),
                     out_prefix, heatmaps, log_colormap, background);
    }
    if (heat->parsed()) {
      return cmd_heatmap(matrix_path, output, log_colormap, domain_min, domain_max);
    }
    if (query->parsed()) return cmd_query(store_dir, from_ms, to_ms, detections);
  } catch (const InvalidConfig &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
