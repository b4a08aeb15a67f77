#include "petmap/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace petmap {

using nlohmann::json;

namespace {

json polygons_to_json(const std::vector<Polygon> &polygons) {
  json out = json::array();
  for (const auto &poly : polygons) {
    json jp = json::array();
    for (const auto &v : poly) jp.push_back({v.x, v.y});
    out.push_back(std::move(jp));
  }
  return out;
}

std::vector<Polygon> polygons_from_json(const json &j) {
  std::vector<Polygon> out;
  for (const auto &jp : j) {
    Polygon poly;
    for (const auto &v : jp) poly.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    out.push_back(std::move(poly));
  }
  return out;
}

// Segment key: UTC day of the timestamp.
int64_t day_of(int64_t timestamp_ms) {
  // Floor division keeps pre-epoch timestamps in a well-defined segment.
  const int64_t day_ms = 86400000;
  int64_t d = timestamp_ms / day_ms;
  if (timestamp_ms % day_ms < 0) --d;
  return d;
}

std::filesystem::path segment_path(const std::filesystem::path &dir, const char *prefix,
                                   int64_t day) {
  return dir / (std::string(prefix) + "-" + std::to_string(day) + ".jsonl");
}

template <typename Record, typename ToJson>
void append_records(const std::filesystem::path &dir, const char *prefix,
                    const std::vector<Record> &records, ToJson &&to_json_line) {
  if (records.empty()) return;
  for (size_t i = 1; i < records.size(); ++i) {
    if (records[i].timestamp_ms < records[i - 1].timestamp_ms) {
      throw StorageFailure("batch is not timestamp-ordered");
    }
  }
  std::FILE *fp = nullptr;
  int64_t open_day = INT64_MIN;
  for (const auto &record : records) {
    const int64_t day = day_of(record.timestamp_ms);
    if (day != open_day) {
      if (fp) {
        std::fflush(fp);
        std::fclose(fp);
      }
      const auto path = segment_path(dir, prefix, day);
      fp = std::fopen(path.string().c_str(), "ab");
      if (!fp) throw StorageFailure("cannot open segment " + path.string());
      open_day = day;
    }
    const std::string line = to_json_line(record) + "\n";
    if (std::fwrite(line.data(), 1, line.size(), fp) != line.size()) {
      std::fclose(fp);
      throw StorageFailure("short write to segment");
    }
  }
  if (fp) {
    std::fflush(fp);
    std::fclose(fp);
  }
}

template <typename Record, typename FromJson>
std::vector<Record> query_records(const std::filesystem::path &dir, const char *prefix,
                                  int64_t t0_ms, int64_t t1_ms, FromJson &&from_json_line) {
  if (t0_ms > t1_ms) throw InvalidRange("query start is after end");
  std::vector<Record> out;
  if (t0_ms == t1_ms) return out;
  const int64_t day0 = day_of(t0_ms);
  const int64_t day1 = day_of(t1_ms - 1);
  // Scan existing segments rather than the day range, which may be huge.
  const std::string want_prefix = std::string(prefix) + "-";
  std::vector<std::pair<int64_t, std::filesystem::path>> segments;
  std::error_code ec;
  for (const auto &entry : std::filesystem::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(want_prefix, 0) != 0 || !name.ends_with(".jsonl")) continue;
    const std::string digits =
        name.substr(want_prefix.size(), name.size() - want_prefix.size() - 6);
    int64_t day = 0;
    try {
      day = std::stoll(digits);
    } catch (const std::exception &) {
      continue;
    }
    if (day >= day0 && day <= day1) segments.emplace_back(day, entry.path());
  }
  std::sort(segments.begin(), segments.end());
  for (const auto &[day, path] : segments) {
    std::ifstream in(path);
    if (!in) continue;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Record record;
      try {
        record = from_json_line(line);
      } catch (const std::exception &) {
        if (in.eof()) break;  // torn trailing record from an interrupted append
        throw StorageFailure("corrupt record in " + path.string());
      }
      if (record.timestamp_ms >= t0_ms && record.timestamp_ms < t1_ms) {
        out.push_back(std::move(record));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Record &a, const Record &b) {
    return a.timestamp_ms < b.timestamp_ms;
  });
  return out;
}

}  // namespace

std::string detection_record_to_json(const DetectionRecord &record) {
  json j;
  j["camera_id"] = record.camera_id;
  j["timestamp_ms"] = record.timestamp_ms;
  j["polygons"] = polygons_to_json(record.polygons);
  return j.dump();
}

DetectionRecord detection_record_from_json(const std::string &text) {
  const json j = json::parse(text);
  DetectionRecord record;
  record.camera_id = j.at("camera_id").get<int>();
  record.timestamp_ms = j.at("timestamp_ms").get<int64_t>();
  record.polygons = polygons_from_json(j.at("polygons"));
  return record;
}

std::string rectangle_record_to_json(const RectangleRecord &record) {
  json j;
  j["timestamp_ms"] = record.timestamp_ms;
  json corners = json::array();
  for (const auto &c : record.corners) corners.push_back({c.x, c.y});
  j["corners"] = std::move(corners);
  j["camera_support"] = record.camera_support;
  j["mean_score"] = record.mean_score;
  return j.dump();
}

RectangleRecord rectangle_record_from_json(const std::string &text) {
  const json j = json::parse(text);
  RectangleRecord record;
  record.timestamp_ms = j.at("timestamp_ms").get<int64_t>();
  const auto &corners = j.at("corners");
  for (size_t i = 0; i < 4; ++i) {
    record.corners[i] = {corners.at(i).at(0).get<double>(), corners.at(i).at(1).get<double>()};
  }
  record.camera_support = j.at("camera_support").get<int>();
  record.mean_score = j.at("mean_score").get<double>();
  return record;
}

void write_detection_file(const std::filesystem::path &dir, const DetectionRecord &record) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (std::to_string(record.timestamp_ms) + ".json");
  std::ofstream out(path);
  if (!out) throw StorageFailure("cannot open " + path.string());
  out << detection_record_to_json(record) << "\n";
  if (!out) throw StorageFailure("write failed for " + path.string());
}

DetectionRecord read_detection_file(const std::filesystem::path &file) {
  std::ifstream in(file);
  if (!in) throw StorageFailure("cannot open " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return detection_record_from_json(buf.str());
}

RecordStore::RecordStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StorageFailure("cannot create store directory " + dir_.string());
}

void RecordStore::append_rectangles(const std::vector<RectangleRecord> &records) {
  append_records(dir_, "rect", records, rectangle_record_to_json);
}

void RecordStore::append_detections(const std::vector<DetectionRecord> &records) {
  append_records(dir_, "det", records, detection_record_to_json);
}

std::vector<RectangleRecord> RecordStore::query_rectangles(int64_t t0_ms, int64_t t1_ms) const {
  return query_records<RectangleRecord>(dir_, "rect", t0_ms, t1_ms,
                                        rectangle_record_from_json);
}

std::vector<DetectionRecord> RecordStore::query_detections(int64_t t0_ms, int64_t t1_ms) const {
  return query_records<DetectionRecord>(dir_, "det", t0_ms, t1_ms,
                                        detection_record_from_json);
}

}  // namespace petmap
