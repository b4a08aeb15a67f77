#include "petmap/store.hpp"

#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

using namespace petmap;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("petmap_store_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

RectangleRecord rect_record(int64_t ts, double x = 0) {
  RectangleRecord r;
  r.timestamp_ms = ts;
  r.corners = {Point2{x, 0}, Point2{x + 10, 0}, Point2{x + 10, 5}, Point2{x, 5}};
  r.camera_support = 4;
  r.mean_score = 7.25;
  return r;
}

DetectionRecord det_record(int cam, int64_t ts) {
  DetectionRecord d;
  d.camera_id = cam;
  d.timestamp_ms = ts;
  d.polygons = {{{1.25, 2.5}, {3.0, 2.5}, {3.0, 4.0}}};
  return d;
}

}  // namespace

TEST_CASE("append then query returns ordered records") {
  TempDir tmp;
  RecordStore store(tmp.path);
  store.append_rectangles({});  // empty batch is a no-op
  store.append_rectangles({rect_record(1000, 1), rect_record(2000, 2), rect_record(3000, 3)});
  const auto all = store.query_rectangles(0, 10000);
  REQUIRE(all.size() == 3);
  CHECK(all[0].timestamp_ms == 1000);
  CHECK(all[2].timestamp_ms == 3000);
  CHECK(all[1].corners[0].x == doctest::Approx(2));
  CHECK(all[1].mean_score == doctest::Approx(7.25));
}

TEST_CASE("query range is half-open") {
  TempDir tmp;
  RecordStore store(tmp.path);
  store.append_rectangles({rect_record(1000), rect_record(2000)});
  const auto hits = store.query_rectangles(1000, 2000);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].timestamp_ms == 1000);
  CHECK(store.query_rectangles(500, 600).empty());
  CHECK_THROWS_AS(store.query_rectangles(2000, 1000), InvalidRange);
}

TEST_CASE("unordered batches are rejected") {
  TempDir tmp;
  RecordStore store(tmp.path);
  CHECK_THROWS_AS(store.append_rectangles({rect_record(2000), rect_record(1000)}),
                  StorageFailure);
}

TEST_CASE("random queries match a linear-scan oracle across day segments") {
  TempDir tmp;
  RecordStore store(tmp.path);
  std::mt19937_64 rng(99);
  // Spread over several UTC days so multiple segment files exist.
  std::uniform_int_distribution<int64_t> ts(1700000000000, 1700000000000 + 4 * 86400000ll);
  std::vector<RectangleRecord> all;
  for (int batch = 0; batch < 20; ++batch) {
    std::vector<RectangleRecord> records;
    for (int i = 0; i < 50; ++i) records.push_back(rect_record(ts(rng), i));
    std::sort(records.begin(), records.end(),
              [](const auto &a, const auto &b) { return a.timestamp_ms < b.timestamp_ms; });
    store.append_rectangles(records);
    all.insert(all.end(), records.begin(), records.end());
  }
  for (int q = 0; q < 50; ++q) {
    int64_t t0 = ts(rng), t1 = ts(rng);
    if (t0 > t1) std::swap(t0, t1);
    const auto got = store.query_rectangles(t0, t1);
    size_t want = 0;
    for (const auto &r : all) {
      if (r.timestamp_ms >= t0 && r.timestamp_ms < t1) ++want;
    }
    CHECK(got.size() == want);
    for (size_t i = 1; i < got.size(); ++i) {
      CHECK(got[i].timestamp_ms >= got[i - 1].timestamp_ms);
    }
  }
}

TEST_CASE("detection records mirror the rectangle contracts") {
  TempDir tmp;
  RecordStore store(tmp.path);
  store.append_detections({});
  store.append_detections({det_record(0, 1000), det_record(1, 1000), det_record(2, 1500)});
  const auto hits = store.query_detections(1000, 1500);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].camera_id == 0);
  CHECK(hits[1].camera_id == 1);  // insertion order preserved on equal timestamps
  REQUIRE(hits[0].polygons.size() == 1);
  CHECK(hits[0].polygons[0][0].x == doctest::Approx(1.25));
}

TEST_CASE("round trip preserves coordinates losslessly") {
  TempDir tmp;
  RecordStore store(tmp.path);
  RectangleRecord r = rect_record(12345);
  r.corners[0] = {123.4567891234, -0.0001234567};
  store.append_rectangles({r});
  const auto back = store.query_rectangles(0, 100000);
  REQUIRE(back.size() == 1);
  CHECK(back[0].corners[0].x == r.corners[0].x);
  CHECK(back[0].corners[0].y == r.corners[0].y);
}

TEST_CASE("reopened store sees earlier appends; torn trailing lines are skipped") {
  TempDir tmp;
  {
    RecordStore store(tmp.path);
    store.append_rectangles({rect_record(1000), rect_record(2000)});
  }
  // Simulate an interrupted append: partial JSON with no trailing newline.
  for (const auto &entry : std::filesystem::directory_iterator(tmp.path)) {
    std::ofstream out(entry.path(), std::ios::app | std::ios::binary);
    out << "{\"timestamp_ms\": 3000, \"corn";
  }
  RecordStore reopened(tmp.path);
  const auto got = reopened.query_rectangles(0, 10000);
  REQUIRE(got.size() == 2);
  CHECK(got[1].timestamp_ms == 2000);
}

TEST_CASE("detection files are named by their unix timestamp") {
  TempDir tmp;
  const DetectionRecord d = det_record(2, 1712345678901);
  write_detection_file(tmp.path / "cam2", d);
  const auto file = tmp.path / "cam2" / "1712345678901.json";
  REQUIRE(std::filesystem::exists(file));
  const DetectionRecord back = read_detection_file(file);
  CHECK(back.camera_id == 2);
  CHECK(back.timestamp_ms == 1712345678901);
  REQUIRE(back.polygons.size() == 1);
  CHECK(back.polygons[0].size() == 3);
}
