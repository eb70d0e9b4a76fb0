#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "tflow/error.hpp"
#include "tflow/partition.hpp"

using namespace tflow;

namespace {

// Straight transcription of the grouping procedure with no shared code.
std::vector<Point> reference_grouping(const std::vector<Point>& seeds, double gamma) {
  std::vector<Point> centroid;
  std::vector<double> sx, sy, cnt;
  for (const auto& p : seeds) {
    std::size_t best = centroid.size();
    double best_d = 0;
    for (std::size_t c = 0; c < centroid.size(); ++c) {
      const double d = std::hypot(p.x - centroid[c].x, p.y - centroid[c].y);
      if (d <= gamma && (best == centroid.size() || d < best_d)) {
        best = c;
        best_d = d;
      }
    }
    if (best == centroid.size()) {
      centroid.push_back(p);
      sx.push_back(p.x);
      sy.push_back(p.y);
      cnt.push_back(1);
    } else {
      sx[best] += p.x;
      sy[best] += p.y;
      cnt[best] += 1;
      centroid[best] = {sx[best] / cnt[best], sy[best] / cnt[best]};
    }
  }
  std::vector<double> ax(centroid.size(), 0), ay(centroid.size(), 0), an(centroid.size(), 0);
  for (const auto& p : seeds) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < centroid.size(); ++c) {
      if (std::hypot(p.x - centroid[c].x, p.y - centroid[c].y) <
          std::hypot(p.x - centroid[best].x, p.y - centroid[best].y)) {
        best = c;
      }
    }
    ax[best] += p.x;
    ay[best] += p.y;
    an[best] += 1;
  }
  for (std::size_t c = 0; c < centroid.size(); ++c) {
    if (an[c] > 0) centroid[c] = {ax[c] / an[c], ay[c] / an[c]};
  }
  return centroid;
}

std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, double extent) {
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

}  // namespace

TEST_CASE("four corners collapse to one cell") {
  const std::vector<Point> seeds = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const auto cs = group_seed_points(seeds, 2.0);
  REQUIRE(cs.size() == 1);
  CHECK(cs.cells[0].centroid == Point{0.5, 0.5});
  CHECK(cs.cells[0].member_count == 4);
}

TEST_CASE("far apart seeds found separate cells") {
  const std::vector<Point> seeds = {{0, 0}, {10, 0}, {0.5, 0}};
  const auto cs = group_seed_points(seeds, 1.0);
  REQUIRE(cs.size() == 2);
  CHECK(cs.cells[0].centroid == Point{0.25, 0});
  CHECK(cs.cells[1].centroid == Point{10, 0});
}

TEST_CASE("grouping matches the reference transcription") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto seeds = random_points(rng, 150, 1000.0);
    const auto cs = group_seed_points(seeds, 120.0);
    const auto ref = reference_grouping(seeds, 120.0);
    REQUIRE(cs.size() == ref.size());
    for (std::size_t c = 0; c < ref.size(); ++c) {
      CHECK(cs.cells[c].centroid.x == doctest::Approx(ref[c].x).epsilon(1e-12));
      CHECK(cs.cells[c].centroid.y == doctest::Approx(ref[c].y).epsilon(1e-12));
    }
  }
}

TEST_CASE("grouping input errors") {
  const std::vector<Point> seeds = {{0, 0}};
  CHECK_THROWS_AS(group_seed_points(seeds, 0.0), ConfigError);
  CHECK_THROWS_AS(group_seed_points({}, 1.0), ConfigError);
}

TEST_CASE("single seed and two distant seeds") {
  const std::vector<Point> one = {{5, 5}};
  CHECK(group_seed_points(one, 1.0).cells.at(0).centroid == Point{5, 5});
  const std::vector<Point> two = {{0, 0}, {10, 0}};
  const auto cs = group_seed_points(two, 3.0);
  REQUIRE(cs.size() == 2);
  CHECK(cs.cells[1].centroid == Point{10, 0});
}

TEST_CASE("translation moves centroids by the same vector") {
  std::mt19937_64 rng(3);
  auto seeds = random_points(rng, 200, 500.0);
  const auto a = group_seed_points(seeds, 60.0);
  for (auto& p : seeds) p = {p.x + 1234.5, p.y - 77.25};
  const auto b = group_seed_points(seeds, 60.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t c = 0; c < a.size(); ++c) {
    CHECK(b.cells[c].centroid.x - a.cells[c].centroid.x == doctest::Approx(1234.5));
    CHECK(b.cells[c].centroid.y - a.cells[c].centroid.y == doctest::Approx(-77.25));
  }
}

TEST_CASE("nearest centroid with lowest id on ties") {
  CellSet cs;
  cs.cells = {{0, {0, 0}, 1}, {1, {2, 0}, 1}};
  CHECK(assign_region({0.9, 5}, cs) == 0);
  CHECK(assign_region({1.0, 5}, cs) == 0);
  CHECK(assign_region({1.1, -5}, cs) == 1);
}

TEST_CASE("voronoi polygons tile the box and agree with assignment") {
  std::mt19937_64 rng(5);
  CellSet cs;
  const auto centers = random_points(rng, 12, 100.0);
  for (std::size_t i = 0; i < centers.size(); ++i) cs.cells.push_back({i, centers[i], 1});
  const BoundingBox box{-10, -10, 110, 110};
  const auto polys = build_voronoi(cs, box);
  REQUIRE(polys.size() == cs.size());

  double area = 0;
  for (const auto& poly : polys) {
    CHECK(poly.ring.front() == poly.ring.back());
    double a = 0;
    for (std::size_t i = 0; i + 1 < poly.ring.size(); ++i) {
      a += poly.ring[i].x * poly.ring[i + 1].y - poly.ring[i + 1].x * poly.ring[i].y;
    }
    CHECK(a > 0);  // counter-clockwise
    area += a / 2;
  }
  CHECK(area == doctest::Approx(120.0 * 120.0).epsilon(1e-9));

  for (const auto& q : random_points(rng, 300, 100.0)) {
    const auto id = assign_region(q, cs);
    CHECK(point_in_polygon(q, polys[id].ring));
  }
}

TEST_CASE("geographic cells and polygons") {
  // Two clusters about 5.5 km apart in latitude.
  const std::vector<Point> seeds = {{153.0, -27.50}, {153.001, -27.50}, {153.0, -27.45}, {153.001, -27.45}};
  const auto cs = group_seed_points(seeds, 3000.0, Crs::GeographicDegrees);
  REQUIRE(cs.size() == 2);
  CHECK(cs.cells[0].centroid.x == doctest::Approx(153.0005));
  const auto polys = build_voronoi(cs, voronoi_extent(seeds, cs));
  REQUIRE(polys.size() == 2);
  CHECK(point_in_polygon({153.0, -27.49}, polys[0].ring));
  CHECK(point_in_polygon({153.0, -27.46}, polys[1].ring));
}

TEST_CASE("cell table and geojson") {
  const std::vector<Point> seeds = {{0, 0}, {1, 0}, {100, 0}};
  const auto cs = group_seed_points(seeds, 5.0);
  std::ostringstream table;
  write_cell_table(table, cs);
  CHECK(table.str() == "cell_id,cx,cy,member_count\n0,0.5,0,2\n1,100,0,1\n");

  std::ostringstream gj;
  write_geojson(gj, cs, build_voronoi(cs, voronoi_extent(seeds, cs)));
  const auto doc = nlohmann::json::parse(gj.str());
  CHECK(doc["type"] == "FeatureCollection");
  CHECK(doc["features"].size() == 4);
  CHECK(doc["features"][0]["geometry"]["type"] == "Polygon");
  CHECK(doc["features"][0]["properties"]["cell_id"] == 0);
}
