#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tflow/error.hpp"
#include "tflow/flowgraph.hpp"

using namespace tflow;

namespace {

// Three cells on a line: A at x=0, B at x=1000, C at x=2000.
CellSet line_cells() {
  CellSet cs;
  cs.gamma = 300;
  cs.cells = {{0, {0, 0}, 1}, {1, {1000, 0}, 1}, {2, {2000, 0}, 1}};
  return cs;
}

Trajectory walk(std::initializer_list<TrajectoryPoint> pts) { return {"w", pts}; }

std::vector<std::pair<CellId, CellId>> pairs(const std::vector<SubTrajectory>& subs) {
  std::vector<std::pair<CellId, CellId>> out;
  for (const auto& s : subs) out.emplace_back(s.origin, s.dest);
  return out;
}

SubTrajectory flow(double d, double tau) { return {"x", 0, 1, 0, d, tau}; }

FlowMeasure measure(CellId i, CellId j, double v) { return {i, j, 0, 1, v, 3.6, v}; }

}  // namespace

TEST_CASE("visit sequences collapse runs and keep revisits") {
  const auto cs = line_cells();
  auto one = region_visit_sequence(walk({{0, 0, 0}, {10, 0, 5}}), cs);
  CHECK(one.visits.size() == 1);

  auto vs = region_visit_sequence(walk({{0, 0, 0}, {5, 0, 10}, {990, 0, 50}, {1010, 0, 60}, {20, 0, 100}}), cs);
  REQUIRE(vs.visits.size() == 3);
  CHECK(vs.visits[0].cell == 0);
  CHECK(vs.visits[0].entry_time == 0);
  CHECK(vs.visits[0].exit_time == 10);
  CHECK(vs.visits[1].first_point == 2);
  CHECK(vs.visits[1].last_point == 3);
  CHECK(vs.visits[2].cell == 0);
}

TEST_CASE("all ordered visit pairs with distinct cells") {
  const auto cs = line_cells();
  SliceAxis axis(0, 3600, 3600);
  const auto abc = walk({{0, 0, 0}, {0, 0, 60}, {1000, 0, 160}, {1000, 0, 200}, {2000, 0, 300}});
  const auto subs = extract_subtrajectories(region_visit_sequence(abc, cs), abc, axis, Crs::PlanarMeters);
  using P = std::pair<CellId, CellId>;
  CHECK(pairs(subs) == std::vector<P>{{0, 1}, {0, 2}, {1, 2}});
  // A -> C: leaves A at t=60 from x=0, reaches C at t=300; path through B.
  CHECK(subs[1].distance_m == 2000.0);
  CHECK(subs[1].duration_s == 240.0);
  CHECK(subs[2].distance_m == 1000.0);
  CHECK(subs[2].duration_s == 100.0);

  const auto aba = walk({{0, 0, 0}, {1000, 0, 100}, {0, 0, 200}});
  CHECK(pairs(extract_subtrajectories(region_visit_sequence(aba, cs), aba, axis, Crs::PlanarMeters)) ==
        std::vector<P>{{0, 1}, {1, 0}});

  const auto a = walk({{0, 0, 0}, {10, 0, 100}});
  CHECK(extract_subtrajectories(region_visit_sequence(a, cs), a, axis, Crs::PlanarMeters).empty());
}

TEST_CASE("slice follows departure from the upstream cell") {
  const auto cs = line_cells();
  SliceAxis axis(0, 7200, 3600);
  const auto tr = walk({{0, 0, 3500}, {0, 0, 3590}, {1000, 0, 3700}});
  const auto subs = extract_subtrajectories(region_visit_sequence(tr, cs), tr, axis, Crs::PlanarMeters);
  REQUIRE(subs.size() == 1);
  CHECK(subs[0].slice == 0);
  CHECK(subs[0].duration_s == 110.0);
}

TEST_CASE("zero travel time falls back to entry times, then drops") {
  const auto cs = line_cells();
  SliceAxis axis(0, 3600, 3600);
  ExtractStats stats;
  const auto fallback = walk({{0, 0, 0}, {0, 0, 50}, {1000, 0, 50}});
  auto subs = extract_subtrajectories(region_visit_sequence(fallback, cs), fallback, axis, Crs::PlanarMeters, &stats);
  REQUIRE(subs.size() == 1);
  CHECK(subs[0].duration_s == 50.0);

  Trajectory instant{"i", {{0, 0, 10}, {1000, 0, 10}}};
  subs = extract_subtrajectories(region_visit_sequence(instant, cs), instant, axis, Crs::PlanarMeters, &stats);
  CHECK(subs.empty());
  CHECK(stats.zero_duration_dropped == 1);
}

TEST_CASE("edie speed") {
  std::vector<SubTrajectory> one = {flow(1000, 100)};
  CHECK(edie_speed(one)->speed_kmh == doctest::Approx(36.0));
  std::vector<SubTrajectory> two = {flow(1000, 100), flow(3000, 100)};
  const auto m = edie_speed(two);
  CHECK(m->speed_kmh == doctest::Approx(72.0));
  CHECK(m->count == 2);
  std::reverse(two.begin(), two.end());
  CHECK(edie_speed(two)->speed_kmh == m->speed_kmh);
  CHECK_FALSE(edie_speed(std::span<const SubTrajectory>{}));
  std::vector<SubTrajectory> mixed = {flow(1, 1), {"y", 1, 0, 0, 1, 1}};
  CHECK_THROWS_AS(edie_speed(mixed), InvariantError);
}

TEST_CASE("low and high speed rules at the threshold") {
  const std::vector<FlowMeasure> ms = {measure(0, 1, 20.0), measure(1, 2, 20.0000001), measure(2, 0, 5.0)};
  const auto low = build_snapshot(ms, 0, 3, EdgeMethod::LowSpeed, 20.0);
  const auto high = build_snapshot(ms, 0, 3, EdgeMethod::HighSpeed, 20.0);
  const auto all = build_snapshot(ms, 0, 3, EdgeMethod::All);
  CHECK(low.has_edge(0, 1));
  CHECK_FALSE(high.has_edge(0, 1));
  CHECK(high.has_edge(1, 2));
  CHECK(low.edges.size() == 2);
  CHECK(all.edges.size() == 3);
  CHECK(build_snapshot({}, 0, 3, EdgeMethod::All).edges.empty());
  CHECK_THROWS_AS(build_snapshot(ms, 0, 3, EdgeMethod::LowSpeed, 0.0), ConfigError);
}

TEST_CASE("measure flows over a dataset") {
  const auto cs = line_cells();
  Dataset ds;
  ds.day_start = 0;
  ds.day_end = 7200;
  // 1000 m in 100 s and 1000 m in 300 s on A -> B in slice 0; one trip in slice 1.
  ds.trajectories = {{"a", {{0, 0, 0}, {1000, 0, 100}}},
                     {"b", {{0, 0, 10}, {1000, 0, 310}}},
                     {"c", {{0, 0, 4000}, {1000, 0, 4100}}}};
  SliceAxis axis(0, 7200, 3600);
  const auto table = measure_flows(ds, cs, axis);
  REQUIRE(table.measures.size() == 2);
  CHECK(table.measures[0].count == 2);
  CHECK(table.measures[0].speed_kmh == doctest::Approx(2000.0 / 400.0 * 3.6));
  CHECK(table.measures[1].slice == 1);

  const auto series = build_series(table, 3, axis, EdgeMethod::LowSpeed, 20.0);
  REQUIRE(series.snapshots.size() == 2);
  CHECK(series.snapshots[0].has_edge(0, 1));
  CHECK(series.snapshots[1].edges.empty());
  CHECK(series.threshold_kmh == 20.0);
  CHECK_FALSE(build_series(table, 3, axis, EdgeMethod::All).threshold_kmh);

  std::ostringstream edges;
  write_edge_list(edges, series);
  CHECK(edges.str() == "t,i,j\n0,0,1\n");
}

TEST_CASE("threshold sweep") {
  CHECK(parse_threshold_range("5:80:5").size() == 16);
  CHECK(parse_threshold_range("10:20:10") == std::vector<double>{10, 20});
  CHECK_THROWS_AS(parse_threshold_range("5:80"), ConfigError);
  CHECK_THROWS_AS(parse_threshold_range("5:80:0"), ConfigError);

  FlowTable table;
  table.measures = {{0, 1, 0, 1, 0, 0, 10.0}, {1, 0, 0, 1, 0, 0, 30.0}, {0, 1, 1, 1, 0, 0, 12.0}};
  SliceAxis axis(0, 7200, 3600);
  const std::vector<double> thresholds = {5, 15, 80};
  const auto rows = edge_count_sweep(table, 2, axis, thresholds);
  REQUIRE(rows.size() == 2 * 3 * 2);
  auto find = [&](EdgeMethod m, double v, std::size_t t) {
    return *std::find_if(rows.begin(), rows.end(), [&](const SweepRow& r) {
      return r.method == m && r.threshold_kmh == v && r.slice == t;
    });
  };
  CHECK(find(EdgeMethod::LowSpeed, 15, 0).edges == 1);
  CHECK(find(EdgeMethod::LowSpeed, 80, 0).edges == 2);
  CHECK(find(EdgeMethod::LowSpeed, 80, 0).relative_edges == 1.0);
  CHECK(find(EdgeMethod::LowSpeed, 80, 1).relative_edges == 0.5);
  CHECK(find(EdgeMethod::HighSpeed, 80, 0).relative_edges == 0.0);
  CHECK(find(EdgeMethod::HighSpeed, 5, 1).edges == 1);
}
