#include <sstream>

#include "doctest.h"
#include "tflow/error.hpp"
#include "tflow/ingest.hpp"

using namespace tflow;

namespace {

ParseResult parse(const std::string& text, std::optional<TimeWindow> window = std::nullopt,
                  Crs crs = Crs::PlanarMeters) {
  std::istringstream in(text);
  return parse_trajectories(in, ColumnSchema{}, crs, window);
}

}  // namespace

TEST_CASE("rows are grouped by id and sorted by time") {
  const auto r = parse(
      "traj_id,x,y,t\n"
      "b,0,0,10\n"
      "a,5,0,20\n"
      "a,0,0,0\n"
      "b,3,4,20\n");
  REQUIRE(r.dataset.trajectories.size() == 2);
  CHECK(r.dataset.trajectories[0].id == "a");
  CHECK(r.dataset.trajectories[0].points[0].t == 0.0);
  CHECK(r.dataset.trajectories[0].points[1].x == 5.0);
  CHECK(r.dataset.day_start == 0.0);
  CHECK(r.dataset.day_end == 20.0);
  CHECK(path_length(r.dataset.trajectories[1], Crs::PlanarMeters) == doctest::Approx(5.0));
  CHECK_NOTHROW(validate(r.dataset));
}

TEST_CASE("columns are matched by header name, not position") {
  std::istringstream in("t;y;id;x\n0;0;q;0\n60;4;q;3\n");
  ColumnSchema schema;
  schema.id = "id";
  schema.delimiter = ';';
  const auto r = parse_trajectories(in, schema, Crs::PlanarMeters);
  REQUIRE(r.dataset.trajectories.size() == 1);
  CHECK(r.dataset.trajectories[0].points[1].x == 3.0);
  CHECK(r.dataset.trajectories[0].points[1].y == 4.0);
}

TEST_CASE("missing column is an input error") {
  CHECK_THROWS_AS(parse("traj_id,x,t\na,0,0\n"), InputError);
}

TEST_CASE("malformed rows, duplicates and single-point trajectories are dropped") {
  const auto r = parse(
      "traj_id,x,y,t\n"
      "a,0,0,0\n"
      "a,0,0,0\n"
      "a,1,1,oops\n"
      "a,2,2,5\n"
      "lonely,9,9,3\n");
  CHECK(r.stats.rows == 5);
  CHECK(r.stats.malformed_rows == 1);
  CHECK(r.stats.duplicate_points == 1);
  CHECK(r.stats.dropped_trajectories == 1);
  REQUIRE(r.dataset.trajectories.size() == 1);
  CHECK(r.dataset.trajectories[0].points.size() == 2);
}

TEST_CASE("window restricts points and fixes the day axis") {
  const auto r = parse("traj_id,x,y,t\na,0,0,0\na,1,0,100\na,2,0,200\na,3,0,300\n", TimeWindow{50, 250});
  REQUIRE(r.dataset.trajectories.size() == 1);
  CHECK(r.dataset.trajectories[0].points.size() == 2);
  CHECK(r.stats.out_of_window_points == 2);
  CHECK(r.dataset.day_start == 50.0);
  CHECK(r.dataset.day_end == 250.0);
}

TEST_CASE("empty input gives an empty dataset") {
  CHECK(parse("").dataset.trajectories.empty());
  CHECK(parse("traj_id,x,y,t\n").dataset.trajectories.empty());
}

TEST_CASE("ISO-8601 timestamps") {
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0.0);
  CHECK(parse_iso8601("2013-03-12 05:00:00") == 1363064400.0);
  CHECK(parse_iso8601("2013-03-12T15:00:00+10:00") == 1363064400.0);
  CHECK(*parse_iso8601("2013-03-12T05:00:00.5Z") == doctest::Approx(1363064400.5));
  CHECK_FALSE(parse_iso8601("2013-13-01T00:00:00"));
  CHECK_FALSE(parse_iso8601("yesterday"));

  const auto r = parse("traj_id,x,y,t\na,0,0,2013-03-12T05:00:00Z\na,1,0,2013-03-12T05:01:00Z\n");
  REQUIRE(r.dataset.trajectories.size() == 1);
  CHECK(r.dataset.trajectories[0].points[1].t - r.dataset.trajectories[0].points[0].t == 60.0);
}

TEST_CASE("geographic path length uses great-circle distance") {
  const auto r = parse("traj_id,x,y,t\na,153.0,-27.5,0\na,153.0,-27.4,60\n", std::nullopt, Crs::GeographicDegrees);
  REQUIRE(r.dataset.trajectories.size() == 1);
  // 0.1 degree of latitude on the mean sphere
  CHECK(path_length(r.dataset.trajectories[0], Crs::GeographicDegrees) == doctest::Approx(11119.5).epsilon(1e-4));
}

TEST_CASE("short trips are filtered strictly") {
  Dataset ds;
  ds.trajectories = {{"short", {{0, 0, 0}, {3000, 0, 60}}}, {"long", {{0, 0, 0}, {3000.5, 0, 60}}}};
  ds.day_end = 60;
  const auto kept = filter_short(ds, 3000.0);
  REQUIRE(kept.trajectories.size() == 1);
  CHECK(kept.trajectories[0].id == "long");
}

TEST_CASE("slice axis") {
  SliceAxis axis(0.0, 7200.0, 3600.0);
  CHECK(axis.count() == 2);
  CHECK(axis.slice_of(0.0) == 0u);
  CHECK(axis.slice_of(3599.9) == 0u);
  CHECK(axis.slice_of(3600.0) == 1u);
  CHECK(axis.slice_of(7200.0) == 1u);
  CHECK_FALSE(axis.slice_of(-1.0));
  CHECK_FALSE(axis.slice_of(7200.5));
  CHECK(SliceAxis(0.0, 7201.0, 3600.0).count() == 3);
  CHECK(SliceAxis(5.0, 5.0, 3600.0).count() == 1);
  CHECK_THROWS_AS(SliceAxis(0.0, 10.0, 0.0), ConfigError);
}

TEST_CASE("canonical dataset round trip") {
  Dataset ds;
  ds.crs = Crs::GeographicDegrees;
  ds.day_start = 1363064400.0;
  ds.day_end = 1363132800.0;
  ds.trajectories = {{"x-1", {{153.0251, -27.4698, 1363064401.25}, {153.03, -27.47, 1363064461.0}}}};
  std::stringstream buf;
  write_dataset(buf, ds);
  CHECK(read_dataset(buf) == ds);
}

TEST_CASE("validate rejects broken datasets") {
  Dataset ds;
  ds.day_end = 100;
  ds.trajectories = {{"a", {{0, 0, 10}, {1, 0, 5}}}};
  CHECK_THROWS_AS(validate(ds), InvariantError);
  ds.trajectories = {{"a", {{0, 0, 10}}}};
  CHECK_THROWS_AS(validate(ds), InvariantError);
}
