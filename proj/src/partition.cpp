#include "tflow/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "json.hpp"

#include "tflow/error.hpp"

namespace tflow {

namespace {

struct Accumulator {
  double sum_x = 0.0;
  double sum_y = 0.0;
  std::size_t count = 0;

  void add(Point p) {
    sum_x += p.x;
    sum_y += p.y;
    ++count;
  }
  Point mean() const { return {sum_x / static_cast<double>(count), sum_y / static_cast<double>(count)}; }
};

// Index of the nearest centroid (lowest index on ties) and its distance.
std::pair<std::size_t, double> nearest(Point p, std::span<const Point> centroids, Crs crs) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    const double d = distance(p, centroids[i], crs);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return {best, best_d};
}

std::vector<Point> centroids_of(const CellSet& cells) {
  std::vector<Point> out;
  out.reserve(cells.size());
  for (const auto& c : cells.cells) out.push_back(c.centroid);
  return out;
}

// Keeps the part of a convex polygon where a.x*x + a.y*y <= b.
std::vector<Point> clip_half_plane(const std::vector<Point>& poly, Point a, double b) {
  std::vector<Point> out;
  if (poly.empty()) return out;
  auto side = [&](Point p) { return a.x * p.x + a.y * p.y - b; };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point cur = poly[i];
    const Point nxt = poly[(i + 1) % poly.size()];
    const double sc = side(cur);
    const double sn = side(nxt);
    if (sc <= 0.0) out.push_back(cur);
    if ((sc < 0.0 && sn > 0.0) || (sc > 0.0 && sn < 0.0)) {
      const double f = sc / (sc - sn);
      out.push_back({cur.x + f * (nxt.x - cur.x), cur.y + f * (nxt.y - cur.y)});
    }
  }
  return out;
}

}  // namespace

CellSet group_seed_points(std::span<const Point> seeds, double gamma, Crs crs) {
  if (seeds.empty()) throw ConfigError("seed point set is empty");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("cell radius gamma must be positive");

  std::vector<Point> centroids;
  std::vector<Accumulator> members;
  for (const Point s : seeds) {
    std::size_t target = centroids.size();
    if (!centroids.empty()) {
      const auto [idx, d] = nearest(s, centroids, crs);
      if (d <= gamma) target = idx;
    }
    if (target == centroids.size()) {
      centroids.push_back(s);
      members.emplace_back();
    }
    members[target].add(s);
    centroids[target] = members[target].mean();
  }

  CellSet out;
  std::vector<Accumulator> final_members(centroids.size());
  out.seed_cell.reserve(seeds.size());
  for (const Point s : seeds) {
    const auto idx = nearest(s, centroids, crs).first;
    final_members[idx].add(s);
    out.seed_cell.push_back(idx);
  }

  out.gamma = gamma;
  out.crs = crs;
  out.cells.reserve(centroids.size());
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    const auto& acc = final_members[i];
    Cell cell{i, centroids[i], acc.count};
    if (acc.count > 0) {
      cell.centroid = acc.mean();
    } else {
      ++out.empty_cells;
    }
    out.cells.push_back(cell);
  }
  out.redistribution_centroids = std::move(centroids);
  return out;
}

CellId assign_region(Point p, const CellSet& cells) {
  CellId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& c : cells.cells) {
    const double d = distance(p, c.centroid, cells.crs);
    if (d < best_d) {
      best_d = d;
      best = c.id;
    }
  }
  return best;
}

std::vector<CellId> assign_all(std::span<const Point> points, const CellSet& cells) {
  std::vector<CellId> out;
  out.reserve(points.size());
  for (const Point p : points) out.push_back(assign_region(p, cells));
  return out;
}

BoundingBox bounding_box(std::span<const Point> points) {
  if (points.empty()) return {};
  BoundingBox box{points[0].x, points[0].y, points[0].x, points[0].y};
  for (const Point p : points) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

BoundingBox voronoi_extent(std::span<const Point> points, const CellSet& cells) {
  BoundingBox box = bounding_box(points);
  for (const auto& c : cells.cells) {
    box.min_x = std::min(box.min_x, c.centroid.x);
    box.min_y = std::min(box.min_y, c.centroid.y);
    box.max_x = std::max(box.max_x, c.centroid.x);
    box.max_y = std::max(box.max_y, c.centroid.y);
  }
  if (cells.crs == Crs::PlanarMeters) return box.expanded(cells.gamma);
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double dy = cells.gamma / (kEarthRadiusM * kDeg);
  const double lat = std::max(std::abs(box.min_y), std::abs(box.max_y));
  const double dx = dy / std::max(1e-6, std::cos(std::min(lat + dy, 89.0) * kDeg));
  return {box.min_x - dx, box.min_y - dy, box.max_x + dx, box.max_y + dy};
}

std::vector<VoronoiPolygon> build_voronoi(const CellSet& cells, const BoundingBox& bbox) {
  if (cells.cells.empty()) throw ConfigError("cannot build a Voronoi diagram without cells");
  const auto centroids = centroids_of(cells);

  Point origin{0.0, 0.0};
  for (const Point c : centroids) {
    origin.x += c.x / static_cast<double>(centroids.size());
    origin.y += c.y / static_cast<double>(centroids.size());
  }
  const LocalProjection proj(cells.crs, origin);
  // Planar data is shifted to the mean for conditioning; projection covers geographic.
  auto to_local = [&](Point p) {
    return cells.crs == Crs::PlanarMeters ? Point{p.x - origin.x, p.y - origin.y} : proj.forward(p);
  };
  auto to_world = [&](Point p) {
    return cells.crs == Crs::PlanarMeters ? Point{p.x + origin.x, p.y + origin.y} : proj.inverse(p);
  };

  std::vector<Point> local(centroids.size());
  std::transform(centroids.begin(), centroids.end(), local.begin(), to_local);
  const Point lo = to_local({bbox.min_x, bbox.min_y});
  const Point hi = to_local({bbox.max_x, bbox.max_y});
  const std::vector<Point> box{{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}};

  std::vector<VoronoiPolygon> out;
  out.reserve(local.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    std::vector<Point> poly = box;
    const Point ci = local[i];
    for (std::size_t j = 0; j < local.size() && !poly.empty(); ++j) {
      if (j == i) continue;
      const Point cj = local[j];
      if (cj == ci) {
        // Coincident generators: the lower id owns the region.
        if (j < i) poly.clear();
        continue;
      }
      const Point normal{cj.x - ci.x, cj.y - ci.y};
      const double rhs = 0.5 * ((cj.x * cj.x + cj.y * cj.y) - (ci.x * ci.x + ci.y * ci.y));
      poly = clip_half_plane(poly, normal, rhs);
    }
    VoronoiPolygon vp{cells.cells[i].id, {}};
    for (const Point p : poly) vp.ring.push_back(to_world(p));
    if (!vp.ring.empty()) vp.ring.push_back(vp.ring.front());
    out.push_back(std::move(vp));
  }
  return out;
}

bool point_in_polygon(Point p, std::span<const Point> ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = ring[i];
    const Point b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

void write_cell_table(std::ostream& out, const CellSet& cells) {
  out << "cell_id,cx,cy,member_count\n";
  const auto old_precision = out.precision(17);
  for (const auto& c : cells.cells) {
    out << c.id << ',' << c.centroid.x << ',' << c.centroid.y << ',' << c.member_count << '\n';
  }
  out.precision(old_precision);
}

void write_geojson(std::ostream& out, const CellSet& cells, const std::vector<VoronoiPolygon>& polygons) {
  using nlohmann::json;
  json features = json::array();
  for (const auto& poly : polygons) {
    json ring = json::array();
    for (const Point p : poly.ring) ring.push_back({p.x, p.y});
    features.push_back({{"type", "Feature"},
                        {"properties", {{"cell_id", poly.cell_id}, {"kind", "region"}}},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}}});
  }
  for (const auto& c : cells.cells) {
    features.push_back({{"type", "Feature"},
                        {"properties", {{"cell_id", c.id}, {"kind", "centroid"}, {"member_count", c.member_count}}},
                        {"geometry", {{"type", "Point"}, {"coordinates", {c.centroid.x, c.centroid.y}}}}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  out << doc.dump() << '\n';
}

}  // namespace tflow
