#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "tflow/geometry.hpp"

namespace tflow {

using CellId = std::size_t;

struct Cell {
  CellId id = 0;
  Point centroid;
  std::size_t member_count = 0;
};

struct CellSet {
  std::vector<Cell> cells;
  double gamma = 0.0;
  Crs crs = Crs::PlanarMeters;
  // Cells left without members after redistribution keep their centroid.
  std::size_t empty_cells = 0;
  // Redistribution state: the centroids seeds were matched against and the
  // cell each seed joined, in seed order. Final centroids are the means of
  // these memberships, so a seed need not be nearest its final centroid.
  std::vector<Point> redistribution_centroids;
  std::vector<CellId> seed_cell;

  std::size_t size() const { return cells.size(); }
};

// Groups seed points into cells of radius gamma, in seed order:
//  1. each seed joins the nearest cell whose centroid lies within gamma
//     (lowest id on ties), otherwise founds a new cell; the joined cell's
//     centroid becomes the running mean of its members;
//  2. memberships are cleared, centroids kept;
//  3. every seed is redistributed to its nearest centroid;
//  4. centroids are recomputed once from the final membership.
// The result depends on seed order.
CellSet group_seed_points(std::span<const Point> seeds, double gamma, Crs crs = Crs::PlanarMeters);

// Nearest centroid, lowest id on ties. Same as Voronoi membership.
CellId assign_region(Point p, const CellSet& cells);

// Final cell of every seed under the CellSet (nearest-centroid rule).
std::vector<CellId> assign_all(std::span<const Point> points, const CellSet& cells);

struct VoronoiPolygon {
  CellId cell_id = 0;
  // Counter-clockwise, closed (first vertex repeated at the end).
  std::vector<Point> ring;
};

// Voronoi cells of the centroids clipped to bbox. Coordinates are in the
// CellSet's CRS; geographic inputs are tessellated on a local equirectangular
// projection about the centroids' mean and mapped back.
std::vector<VoronoiPolygon> build_voronoi(const CellSet& cells, const BoundingBox& bbox);

BoundingBox bounding_box(std::span<const Point> points);

// Dataset bounding box grown by gamma, in the CellSet's CRS units.
BoundingBox voronoi_extent(std::span<const Point> points, const CellSet& cells);

bool point_in_polygon(Point p, std::span<const Point> ring);

// `cell_id,cx,cy,member_count`
void write_cell_table(std::ostream& out, const CellSet& cells);
// FeatureCollection of Polygon features plus Point features for centroids,
// each carrying a `cell_id` property.
void write_geojson(std::ostream& out, const CellSet& cells, const std::vector<VoronoiPolygon>& polygons);

}  // namespace tflow
