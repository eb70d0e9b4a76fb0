#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace tflow {

enum class Crs { PlanarMeters, GeographicDegrees };

Crs parse_crs(std::string_view name);
std::string to_string(Crs crs);

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline constexpr double kEarthRadiusM = 6371008.8;

double euclidean_distance(Point a, Point b);

// Haversine on the mean Earth sphere; x = longitude, y = latitude, degrees.
double great_circle_distance(Point a, Point b);

inline double distance(Point a, Point b, Crs crs) {
  return crs == Crs::PlanarMeters ? euclidean_distance(a, b) : great_circle_distance(a, b);
}

// Equirectangular projection about a reference point. Identity for planar data.
class LocalProjection {
 public:
  LocalProjection() = default;
  LocalProjection(Crs crs, Point origin);

  Point forward(Point p) const;
  Point inverse(Point p) const;

 private:
  Crs crs_ = Crs::PlanarMeters;
  Point origin_{};
  double meters_per_deg_x_ = 1.0;
  double meters_per_deg_y_ = 1.0;
};

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(Point p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  BoundingBox expanded(double margin) const {
    return {min_x - margin, min_y - margin, max_x + margin, max_y + margin};
  }
};

}  // namespace tflow
