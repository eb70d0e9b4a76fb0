#include "tflow/geometry.hpp"

#include <algorithm>
#include <numbers>

#include "tflow/error.hpp"

namespace tflow {

Crs parse_crs(std::string_view name) {
  if (name == "planar" || name == "planar-meters") return Crs::PlanarMeters;
  if (name == "geographic" || name == "geographic-degrees") return Crs::GeographicDegrees;
  throw ConfigError("unknown crs '" + std::string(name) + "' (expected planar or geographic)");
}

std::string to_string(Crs crs) {
  return crs == Crs::PlanarMeters ? "planar-meters" : "geographic-degrees";
}

double euclidean_distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double great_circle_distance(Point a, Point b) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double lat1 = a.y * kDeg;
  const double lat2 = b.y * kDeg;
  const double dlat = lat2 - lat1;
  const double dlon = (b.x - a.x) * kDeg;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

LocalProjection::LocalProjection(Crs crs, Point origin) : crs_(crs), origin_(origin) {
  if (crs_ == Crs::GeographicDegrees) {
    constexpr double kDeg = std::numbers::pi / 180.0;
    meters_per_deg_y_ = kEarthRadiusM * kDeg;
    meters_per_deg_x_ = meters_per_deg_y_ * std::cos(origin.y * kDeg);
  }
}

Point LocalProjection::forward(Point p) const {
  if (crs_ == Crs::PlanarMeters) return p;
  return {(p.x - origin_.x) * meters_per_deg_x_, (p.y - origin_.y) * meters_per_deg_y_};
}

Point LocalProjection::inverse(Point p) const {
  if (crs_ == Crs::PlanarMeters) return p;
  return {p.x / meters_per_deg_x_ + origin_.x, p.y / meters_per_deg_y_ + origin_.y};
}

}  // namespace tflow
