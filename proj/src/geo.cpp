#include "cfta/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cfta {

namespace {

constexpr double deg2rad(double const d) { return d * std::numbers::pi / 180.0; }
constexpr double rad2deg(double const r) { return r * 180.0 / std::numbers::pi; }

}  // namespace

double haversine_m(latlon const& a, latlon const& b) {
  auto const lat1 = deg2rad(a.lat);
  auto const lat2 = deg2rad(b.lat);
  auto const dlat = lat2 - lat1;
  auto const dlon = deg2rad(b.lon - a.lon);
  auto const s1 = std::sin(dlat / 2.0);
  auto const s2 = std::sin(dlon / 2.0);
  auto const h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * earth_radius_m * std::asin(std::sqrt(std::min(1.0, h)));
}

latlon destination_point(latlon const& from, double const bearing_deg,
                         double const distance_m) {
  auto const delta = distance_m / earth_radius_m;
  auto const theta = deg2rad(bearing_deg);
  auto const lat1 = deg2rad(from.lat);
  auto const lon1 = deg2rad(from.lon);
  auto const lat2 = std::asin(std::sin(lat1) * std::cos(delta) +
                              std::cos(lat1) * std::sin(delta) * std::cos(theta));
  auto const lon2 =
      lon1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(lat1),
                        std::cos(delta) - std::sin(lat1) * std::sin(lat2));
  return {rad2deg(lat2), rad2deg(lon2)};
}

azimuthal_equidistant::azimuthal_equidistant(latlon const center)
    : center_{center},
      sin_lat0_{std::sin(deg2rad(center.lat))},
      cos_lat0_{std::cos(deg2rad(center.lat))} {}

xy azimuthal_equidistant::forward(latlon const& p) const {
  auto const lat = deg2rad(p.lat);
  auto const dlon = deg2rad(p.lon - center_.lon);
  auto const cos_c = std::clamp(
      sin_lat0_ * std::sin(lat) + cos_lat0_ * std::cos(lat) * std::cos(dlon),
      -1.0, 1.0);
  auto const c = std::acos(cos_c);
  if (c < 1e-15) {
    return {0.0, 0.0};
  }
  auto const k = c / std::sin(c);
  return {earth_radius_m * k * std::cos(lat) * std::sin(dlon),
          earth_radius_m * k *
              (cos_lat0_ * std::sin(lat) -
               sin_lat0_ * std::cos(lat) * std::cos(dlon))};
}

latlon azimuthal_equidistant::inverse(xy const& p) const {
  auto const rho = std::hypot(p.x, p.y);
  if (rho < 1e-9) {
    return center_;
  }
  auto const c = rho / earth_radius_m;
  auto const sin_c = std::sin(c);
  auto const cos_c = std::cos(c);
  auto const lat =
      std::asin(cos_c * sin_lat0_ + p.y * sin_c * cos_lat0_ / rho);
  auto const lon =
      deg2rad(center_.lon) +
      std::atan2(p.x * sin_c, rho * cos_lat0_ * cos_c - p.y * sin_lat0_ * sin_c);
  return {rad2deg(lat), rad2deg(lon)};
}

}  // namespace cfta
