#pragma once

namespace cfta {

// Mean Earth radius (IUGG), metres.
inline constexpr double earth_radius_m = 6371008.8;

struct latlon {
  double lat{0.0};
  double lon{0.0};

  friend bool operator==(latlon const&, latlon const&) = default;
};

struct xy {
  double x{0.0};
  double y{0.0};
};

// Great-circle distance in metres.
double haversine_m(latlon const& a, latlon const& b);

// Point reached after travelling `distance_m` from `from` along the initial
// bearing `bearing_deg` (clockwise from north).
latlon destination_point(latlon const& from, double bearing_deg,
                         double distance_m);

// Spherical azimuthal equidistant projection. Distances and azimuths from the
// centre are exact; at city scale the plane is metric to well under 0.1%.
class azimuthal_equidistant {
public:
  explicit azimuthal_equidistant(latlon center);

  xy forward(latlon const& p) const;
  latlon inverse(xy const& p) const;
  latlon center() const { return center_; }

private:
  latlon center_;
  double sin_lat0_;
  double cos_lat0_;
};

}  // namespace cfta
