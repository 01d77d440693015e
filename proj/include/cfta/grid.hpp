#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfta/geo.hpp"

namespace cfta::grid {

// Outer ring first, then holes. Rings may be open or closed.
struct polygon {
  std::vector<std::vector<latlon>> rings;
};

using boundary = std::vector<polygon>;

// Accepts a Polygon/MultiPolygon geometry, a Feature or a FeatureCollection
// (all polygonal members are united). Throws errc::invalid_polygon.
boundary parse_boundary(std::string_view geojson);
boundary load_boundary(std::filesystem::path const&);

struct centroid {
  std::uint32_t id;
  latlon pos;
  xy local;  // projected, metres
};

struct lattice {
  double cell_size{500.0};
  latlon projection_center;
  xy anchor;  // projected bounding-box min corner plus offset
  std::vector<centroid> centroids;

  std::vector<latlon> positions() const;
};

struct grid_params {
  double cell_size{500.0};
  xy anchor_offset{};  // metres added to the bounding-box min corner
};

// Tile centres anchor + (i + 0.5) * cell that fall inside the boundary,
// ordered south to north, then west to east. The working plane is an
// azimuthal equidistant projection centred on the boundary's bounding box.
lattice generate_grid(boundary const&, grid_params const& = {});

struct access_overhead {
  double distance_m;
  double time_s;
};

// Mean distance from a uniform point of a square cell to its centre.
access_overhead expected_access_overhead(double cell_size, double walk_speed);

// Indices (lattice order) of expected positions with no observed point within
// `tol_m`.
std::vector<std::size_t> detect_holes(std::span<latlon const> expected,
                                      std::span<latlon const> observed,
                                      double tol_m = 35.0);

// Closed counter-clockwise ring (lon/lat) of a centroid's square tile.
std::vector<latlon> tile_corners(lattice const&, centroid const&);

// GeoJSON FeatureCollection of square tiles with properties
// {id, lon, lat, is_hole}; projection metadata goes into a "metadata" member.
std::string tiles_geojson(lattice const&, std::span<std::size_t const> holes);

}  // namespace cfta::grid
