#include "cfta/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "boost/geometry.hpp"
#include "boost/geometry/geometries/multi_polygon.hpp"
#include "boost/geometry/geometries/point_xy.hpp"
#include "boost/geometry/geometries/polygon.hpp"
#include "fmt/core.h"
#include "json.hpp"

#include "cfta/error.hpp"

namespace cfta::grid {

namespace bg = boost::geometry;
using json = nlohmann::json;

namespace {

using pt = bg::model::d2::point_xy<double>;
using poly = bg::model::polygon<pt>;
using mpoly = bg::model::multi_polygon<poly>;

std::vector<latlon> parse_ring(json const& ring) {
  if (!ring.is_array()) {
    throw error{errc::invalid_polygon, "ring is not an array"};
  }
  auto out = std::vector<latlon>{};
  for (auto const& c : ring) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
      throw error{errc::invalid_polygon, "bad coordinate"};
    }
    auto const p = latlon{c[1].get<double>(), c[0].get<double>()};
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || std::abs(p.lat) > 90.0 ||
        std::abs(p.lon) > 180.0) {
      throw error{errc::invalid_polygon, "coordinate out of range"};
    }
    out.push_back(p);
  }
  return out;
}

polygon parse_polygon(json const& coords) {
  if (!coords.is_array() || coords.empty()) {
    throw error{errc::invalid_polygon, "polygon without rings"};
  }
  auto p = polygon{};
  for (auto const& r : coords) {
    p.rings.push_back(parse_ring(r));
  }
  return p;
}

void collect(json const& j, boundary& out) {
  if (!j.is_object() || !j.contains("type")) {
    throw error{errc::invalid_polygon, "not a GeoJSON object"};
  }
  auto const type = j.at("type").get<std::string>();
  if (type == "FeatureCollection") {
    for (auto const& f : j.at("features")) {
      collect(f, out);
    }
  } else if (type == "Feature") {
    if (!j.at("geometry").is_null()) {
      collect(j.at("geometry"), out);
    }
  } else if (type == "Polygon") {
    out.push_back(parse_polygon(j.at("coordinates")));
  } else if (type == "MultiPolygon") {
    for (auto const& c : j.at("coordinates")) {
      out.push_back(parse_polygon(c));
    }
  } else if (type == "GeometryCollection") {
    for (auto const& g : j.at("geometries")) {
      collect(g, out);
    }
  }
}

struct projected_boundary {
  azimuthal_equidistant proj;
  mpoly shape;
  bg::model::box<pt> bbox;
};

projected_boundary project(boundary const& b) {
  if (b.empty()) {
    throw error{errc::invalid_polygon, "no polygon"};
  }
  auto min_lat = std::numeric_limits<double>::max();
  auto max_lat = std::numeric_limits<double>::lowest();
  auto min_lon = min_lat;
  auto max_lon = max_lat;
  for (auto const& p : b) {
    for (auto const& r : p.rings) {
      for (auto const& c : r) {
        min_lat = std::min(min_lat, c.lat);
        max_lat = std::max(max_lat, c.lat);
        min_lon = std::min(min_lon, c.lon);
        max_lon = std::max(max_lon, c.lon);
      }
    }
  }
  auto const proj =
      azimuthal_equidistant{{(min_lat + max_lat) / 2.0, (min_lon + max_lon) / 2.0}};

  auto shape = mpoly{};
  for (auto const& p : b) {
    auto& out = shape.emplace_back();
    for (auto i = std::size_t{0}; i != p.rings.size(); ++i) {
      auto& ring = i == 0 ? out.outer() : out.inners().emplace_back();
      for (auto const& c : p.rings[i]) {
        auto const q = proj.forward(c);
        ring.emplace_back(q.x, q.y);
      }
      if (ring.size() < 3) {
        throw error{errc::invalid_polygon, "ring with fewer than 3 vertices"};
      }
    }
  }
  bg::correct(shape);
  auto reason = std::string{};
  if (!bg::is_valid(shape, reason)) {
    throw error{errc::invalid_polygon, reason};
  }
  if (bg::area(shape) <= 0.0) {
    throw error{errc::invalid_polygon, "zero area"};
  }
  auto const box = bg::return_envelope<bg::model::box<pt>>(shape);
  return {proj, std::move(shape), box};
}

}  // namespace

boundary parse_boundary(std::string_view const geojson) {
  auto j = json::parse(geojson, nullptr, false);
  if (j.is_discarded()) {
    throw error{errc::invalid_polygon, "unparseable GeoJSON"};
  }
  auto out = boundary{};
  try {
    collect(j, out);
  } catch (json::exception const& e) {
    throw error{errc::invalid_polygon, e.what()};
  }
  if (out.empty()) {
    throw error{errc::invalid_polygon, "no polygonal geometry"};
  }
  return out;
}

boundary load_boundary(std::filesystem::path const& path) {
  auto in = std::ifstream{path, std::ios::binary};
  if (!in) {
    throw error{errc::missing_file, path.string()};
  }
  auto ss = std::stringstream{};
  ss << in.rdbuf();
  return parse_boundary(ss.str());
}

std::vector<latlon> lattice::positions() const {
  auto out = std::vector<latlon>{};
  out.reserve(centroids.size());
  for (auto const& c : centroids) {
    out.push_back(c.pos);
  }
  return out;
}

lattice generate_grid(boundary const& b, grid_params const& params) {
  if (!(params.cell_size > 0.0)) {
    throw error{errc::invalid_argument, "cell size must be positive"};
  }
  auto const pb = project(b);
  auto const cell = params.cell_size;
  auto const x0 = pb.bbox.min_corner().x() + params.anchor_offset.x;
  auto const y0 = pb.bbox.min_corner().y() + params.anchor_offset.y;
  auto const nx = static_cast<long>(std::ceil((pb.bbox.max_corner().x() - x0) / cell));
  auto const ny = static_cast<long>(std::ceil((pb.bbox.max_corner().y() - y0) / cell));

  auto l = lattice{};
  l.cell_size = cell;
  l.projection_center = pb.proj.center();
  l.anchor = {x0, y0};
  for (auto row = 0L; row < ny; ++row) {
    for (auto col = 0L; col < nx; ++col) {
      auto const p = xy{x0 + (static_cast<double>(col) + 0.5) * cell,
                        y0 + (static_cast<double>(row) + 0.5) * cell};
      if (bg::within(pt{p.x, p.y}, pb.shape)) {
        l.centroids.push_back(centroid{static_cast<std::uint32_t>(l.centroids.size()),
                                       pb.proj.inverse(p), p});
      }
    }
  }
  return l;
}

access_overhead expected_access_overhead(double const cell_size,
                                         double const walk_speed) {
  if (!(cell_size > 0.0) || !(walk_speed > 0.0)) {
    throw error{errc::invalid_argument, "cell size and walk speed must be positive"};
  }
  auto const d =
      cell_size * (std::numbers::sqrt2 + std::log(1.0 + std::numbers::sqrt2)) / 6.0;
  return {d, d / walk_speed};
}

std::vector<std::size_t> detect_holes(std::span<latlon const> expected,
                                      std::span<latlon const> observed,
                                      double const tol_m) {
  auto holes = std::vector<std::size_t>{};
  for (auto i = std::size_t{0}; i != expected.size(); ++i) {
    auto const covered = std::any_of(begin(observed), end(observed), [&](latlon const& o) {
      return haversine_m(expected[i], o) <= tol_m;
    });
    if (!covered) {
      holes.push_back(i);
    }
  }
  return holes;
}

std::vector<latlon> tile_corners(lattice const& l, centroid const& c) {
  auto const proj = azimuthal_equidistant{l.projection_center};
  auto const half = l.cell_size / 2.0;
  auto out = std::vector<latlon>{};
  for (auto const& [dx, dy] : {std::pair{-1.0, -1.0}, std::pair{1.0, -1.0},
                              std::pair{1.0, 1.0}, std::pair{-1.0, 1.0},
                              std::pair{-1.0, -1.0}}) {
    out.push_back(proj.inverse({c.local.x + dx * half, c.local.y + dy * half}));
  }
  return out;
}

std::string tiles_geojson(lattice const& l, std::span<std::size_t const> holes) {
  auto is_hole = std::vector<bool>(l.centroids.size(), false);
  for (auto const h : holes) {
    is_hole.at(h) = true;
  }

  auto features = json::array();
  for (auto const& c : l.centroids) {
    auto ring = json::array();
    for (auto const& v : tile_corners(l, c)) {
      ring.push_back({v.lon, v.lat});
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
                        {"properties",
                         {{"id", c.id},
                          {"lon", c.pos.lon},
                          {"lat", c.pos.lat},
                          {"is_hole", static_cast<bool>(is_hole[c.id])}}}});
  }
  auto const out = json{
      {"type", "FeatureCollection"},
      {"metadata",
       {{"projection", "azimuthal_equidistant"},
        {"projection_center", {l.projection_center.lon, l.projection_center.lat}},
        {"cell_size_m", l.cell_size},
        {"anchor_xy_m", {l.anchor.x, l.anchor.y}}}},
      {"features", std::move(features)}};
  return out.dump(1) + "\n";
}

}  // namespace cfta::grid
