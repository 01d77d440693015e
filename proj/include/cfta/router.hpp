#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfta/geo.hpp"
#include "cfta/gtfs.hpp"

namespace cfta::router {

using gtfs::seconds;
using stop_idx = std::uint32_t;

inline constexpr seconds unreachable = std::numeric_limits<seconds>::max();

// Crow-fly walk model: haversine distance times a detour factor, walked at a
// constant speed. Radii are compared against the crow-fly distance.
struct walk_params {
  double speed_mps{1.3};
  double detour_factor{1.3};
  double max_access_m{1500.0};
};

struct network_params {
  walk_params walk;
  double transfer_radius_m{100.0};
  seconds transfer_slack{0};
};

// Walk time in whole seconds, rounded up (a 1e-6 s tolerance absorbs
// floating-point noise in the distance).
seconds walk_time(double distance_m, walk_params const&);

struct footpath {
  stop_idx to;
  seconds duration;
};

// Trips sharing one stop sequence, ordered so that no trip overtakes another:
// every trip's times are >= the previous trip's times at every stop.
struct pattern {
  std::vector<stop_idx> stops;
  std::vector<std::string> trip_ids;
  std::vector<seconds> arrivals;    // trip-major: [trip * stops.size() + i]
  std::vector<seconds> departures;  // same layout

  std::size_t trip_count() const { return trip_ids.size(); }
  seconds arr(std::size_t trip, std::size_t i) const {
    return arrivals[trip * stops.size() + i];
  }
  seconds dep(std::size_t trip, std::size_t i) const {
    return departures[trip * stops.size() + i];
  }
};

struct stop_info {
  std::string id;
  std::string name;
  latlon pos;
};

struct stop_near {
  stop_idx stop;
  seconds walk;
};

class spatial_index;

// Immutable routing structure for one service date.
class timetable_network {
public:
  timetable_network(std::vector<stop_info>, std::vector<pattern>,
                    network_params);
  ~timetable_network();
  timetable_network(timetable_network&&) noexcept;
  timetable_network& operator=(timetable_network&&) noexcept;

  std::span<stop_info const> stops() const { return stops_; }
  std::span<pattern const> patterns() const { return patterns_; }
  network_params const& params() const { return params_; }
  std::size_t trip_count() const;

  // (pattern, position) pairs visiting `s`.
  std::span<std::pair<std::uint32_t, std::uint32_t> const> patterns_at(
      stop_idx s) const;
  std::span<footpath const> footpaths_from(stop_idx s) const;

  // Stops within `radius_m` crow-fly of `p`, sorted by stop index, with walk
  // times.
  std::vector<stop_near> stops_near(latlon const& p, double radius_m) const;

private:
  std::vector<stop_info> stops_;
  std::vector<pattern> patterns_;
  network_params params_;
  std::vector<std::uint32_t> stop_pattern_offsets_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stop_patterns_;
  std::vector<std::uint32_t> footpath_offsets_;
  std::vector<footpath> footpaths_;
  std::unique_ptr<spatial_index> index_;
};

timetable_network build_network(gtfs::feed const&, gtfs::date,
                                network_params const& = {});

struct query {
  latlon origin;
  std::vector<latlon> destinations;
  seconds departure{0};
  int max_rounds{5};
  double max_walk_per_leg_m{1500.0};
};

struct travel_time_result {
  std::vector<seconds> times;  // arrival - departure, or `unreachable`
  bool origin_out_of_range{false};
};

// Destination points with their egress stops precomputed, so that one-to-many
// queries from many origins share the spatial lookups.
struct target_set {
  std::vector<latlon> points;
  std::vector<std::vector<stop_near>> near;
  double max_walk_m{0.0};
};

target_set prepare_targets(timetable_network const&, std::span<latlon const>,
                           double max_walk_m);

travel_time_result earliest_arrival(timetable_network const&, query const&);

// One-to-many from `origin` to every point of `targets`.
travel_time_result earliest_arrival(timetable_network const&,
                                    latlon const& origin, seconds departure,
                                    target_set const&, int max_rounds);

// Exhaustive reference on the time-expanded event graph. Limited to small
// instances (<= 200 stops, <= 2000 trips); throws errc::instance_too_large.
travel_time_result oracle_earliest_arrival(timetable_network const&,
                                           query const&);

inline constexpr std::size_t oracle_max_stops = 200;
inline constexpr std::size_t oracle_max_trips = 2000;

}  // namespace cfta::router
