#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>

#include "boost/geometry.hpp"
#include "boost/geometry/geometries/box.hpp"
#include "boost/geometry/geometries/point.hpp"
#include "boost/geometry/index/rtree.hpp"

#include "cfta/router.hpp"

namespace cfta::router {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

using point_t = bg::model::point<double, 2, bg::cs::cartesian>;  // (lon, lat)
using box_t = bg::model::box<point_t>;
using value_t = std::pair<point_t, stop_idx>;

class spatial_index {
public:
  explicit spatial_index(std::span<stop_info const> stops) {
    auto values = std::vector<value_t>{};
    values.reserve(stops.size());
    for (auto i = std::size_t{0}; i < stops.size(); ++i) {
      values.emplace_back(point_t{stops[i].pos.lon, stops[i].pos.lat},
                          static_cast<stop_idx>(i));
    }
    tree_ = bgi::rtree<value_t, bgi::quadratic<16>>{values};
  }

  // Candidate stops in a lat/lon box that contains the radius-r circle.
  template <typename Fn>
  void for_each_candidate(latlon const& p, double const r, Fn&& fn) const {
    constexpr auto m_per_deg = earth_radius_m * std::numbers::pi / 180.0;
    auto const dlat = 1.01 * r / m_per_deg + 1e-9;
    auto const lat_ext = std::min(89.0, std::abs(p.lat) + dlat);
    auto const coslat = std::cos(lat_ext * std::numbers::pi / 180.0);
    auto const dlon = dlat / coslat;
    auto const box = box_t{point_t{p.lon - dlon, p.lat - dlat},
                           point_t{p.lon + dlon, p.lat + dlat}};
    for (auto it = tree_.qbegin(bgi::intersects(box)); it != tree_.qend(); ++it) {
      fn(it->second);
    }
  }

private:
  bgi::rtree<value_t, bgi::quadratic<16>> tree_;
};

seconds walk_time(double const distance_m, walk_params const& w) {
  auto const t = distance_m * w.detour_factor / w.speed_mps;
  return std::max(seconds{0}, static_cast<seconds>(std::ceil(t - 1e-6)));
}

timetable_network::timetable_network(std::vector<stop_info> stops,
                                     std::vector<pattern> patterns,
                                     network_params const params)
    : stops_{std::move(stops)},
      patterns_{std::move(patterns)},
      params_{params},
      index_{std::make_unique<spatial_index>(stops_)} {
  auto const n = stops_.size();

  auto per_stop = std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>(n);
  for (auto p = std::size_t{0}; p < patterns_.size(); ++p) {
    auto const& stops_of = patterns_[p].stops;
    for (auto i = std::size_t{0}; i < stops_of.size(); ++i) {
      per_stop[stops_of[i]].emplace_back(static_cast<std::uint32_t>(p),
                                         static_cast<std::uint32_t>(i));
    }
  }
  stop_pattern_offsets_.reserve(n + 1);
  stop_pattern_offsets_.push_back(0);
  for (auto const& v : per_stop) {
    stop_patterns_.insert(end(stop_patterns_), begin(v), end(v));
    stop_pattern_offsets_.push_back(static_cast<std::uint32_t>(stop_patterns_.size()));
  }

  footpath_offsets_.reserve(n + 1);
  footpath_offsets_.push_back(0);
  for (auto s = std::size_t{0}; s < n; ++s) {
    for (auto const& near : stops_near(stops_[s].pos, params_.transfer_radius_m)) {
      if (near.stop != s) {
        footpaths_.push_back(footpath{near.stop, near.walk});
      }
    }
    footpath_offsets_.push_back(static_cast<std::uint32_t>(footpaths_.size()));
  }
}

timetable_network::~timetable_network() = default;
timetable_network::timetable_network(timetable_network&&) noexcept = default;
timetable_network& timetable_network::operator=(timetable_network&&) noexcept =
    default;

std::size_t timetable_network::trip_count() const {
  auto n = std::size_t{0};
  for (auto const& p : patterns_) {
    n += p.trip_count();
  }
  return n;
}

std::span<std::pair<std::uint32_t, std::uint32_t> const>
timetable_network::patterns_at(stop_idx const s) const {
  return std::span{stop_patterns_}.subspan(
      stop_pattern_offsets_[s], stop_pattern_offsets_[s + 1] - stop_pattern_offsets_[s]);
}

std::span<footpath const> timetable_network::footpaths_from(stop_idx const s) const {
  return std::span{footpaths_}.subspan(footpath_offsets_[s],
                                       footpath_offsets_[s + 1] - footpath_offsets_[s]);
}

std::vector<stop_near> timetable_network::stops_near(latlon const& p,
                                                     double const radius_m) const {
  auto out = std::vector<stop_near>{};
  index_->for_each_candidate(p, radius_m, [&](stop_idx const s) {
    auto const d = haversine_m(p, stops_[s].pos);
    if (d <= radius_m) {
      out.push_back(stop_near{s, walk_time(d, params_.walk)});
    }
  });
  std::sort(begin(out), end(out),
            [](stop_near const& a, stop_near const& b) { return a.stop < b.stop; });
  return out;
}

timetable_network build_network(gtfs::feed const& input, gtfs::date const date,
                                network_params const& params) {
  // headway-defined trips are routed as their explicit departures
  auto expanded = std::optional<gtfs::feed>{};
  if (!input.frequencies.empty()) {
    expanded = gtfs::expand_frequencies(input);
  }
  auto const& feed = expanded ? *expanded : input;

  auto stops = std::vector<stop_info>{};
  auto index_of = std::map<std::string, stop_idx>{};
  for (auto const& [id, s] : feed.stops) {
    index_of.emplace(id, static_cast<stop_idx>(stops.size()));
    stops.push_back(stop_info{id, s.name, {s.lat, s.lon}});
  }

  // group active trips by stop sequence
  auto groups = std::map<std::vector<stop_idx>, std::vector<gtfs::trip const*>>{};
  for (auto const& trip_id : gtfs::service_on_date(feed, date)) {
    auto const& t = feed.trips.at(trip_id);
    if (t.stop_times.size() < 2) {
      continue;
    }
    auto seq = std::vector<stop_idx>{};
    seq.reserve(t.stop_times.size());
    for (auto const& st : t.stop_times) {
      seq.push_back(index_of.at(st.stop_id));
    }
    groups[std::move(seq)].push_back(&t);
  }

  auto patterns = std::vector<pattern>{};
  for (auto& [seq, trips] : groups) {
    std::sort(begin(trips), end(trips), [](gtfs::trip const* a, gtfs::trip const* b) {
      auto const key = [](gtfs::trip const* t) {
        return std::tuple{t->stop_times.front().departure, t->stop_times.back().arrival};
      };
      return key(a) != key(b) ? key(a) < key(b) : a->id < b->id;
    });

    // Greedy chain split: a trip joins the first chain whose last trip it
    // does not overtake anywhere.
    auto chains = std::vector<std::vector<gtfs::trip const*>>{};
    auto const dominates = [](gtfs::trip const* later, gtfs::trip const* earlier) {
      for (auto i = std::size_t{0}; i < later->stop_times.size(); ++i) {
        if (later->stop_times[i].arrival < earlier->stop_times[i].arrival ||
            later->stop_times[i].departure < earlier->stop_times[i].departure) {
          return false;
        }
      }
      return true;
    };
    for (auto const* t : trips) {
      auto placed = false;
      for (auto& c : chains) {
        if (dominates(t, c.back())) {
          c.push_back(t);
          placed = true;
          break;
        }
      }
      if (!placed) {
        chains.push_back({t});
      }
    }

    for (auto const& c : chains) {
      auto p = pattern{};
      p.stops = seq;
      for (auto const* t : c) {
        p.trip_ids.push_back(t->id);
        for (auto const& st : t->stop_times) {
          p.arrivals.push_back(st.arrival);
          p.departures.push_back(st.departure);
        }
      }
      patterns.push_back(std::move(p));
    }
  }

  return timetable_network{std::move(stops), std::move(patterns), params};
}

}  // namespace cfta::router
