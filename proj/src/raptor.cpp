#include <algorithm>

#include "cfta/error.hpp"
#include "cfta/router.hpp"

namespace cfta::router {

namespace {

double effective_walk_limit(timetable_network const& net, double const max_walk_m) {
  return std::min(max_walk_m, net.params().walk.max_access_m);
}

// Round-based search. ready[s] is the earliest time a passenger can board at s
// having used fewer vehicles than the current round; arrival[s] is the best
// vehicle arrival at s over all rounds so far.
struct round_search {
  explicit round_search(timetable_network const& net)
      : net_{net},
        ready_(net.stops().size(), unreachable),
        arrival_(net.stops().size(), unreachable),
        marked_(net.stops().size(), false),
        improved_(net.stops().size(), false),
        first_pos_(net.patterns().size(), unmarked) {}

  void run(std::vector<stop_near> const& access, seconds const departure,
           int const max_rounds) {
    for (auto const& a : access) {
      ready_[a.stop] = std::min(ready_[a.stop], departure + a.walk);
      marked_[a.stop] = true;
    }
    for (auto round = 0; round != max_rounds; ++round) {
      if (!scan_patterns()) {
        break;
      }
      relax_transfers();
    }
  }

  std::vector<seconds> const& arrivals() const { return arrival_; }

private:
  static constexpr auto unmarked = std::uint32_t{0xFFFFFFFF};

  // Returns false when nothing is marked (search converged).
  bool scan_patterns() {
    auto touched = std::vector<std::uint32_t>{};
    for (auto s = stop_idx{0}; s != marked_.size(); ++s) {
      if (!marked_[s]) {
        continue;
      }
      marked_[s] = false;
      for (auto const& [p, pos] : net_.patterns_at(s)) {
        if (first_pos_[p] == unmarked) {
          touched.push_back(p);
        }
        first_pos_[p] = std::min(first_pos_[p], pos);
      }
    }
    if (touched.empty()) {
      return false;
    }
    std::sort(begin(touched), end(touched));

    for (auto const p : touched) {
      auto const& pat = net_.patterns()[p];
      auto const n_trips = pat.trip_count();
      auto trip = n_trips;  // none
      for (auto i = std::size_t{first_pos_[p]}; i != pat.stops.size(); ++i) {
        auto const s = pat.stops[i];
        if (trip != n_trips) {
          auto const a = pat.arr(trip, i);
          if (a < arrival_[s]) {
            arrival_[s] = a;
            improved_[s] = true;
          }
        }
        auto const r = ready_[s];
        if (r == unreachable || (trip != n_trips && pat.dep(trip, i) < r)) {
          continue;
        }
        // earliest trip departing at or after r within [0, trip)
        auto lo = std::size_t{0};
        auto hi = trip;
        while (lo < hi) {
          auto const mid = lo + (hi - lo) / 2;
          if (pat.dep(mid, i) >= r) {
            hi = mid;
          } else {
            lo = mid + 1;
          }
        }
        trip = lo;
      }
      first_pos_[p] = unmarked;
    }
    return true;
  }

  void relax_transfers() {
    auto const slack = net_.params().transfer_slack;
    auto const relax = [&](stop_idx const s, seconds const t) {
      if (t < ready_[s]) {
        ready_[s] = t;
        marked_[s] = true;
      }
    };
    for (auto s = stop_idx{0}; s != improved_.size(); ++s) {
      if (!improved_[s]) {
        continue;
      }
      improved_[s] = false;
      auto const a = arrival_[s];
      relax(s, a + slack);
      for (auto const& fp : net_.footpaths_from(s)) {
        relax(fp.to, a + fp.duration + slack);
      }
    }
  }

  timetable_network const& net_;
  std::vector<seconds> ready_;
  std::vector<seconds> arrival_;
  std::vector<bool> marked_;
  std::vector<bool> improved_;
  std::vector<std::uint32_t> first_pos_;
};

}  // namespace

target_set prepare_targets(timetable_network const& net,
                           std::span<latlon const> points, double const max_walk_m) {
  auto t = target_set{};
  t.max_walk_m = effective_walk_limit(net, max_walk_m);
  t.points.assign(begin(points), end(points));
  t.near.reserve(points.size());
  for (auto const& p : points) {
    t.near.push_back(net.stops_near(p, t.max_walk_m));
  }
  return t;
}

travel_time_result earliest_arrival(timetable_network const& net,
                                    latlon const& origin, seconds const departure,
                                    target_set const& targets, int const max_rounds) {
  if (max_rounds < 1) {
    throw error{errc::invalid_argument, "max_rounds must be >= 1"};
  }
  auto const limit = targets.max_walk_m;
  auto const& walk = net.params().walk;

  auto result = travel_time_result{};
  result.times.assign(targets.points.size(), unreachable);

  auto any_walk = false;
  for (auto i = std::size_t{0}; i != targets.points.size(); ++i) {
    auto const d = haversine_m(origin, targets.points[i]);
    if (d <= limit) {
      result.times[i] = walk_time(d, walk);
      any_walk = true;
    }
  }

  auto const access = net.stops_near(origin, limit);
  if (access.empty()) {
    result.origin_out_of_range = !any_walk;
    return result;
  }

  auto search = round_search{net};
  search.run(access, departure, max_rounds);
  auto const& arrival = search.arrivals();

  for (auto i = std::size_t{0}; i != targets.points.size(); ++i) {
    for (auto const& e : targets.near[i]) {
      if (arrival[e.stop] == unreachable) {
        continue;
      }
      auto const t = arrival[e.stop] + e.walk - departure;
      result.times[i] = std::min(result.times[i], t);
    }
  }
  return result;
}

travel_time_result earliest_arrival(timetable_network const& net, query const& q) {
  auto const targets = prepare_targets(net, q.destinations, q.max_walk_per_leg_m);
  return earliest_arrival(net, q.origin, q.departure, targets, q.max_rounds);
}

}  // namespace cfta::router
