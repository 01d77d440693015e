#include <algorithm>

#include "fmt/core.h"

#include "cfta/error.hpp"
#include "cfta/router.hpp"

namespace cfta::router {

// Breadth-first search over boarding events, one level per vehicle used.
// Every (trip, stop position) pair is an event node; access, egress and
// transfer walks are recomputed by brute force over all stop pairs so that
// nothing is shared with the round-based router beyond the timetable itself.
travel_time_result oracle_earliest_arrival(timetable_network const& net,
                                           query const& q) {
  auto const stops = net.stops();
  auto const patterns = net.patterns();
  if (stops.size() > oracle_max_stops || net.trip_count() > oracle_max_trips) {
    throw error{errc::instance_too_large,
                fmt::format("{} stops, {} trips", stops.size(), net.trip_count())};
  }
  if (q.max_rounds < 1) {
    throw error{errc::invalid_argument, "max_rounds must be >= 1"};
  }

  auto const& params = net.params();
  auto const limit = std::min(q.max_walk_per_leg_m, params.walk.max_access_m);
  auto const n = stops.size();

  // transfer walks: all ordered pairs within the radius
  auto walks = std::vector<std::vector<std::pair<std::size_t, seconds>>>(n);
  for (auto a = std::size_t{0}; a != n; ++a) {
    for (auto b = std::size_t{0}; b != n; ++b) {
      if (a == b) {
        continue;
      }
      auto const d = haversine_m(stops[a].pos, stops[b].pos);
      if (d <= params.transfer_radius_m) {
        walks[a].emplace_back(b, walk_time(d, params.walk));
      }
    }
  }

  auto board = std::vector<seconds>(n, unreachable);
  auto any_access = false;
  for (auto s = std::size_t{0}; s != n; ++s) {
    auto const d = haversine_m(q.origin, stops[s].pos);
    if (d <= limit) {
      board[s] = q.departure + walk_time(d, params.walk);
      any_access = true;
    }
  }

  // earliest boarded position per trip, over all levels so far
  auto boarded = std::vector<std::vector<std::size_t>>(patterns.size());
  for (auto p = std::size_t{0}; p != patterns.size(); ++p) {
    boarded[p].assign(patterns[p].trip_count(), patterns[p].stops.size());
  }

  auto best = std::vector<seconds>(n, unreachable);
  for (auto level = 0; level != q.max_rounds; ++level) {
    auto reached = std::vector<seconds>(n, unreachable);
    for (auto p = std::size_t{0}; p != patterns.size(); ++p) {
      auto const& pat = patterns[p];
      for (auto t = std::size_t{0}; t != pat.trip_count(); ++t) {
        auto from = boarded[p][t];
        for (auto i = std::size_t{0}; i < from; ++i) {
          auto const b = board[pat.stops[i]];
          if (b != unreachable && pat.dep(t, i) >= b) {
            from = i;
            break;
          }
        }
        boarded[p][t] = from;
        for (auto j = from + 1; j < pat.stops.size(); ++j) {
          reached[pat.stops[j]] = std::min(reached[pat.stops[j]], pat.arr(t, j));
        }
      }
    }

    for (auto s = std::size_t{0}; s != n; ++s) {
      best[s] = std::min(best[s], reached[s]);
    }
    for (auto s = std::size_t{0}; s != n; ++s) {
      if (reached[s] == unreachable) {
        continue;
      }
      board[s] = std::min(board[s], reached[s] + params.transfer_slack);
      for (auto const& [to, w] : walks[s]) {
        board[to] = std::min(board[to], reached[s] + w + params.transfer_slack);
      }
    }
  }

  auto result = travel_time_result{};
  result.times.assign(q.destinations.size(), unreachable);
  auto any_walk = false;
  for (auto k = std::size_t{0}; k != q.destinations.size(); ++k) {
    auto const& dest = q.destinations[k];
    auto const direct = haversine_m(q.origin, dest);
    if (direct <= limit) {
      result.times[k] = walk_time(direct, params.walk);
      any_walk = true;
    }
    for (auto s = std::size_t{0}; s != n; ++s) {
      if (best[s] == unreachable) {
        continue;
      }
      auto const d = haversine_m(stops[s].pos, dest);
      if (d <= limit) {
        result.times[k] = std::min(result.times[k],
                                   best[s] + walk_time(d, params.walk) - q.departure);
      }
    }
  }
  result.origin_out_of_range = !any_access && !any_walk;
  return result;
}

}  // namespace cfta::router
