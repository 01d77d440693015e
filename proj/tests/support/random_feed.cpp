#include "random_feed.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "fmt/format.h"

namespace cfta::test {

namespace {

latlon offset(latlon const& c, double const east_m, double const north_m) {
  auto const p = destination_point(c, 90.0, east_m);
  return destination_point(p, 0.0, north_m);
}

}  // namespace

latlon random_point(std::mt19937_64& rng, random_feed_params const& p,
                    double const margin_m) {
  auto u = std::uniform_real_distribution<double>{-p.area_m / 2.0 - margin_m,
                                                  p.area_m / 2.0 + margin_m};
  auto const e = u(rng);
  auto const n = u(rng);
  return offset(random_area_center, e, n);
}

gtfs::feed random_feed(std::mt19937_64& rng, random_feed_params const& p) {
  using namespace std::chrono;
  auto f = gtfs::feed{};
  f.agencies["a"] = {"a", "Random", "https://example.org", "Europe/Brussels"};
  f.calendars["S"] = gtfs::calendar{
      "S", {true, true, true, true, true, true, true}, 2025y / January / 1,
      2025y / December / 31};

  auto const n_stops = std::uniform_int_distribution<std::size_t>{2, p.max_stops}(rng);
  auto near = std::uniform_real_distribution<double>{-90.0, 90.0};
  for (auto i = std::size_t{0}; i != n_stops; ++i) {
    auto pos = latlon{};
    if (i > 0 && std::bernoulli_distribution{0.35}(rng)) {
      // cluster around an earlier stop
      auto const& other =
          f.stops.at(fmt::format("s{}", std::uniform_int_distribution<std::size_t>{
                                            0, i - 1}(rng)));
      auto const de = near(rng);
      auto const dn = near(rng);
      pos = offset({other.lat, other.lon}, de, dn);
    } else {
      pos = random_point(rng, p, 0.0);
    }
    auto const id = fmt::format("s{}", i);
    f.stops[id] = gtfs::stop{id, id, pos.lat, pos.lon};
  }

  auto const n_routes = std::uniform_int_distribution<std::size_t>{1, 6}(rng);
  auto const n_trips = std::uniform_int_distribution<std::size_t>{1, p.max_trips}(rng);
  auto sequences = std::vector<std::vector<std::size_t>>{};
  for (auto r = std::size_t{0}; r != n_routes; ++r) {
    auto order = std::vector<std::size_t>(n_stops);
    std::iota(begin(order), end(order), 0);
    std::shuffle(begin(order), end(order), rng);
    auto const len = std::uniform_int_distribution<std::size_t>{
        2, std::min<std::size_t>(n_stops, 7)}(rng);
    order.resize(len);
    sequences.push_back(order);
    auto const id = fmt::format("r{}", r);
    f.routes[id] = gtfs::route{id, "a", id, "", 3};
  }

  auto route_of = std::uniform_int_distribution<std::size_t>{0, n_routes - 1};
  auto start = std::uniform_int_distribution<int>{7 * 3600, 9 * 3600};
  auto hop = std::uniform_int_distribution<int>{30, 600};
  auto dwell = std::uniform_int_distribution<int>{0, 60};
  for (auto t = std::size_t{0}; t != n_trips; ++t) {
    auto const r = route_of(rng);
    auto trip = gtfs::trip{};
    trip.id = fmt::format("t{}", t);
    trip.route_id = fmt::format("r{}", r);
    trip.service_id = "S";
    auto time = start(rng);
    for (auto k = std::size_t{0}; k != sequences[r].size(); ++k) {
      if (k != 0) {
        time += hop(rng);
      }
      auto const d = k + 1 == sequences[r].size() ? 0 : dwell(rng);
      trip.stop_times.push_back({fmt::format("s{}", sequences[r][k]), time, time + d});
      time += d;
    }
    f.trips[trip.id] = std::move(trip);
  }
  return f;
}

router::network_params random_network_params(std::mt19937_64& rng) {
  auto n = router::network_params{};
  n.walk.speed_mps = std::uniform_real_distribution<double>{0.9, 1.6}(rng);
  n.walk.detour_factor = std::uniform_real_distribution<double>{1.0, 1.5}(rng);
  n.walk.max_access_m = std::uniform_real_distribution<double>{300.0, 1500.0}(rng);
  n.transfer_radius_m = std::uniform_real_distribution<double>{0.0, 400.0}(rng);
  n.transfer_slack = std::uniform_int_distribution<int>{0, 120}(rng);
  return n;
}

std::vector<double> random_integer_sample(std::mt19937_64& rng, std::size_t const n,
                                          int const lo, int const hi) {
  auto d = std::uniform_int_distribution<int>{lo, hi};
  auto out = std::vector<double>(n);
  for (auto& v : out) {
    v = d(rng);
  }
  return out;
}

std::vector<double> random_matrix(std::mt19937_64& rng, std::size_t const n,
                                  double const lo, double const hi) {
  auto d = std::uniform_real_distribution<double>{lo, hi};
  auto out = std::vector<double>(n * n);
  for (auto i = std::size_t{0}; i != n; ++i) {
    for (auto j = std::size_t{0}; j != n; ++j) {
      out[i * n + j] = i == j ? 0.0 : d(rng);
    }
  }
  return out;
}

}  // namespace cfta::test
