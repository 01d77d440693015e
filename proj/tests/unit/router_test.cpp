#include <chrono>
#include <random>

#include "fmt/format.h"
#include "gtest/gtest.h"

#include "cfta/error.hpp"
#include "cfta/geo.hpp"
#include "cfta/router.hpp"

#include "expect_error.hpp"
#include "random_feed.hpp"

using namespace cfta;
using namespace std::chrono;
using router::unreachable;

namespace {

constexpr auto service_day = 2025y / June / 10;
auto const a_pos = latlon{50.85, 4.35};
auto const b_pos = destination_point(a_pos, 0.0, 3000.0);

gtfs::feed two_stop_feed() {
  auto f = gtfs::feed{};
  f.stops["A"] = {"A", "A", a_pos.lat, a_pos.lon};
  f.stops["B"] = {"B", "B", b_pos.lat, b_pos.lon};
  f.routes["R"] = {"R", "", "R", "", 3};
  f.calendars["S"] = {"S", {true, true, true, true, true, true, true},
                      2025y / January / 1, 2025y / December / 31};
  f.trips["T"] = {"T", "R", "S", "", 0, {{"A", 28800, 28800}, {"B", 29100, 29100}}};
  return f;
}

router::query make_query(latlon const o, latlon const d, gtfs::seconds const t) {
  auto q = router::query{};
  q.origin = o;
  q.destinations = {d};
  q.departure = t;
  return q;
}

}  // namespace

TEST(router, walk_time_rounds_up) {
  auto const w = router::walk_params{1.3, 1.0, 1500.0};
  EXPECT_EQ(router::walk_time(130.0, w), 100);
  EXPECT_EQ(router::walk_time(130.1, w), 101);
  EXPECT_EQ(router::walk_time(0.0, w), 0);
}

TEST(router, single_trip) {
  auto const net = router::build_network(two_stop_feed(), service_day);
  ASSERT_EQ(net.patterns().size(), 1U);
  EXPECT_EQ(net.patterns()[0].trip_count(), 1U);
  EXPECT_EQ(router::earliest_arrival(net, make_query(a_pos, b_pos, 28500)).times[0], 600);
  EXPECT_EQ(router::earliest_arrival(net, make_query(a_pos, b_pos, 28860)).times[0],
            unreachable);
}

TEST(router, inactive_day_is_walk_only) {
  auto const net = router::build_network(two_stop_feed(), 2026y / June / 10);
  EXPECT_EQ(net.trip_count(), 0U);
  EXPECT_EQ(router::earliest_arrival(net, make_query(a_pos, b_pos, 28500)).times[0],
            unreachable);
}

TEST(router, walk_beats_transit) {
  auto p = router::network_params{};
  p.walk = {1.3, 1.0, 1500.0};
  auto f = two_stop_feed();
  auto const d = destination_point(a_pos, 90.0, 130.0);
  f.stops["C"] = {"C", "C", d.lat, d.lon};
  f.trips["U"] = {"U", "R", "S", "", 0, {{"A", 28500, 28500}, {"C", 28510, 28510}}};
  auto const net = router::build_network(f, service_day, p);
  EXPECT_EQ(router::earliest_arrival(net, make_query(a_pos, d, 28800)).times[0], 100);
}

TEST(router, patterns_group_identical_sequences) {
  auto f = two_stop_feed();
  f.trips["T2"] = {"T2", "R", "S", "", 0, {{"A", 29400, 29400}, {"B", 29700, 29700}}};
  auto const net = router::build_network(f, service_day);
  ASSERT_EQ(net.patterns().size(), 1U);
  EXPECT_EQ(net.patterns()[0].trip_count(), 2U);
}

TEST(router, overtaking_trips_split_patterns) {
  auto f = two_stop_feed();
  f.trips["Fast"] = {"Fast", "R", "S", "", 0, {{"A", 28810, 28810}, {"B", 28900, 28900}}};
  auto const net = router::build_network(f, service_day);
  EXPECT_EQ(net.patterns().size(), 2U);
  EXPECT_EQ(router::earliest_arrival(net, make_query(a_pos, b_pos, 28700)).times[0], 200);
}

TEST(router, symmetric_transfer_pair) {
  auto f = two_stop_feed();
  auto const c = destination_point(a_pos, 90.0, 100.0);
  f.stops["C"] = {"C", "C", c.lat, c.lon};
  auto p = router::network_params{};
  p.transfer_radius_m = 150.0;
  auto const net = router::build_network(f, service_day, p);
  auto idx = std::map<std::string, router::stop_idx>{};
  for (auto i = router::stop_idx{0}; i != net.stops().size(); ++i) {
    idx[net.stops()[i].id] = i;
  }
  auto const ab = net.footpaths_from(idx["A"]);
  auto const cb = net.footpaths_from(idx["C"]);
  ASSERT_EQ(ab.size(), 1U);
  ASSERT_EQ(cb.size(), 1U);
  EXPECT_EQ(ab[0].to, idx["C"]);
  EXPECT_EQ(cb[0].to, idx["A"]);
  EXPECT_EQ(ab[0].duration, cb[0].duration);
  EXPECT_TRUE(net.footpaths_from(idx["B"]).empty());
}

TEST(router, walk_only_network_is_the_walk_model) {
  auto rng = std::mt19937_64{5};
  auto const net = router::build_network(gtfs::feed{}, service_day);
  auto const& w = net.params().walk;
  for (auto k = 0; k != 200; ++k) {
    auto const o = test::random_point(rng);
    auto const d = test::random_point(rng);
    auto const dist = haversine_m(o, d);
    auto const t = router::earliest_arrival(net, make_query(o, d, 3600)).times[0];
    EXPECT_EQ(t, dist <= w.max_access_m ? router::walk_time(dist, w) : unreachable);
    if (t != unreachable) {
      EXPECT_GE(t, dist * w.detour_factor / w.speed_mps - 1e-6);
    }
  }
}

TEST(router, origin_out_of_range) {
  auto const net = router::build_network(two_stop_feed(), service_day);
  auto const far = destination_point(a_pos, 270.0, 5000.0);
  auto const r = router::earliest_arrival(net, make_query(far, b_pos, 28500));
  EXPECT_TRUE(r.origin_out_of_range);
  EXPECT_EQ(r.times[0], unreachable);
}

TEST(router, oracle_trivial_cases) {
  auto const empty = router::build_network(gtfs::feed{}, service_day);
  EXPECT_EQ(router::oracle_earliest_arrival(empty, make_query(a_pos, a_pos, 100)).times[0], 0);
  auto const net = router::build_network(two_stop_feed(), service_day);
  EXPECT_EQ(router::oracle_earliest_arrival(net, make_query(a_pos, b_pos, 28500)).times[0],
            600);
}

TEST(router, oracle_rejects_large_networks) {
  auto f = gtfs::feed{};
  for (auto i = 0; i != 201; ++i) {
    auto const p = destination_point(a_pos, 0.0, 10.0 * i);
    auto const id = fmt::format("s{}", i);
    f.stops[id] = {id, id, p.lat, p.lon};
  }
  auto const net = router::build_network(f, service_day);
  EXPECT_EQ(test::thrown_code([&] {
              router::oracle_earliest_arrival(net, make_query(a_pos, b_pos, 0));
            }),
            errc::instance_too_large);
}

TEST(router, matches_oracle_on_random_feeds) {
  auto rng = std::mt19937_64{2024};
  auto when = std::uniform_int_distribution<gtfs::seconds>{6 * 3600 + 1800, 9 * 3600};
  auto rounds = std::uniform_int_distribution<int>{1, 5};
  auto mismatches = 0;
  for (auto trial = 0; trial != 150; ++trial) {
    auto const f = test::random_feed(rng);
    auto const net = router::build_network(f, service_day, test::random_network_params(rng));
    auto q = router::query{};
    q.origin = test::random_point(rng);
    for (auto k = 0; k != 8; ++k) {
      q.destinations.push_back(test::random_point(rng));
    }
    q.departure = when(rng);
    q.max_rounds = rounds(rng);
    q.max_walk_per_leg_m = std::uniform_real_distribution<double>{200.0, 2000.0}(rng);
    auto const fast = router::earliest_arrival(net, q);
    auto const slow = router::oracle_earliest_arrival(net, q);
    mismatches += fast.times == slow.times ? 0 : 1;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(router, properties_on_random_feeds) {
  auto rng = std::mt19937_64{99};
  for (auto trial = 0; trial != 60; ++trial) {
    auto f = test::random_feed(rng);
    auto const params = test::random_network_params(rng);
    auto const net = router::build_network(f, service_day, params);
    auto q = router::query{};
    q.origin = test::random_point(rng);
    for (auto k = 0; k != 6; ++k) {
      q.destinations.push_back(test::random_point(rng));
    }
    q.departure = 7 * 3600 + 1200;
    auto const base = router::earliest_arrival(net, q);

    // never slower than walking there directly
    for (auto k = std::size_t{0}; k != q.destinations.size(); ++k) {
      auto const d = haversine_m(q.origin, q.destinations[k]);
      if (d <= std::min(q.max_walk_per_leg_m, params.walk.max_access_m)) {
        EXPECT_LE(base.times[k], router::walk_time(d, params.walk));
      }
    }

    // later departure never arrives earlier
    auto later = q;
    later.departure += 300;
    auto const l = router::earliest_arrival(net, later);
    for (auto k = std::size_t{0}; k != q.destinations.size(); ++k) {
      if (base.times[k] == unreachable) {
        continue;
      }
      auto const arr_base = q.departure + base.times[k];
      if (l.times[k] != unreachable) {
        EXPECT_GE(later.departure + l.times[k], arr_base);
      }
    }

    // an extra trip never hurts
    auto const first = f.trips.begin()->second;
    auto extra = first;
    extra.id = "extra";
    for (auto& st : extra.stop_times) {
      st.arrival += 97;
      st.departure += 97;
    }
    f.trips["extra"] = extra;
    auto const more = router::earliest_arrival(router::build_network(f, service_day, params), q);
    for (auto k = std::size_t{0}; k != q.destinations.size(); ++k) {
      EXPECT_LE(more.times[k], base.times[k]);
    }
  }
}
