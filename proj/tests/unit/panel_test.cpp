#include <chrono>
#include <cmath>
#include <random>

#include "gtest/gtest.h"

#include "cfta/error.hpp"
#include "cfta/panel.hpp"

#include "random_feed.hpp"

using namespace cfta;
using namespace std::chrono;
using router::unreachable;

namespace {

constexpr auto service_day = 2025y / June / 10;
constexpr auto na_s = unreachable;

panel::partition make_partition(std::string scenario, std::string day,
                                gtfs::seconds const instant,
                                std::vector<gtfs::seconds> times) {
  auto p = panel::partition{};
  p.scenario = std::move(scenario);
  p.band = "AM";
  p.day = std::move(day);
  p.instant = instant;
  p.snapshot = panel::snapshot_label(instant - 28800);
  p.times = std::move(times);
  return p;
}

panel::od_panel two_node_panel(std::vector<std::array<gtfs::seconds, 2>> const& ab) {
  auto p = panel::od_panel{};
  p.nodes = {{"0", {50.85, 4.35}}, {"1", {50.86, 4.35}}};
  auto k = 0;
  for (auto const& [x, y] : ab) {
    p.partitions.push_back(make_partition("s", "0610", 28200 + 600 * k++, {0, x, y, 0}));
  }
  return p;
}

std::vector<panel::node> random_nodes(std::mt19937_64& rng, std::size_t const n) {
  auto pts = std::vector<latlon>{};
  for (auto k = std::size_t{0}; k != n; ++k) {
    pts.push_back(test::random_point(rng));
  }
  return panel::nodes_from_positions(pts);
}

}  // namespace

TEST(panel, labels) {
  EXPECT_EQ(panel::snapshot_label(-600), "t-10");
  EXPECT_EQ(panel::snapshot_label(0), "t");
  EXPECT_EQ(panel::snapshot_label(600), "t+10");
  EXPECT_EQ(panel::hhmm(7 * 3600 + 50 * 60), "0750");
  auto const s = panel::parse_slice("PM=2025-06-12T17:30");
  EXPECT_EQ(s.band, "PM");
  EXPECT_EQ(s.day_code(), "0612");
  EXPECT_EQ(s.instants(), (std::vector<gtfs::seconds>{62400, 63000, 63600}));
  EXPECT_THROW(panel::parse_slice("2025-06-12T17:30"), error);
  auto const d = panel::default_slices();
  ASSERT_EQ(d.size(), 3U);
  EXPECT_EQ(d[0].day_code(), "0610");
  EXPECT_EQ(d[2].band, "SAT");
}

TEST(panel, serial_and_parallel_kernels_agree) {
  auto rng = std::mt19937_64{41};
  for (auto trial = 0; trial != 10; ++trial) {
    auto const f = test::random_feed(rng);
    auto const net = router::build_network(f, service_day, test::random_network_params(rng));
    auto const nodes = random_nodes(rng, 25);
    auto oor_a = std::size_t{0};
    auto oor_b = std::size_t{0};
    auto const a = panel::compute_partition_serial(net, nodes, 7 * 3600 + 1800, {}, &oor_a);
    for (auto const threads : {1, 2, 4, 8}) {
      auto const b =
          panel::compute_partition_omp(net, nodes, 7 * 3600 + 1800, {}, threads, &oor_b);
      EXPECT_EQ(a, b);
      EXPECT_EQ(oor_a, oor_b);
    }
    for (auto i = std::size_t{0}; i != nodes.size(); ++i) {
      EXPECT_EQ(a[i * nodes.size() + i], 0);
    }
  }
}

TEST(panel, kernel_matches_oracle) {
  // a 5-stop line
  auto f = gtfs::feed{};
  f.routes["L"] = {"L", "", "L", "", 0};
  f.calendars["S"] = {"S", {true, true, true, true, true, true, true}, 2025y / January / 1,
                      2025y / December / 31};
  auto stops = std::vector<latlon>{};
  for (auto k = 0; k != 5; ++k) {
    stops.push_back(destination_point(test::random_area_center, 0.0, 800.0 * k));
    auto const id = std::to_string(k);
    f.stops[id] = {id, id, stops.back().lat, stops.back().lon};
  }
  for (auto t = 0; t != 12; ++t) {
    auto trip = gtfs::trip{"t" + std::to_string(t), "L", "S", "", 0, {}};
    for (auto k = 0; k != 5; ++k) {
      auto const time = 25200 + 600 * t + 150 * k;
      trip.stop_times.push_back({std::to_string(k), time, time});
    }
    f.trips[trip.id] = trip;
  }
  auto const net = router::build_network(f, service_day);
  auto pts = std::vector<latlon>{};
  for (auto const& s : stops) {
    pts.push_back(destination_point(s, 90.0, 200.0));
  }
  auto const nodes = panel::nodes_from_positions(pts);
  auto const times = panel::compute_partition_serial(net, nodes, 28800, {});
  for (auto i = std::size_t{0}; i != nodes.size(); ++i) {
    auto q = router::query{};
    q.origin = pts[i];
    q.destinations = pts;
    q.departure = 28800;
    auto const o = router::oracle_earliest_arrival(net, q);
    for (auto j = std::size_t{0}; j != nodes.size(); ++j) {
      EXPECT_EQ(times[i * nodes.size() + j], o.times[j]);
    }
  }
}

TEST(panel, row_counts_and_determinism) {
  auto rng = std::mt19937_64{8};
  auto const f = test::random_feed(rng);
  auto const net = router::build_network(f, service_day);
  auto networks = panel::network_map{};
  networks["a"][service_day] = &net;
  networks["b"][service_day] = &net;
  auto const nodes = random_nodes(rng, 3);
  auto const slices = std::vector<panel::slice_spec>{{"AM", service_day, 28800}};
  auto const p = panel::compute_panel(networks, nodes, slices);
  ASSERT_EQ(p.partitions.size(), 6U);
  EXPECT_EQ(p.row_count(), 36U);
  for (auto k = 0U; k != 3U; ++k) {
    EXPECT_EQ(p.partitions[k].times, p.partitions[k + 3].times);
  }
  auto const csv = panel::partition_csv(p.nodes, p.partitions[0]);
  EXPECT_EQ(std::count(begin(csv), end(csv), '\n'), 1 + 6);

  auto missing = panel::network_map{};
  missing["a"][2025y / June / 11] = &net;
  EXPECT_THROW(panel::compute_panel(missing, nodes, slices), error);
}

TEST(panel, csv_schema_and_round_trip) {
  auto p = two_node_panel({{3119, na_s}});
  p.partitions[0].scenario = "full";
  auto const csv = panel::partition_csv(p.nodes, p.partitions[0]);
  EXPECT_EQ(csv.substr(0, csv.find("\r\n")),
            "origin_id,destination_id,origin_lon,origin_lat,destination_lon,destination_lat,"
            "scenario,snapshot_time,time_s,day,start_time");
  EXPECT_NE(csv.find("0,1,4.35,50.85,4.35,50.86,full,t-10,3119,0610,0750\r\n"),
            std::string::npos);
  EXPECT_NE(csv.find(",NA,"), std::string::npos);
  EXPECT_EQ(panel::partition_file_name(p.partitions[0]), "full_AM_0610_0750.csv");

  auto const back = panel::parse_partition_csv(csv, "x.csv");
  EXPECT_EQ(back.part.times, p.partitions[0].times);
  EXPECT_EQ(back.part.snapshot, "t-10");
  EXPECT_EQ(back.part.instant, 28200);
  ASSERT_EQ(back.nodes.size(), 2U);
  EXPECT_EQ(back.nodes[1].pos, p.nodes[1].pos);
}

TEST(panel, aggregate_means_are_strict) {
  auto const p = two_node_panel({{3119, 600}, {3119, 660}, {3119, 900}});
  auto const m = panel::aggregate_over_instants(p, "s");
  EXPECT_EQ(m(0, 1), 3119.0);
  EXPECT_EQ(m(1, 0), 720.0);
  EXPECT_EQ(m(0, 0), 0.0);

  auto const q = two_node_panel({{3119, 600}, {na_s, 660}, {3119, 900}});
  auto const n = panel::aggregate_over_instants(q, "s");
  EXPECT_TRUE(std::isnan(n(0, 1)));
  EXPECT_EQ(n(1, 0), 720.0);
}

TEST(panel, aggregate_by_day) {
  auto p = two_node_panel({{100, 100}, {200, 200}});
  p.partitions[1].day = "0612";
  EXPECT_EQ(panel::aggregate_over_instants(p, "s", "0610")(0, 1), 100.0);
  EXPECT_EQ(panel::aggregate_over_instants(p, "s", "0612")(0, 1), 200.0);
  EXPECT_EQ(panel::aggregate_over_instants(p, "s")(0, 1), 150.0);
  EXPECT_EQ(panel::days(p), (std::vector<std::string>{"0610", "0612"}));
}

TEST(panel, drop_unreachable) {
  auto p = panel::od_panel{};
  p.nodes = {{"0", {}}, {"1", {}}, {"2", {}}};
  // node 2 is NA everywhere, 0 <-> 1 connected
  p.partitions.push_back(make_partition("s", "0610", 28800, {0, 10, na_s, 20, 0, na_s, na_s, na_s, 0}));
  p.partitions.push_back(make_partition("t", "0610", 28800, {0, 12, na_s, na_s, 0, na_s, na_s, na_s, 0}));
  auto const before = panel::aggregate_over_instants(p, "s");
  auto dropped = panel::drop_unreachable(p);
  EXPECT_EQ(dropped, std::vector<std::string>{"2"});
  ASSERT_EQ(p.size(), 2U);
  EXPECT_EQ(p.partitions[0].times, (std::vector<gtfs::seconds>{0, 10, 20, 0}));
  EXPECT_EQ(p.row_count(), 4U);
  // dropping commutes with averaging
  auto const after = panel::aggregate_over_instants(p, "s");
  EXPECT_EQ(after(0, 1), before(0, 1));
  EXPECT_EQ(after(1, 0), before(1, 0));
  EXPECT_TRUE(panel::drop_unreachable(p).empty());
}

TEST(panel, one_way_reachability_keeps_node) {
  auto p = panel::od_panel{};
  p.nodes = {{"0", {}}, {"1", {}}};
  p.partitions.push_back(make_partition("s", "0610", 28800, {0, 10, na_s, 0}));
  EXPECT_TRUE(panel::drop_unreachable(p).empty());
}
