#include <algorithm>
#include <chrono>

#include "fmt/format.h"
#include "gtest/gtest.h"

#include "cfta/error.hpp"
#include "cfta/geo.hpp"
#include "cfta/scenario.hpp"

#include "expect_error.hpp"

using namespace cfta;
using namespace cfta::scenario;
using namespace std::chrono;
using test::thrown_code;

namespace {

// One route "L" with `n` trips A -> B, every 10 minutes from 07:00.
gtfs::feed ten_trip_line(std::size_t const n = 10) {
  auto f = gtfs::feed{};
  f.stops["A"] = {"A", "A", 50.85, 4.35};
  f.stops["B"] = {"B", "B", 50.86, 4.35};
  f.routes["L"] = {"L", "", "L1", "", 3};
  f.calendars["S"] = {"S", {true, true, true, true, true, true, true},
                      2025y / January / 1, 2025y / December / 31};
  for (auto k = std::size_t{0}; k != n; ++k) {
    auto const dep = static_cast<gtfs::seconds>(25200 + 600 * k);
    auto const id = fmt::format("t{:02}", k);
    f.trips[id] = {id, "L", "S", "", 0, {{"A", dep, dep}, {"B", dep + 300, dep + 300}}};
  }
  return f;
}

std::vector<gtfs::seconds> departures(gtfs::feed const& f) {
  auto out = std::vector<gtfs::seconds>{};
  for (auto const& [_, t] : f.trips) {
    out.push_back(t.stop_times.front().departure);
  }
  std::sort(begin(out), end(out));
  return out;
}

}  // namespace

TEST(scenario, derive_run_times) {
  auto const a = latlon{50.85, 4.35};
  auto const b = destination_point(a, 0.0, 1000.0);
  auto const stations = std::vector<latlon>{a, b};
  EXPECT_EQ(derive_run_times(stations, {10.0, 0}), std::vector<gtfs::seconds>{100});

  auto const c = destination_point(b, 0.0, 1000.0);
  auto const three = std::vector<latlon>{a, b, c};
  auto const rt = derive_run_times(three, {10.0, 0});
  ASSERT_EQ(rt.size(), 2U);
  EXPECT_EQ(rt[0], rt[1]);

  auto const floor = derive_run_times(stations, {1000.0, 30});
  EXPECT_EQ(floor, std::vector<gtfs::seconds>{30});
}

TEST(scenario, degenerate_segment) {
  auto const a = latlon{50.85, 4.35};
  auto const same = std::vector<latlon>{a, a};
  EXPECT_EQ(thrown_code([&] { derive_run_times(same, {10.0, 0}); }),
            errc::degenerate_segment);
  EXPECT_EQ(derive_run_times(same, {10.0, 20}), std::vector<gtfs::seconds>{20});
}

TEST(scenario, removed_ranks_even_spacing) {
  EXPECT_EQ(removed_ranks(10, 0.8), (std::vector<std::size_t>{2, 7}));
  EXPECT_TRUE(removed_ranks(10, 1.0).empty());
  EXPECT_TRUE(removed_ranks(1, 0.8).empty());
}

TEST(scenario, scale_supply_keeps_eight_of_ten) {
  auto const f = ten_trip_line();
  auto const g = scale_supply_edit(f, {route_selector::field::id, "L"}, 0.8);
  ASSERT_EQ(g.trips.size(), 8U);
  auto const d = departures(g);
  auto const all = departures(f);
  EXPECT_EQ(std::count(begin(d), end(d), all[2]), 0);
  EXPECT_EQ(std::count(begin(d), end(d), all[7]), 0);
  for (auto const& [id, t] : g.trips) {
    EXPECT_EQ(t, f.trips.at(id));  // kept trips untouched
  }
}

TEST(scenario, scale_supply_identity_and_ceiling) {
  auto const f = ten_trip_line();
  EXPECT_EQ(scale_supply_edit(f, {route_selector::field::id, "L"}, 1.0), f);
  auto const one = ten_trip_line(1);
  EXPECT_EQ(scale_supply_edit(one, {route_selector::field::id, "L"}, 0.8).trips.size(), 1U);
  EXPECT_EQ(thrown_code([&] {
              scale_supply_edit(f, {route_selector::field::id, "nope"}, 0.8);
            }),
            errc::unresolved_selector);
}

TEST(scenario, empty_spec_is_identity) {
  auto const f = ten_trip_line();
  auto const dates = std::vector<gtfs::date>{2025y / June / 10};
  EXPECT_EQ(apply_scenario(f, {"baseline", {}}, dates), f);
}

TEST(scenario, add_line_from_headways) {
  auto const f = ten_trip_line();
  auto line = line_definition{};
  line.route_id = "N";
  line.short_name = "N";
  line.stations = {{"X", {50.85, 4.36}}, {"Y", {50.86, 4.36}}};
  line.headways = {{day_type::all, 7 * 3600, 8 * 3600, 600}};
  auto const dates = std::vector<gtfs::date>{2025y / June / 10, 2025y / June / 12};
  auto const g = apply_scenario(f, {"s", {add_line{line}}}, dates);
  auto added = std::size_t{0};
  for (auto const& [id, t] : g.trips) {
    if (t.route_id == "N") {
      ++added;
    } else {
      EXPECT_EQ(t, f.trips.at(id));
    }
  }
  EXPECT_EQ(added, 6U);
  for (auto const d : dates) {
    auto n = 0;
    for (auto const& id : gtfs::service_on_date(g, d)) {
      n += g.trips.at(id).route_id == "N" ? 1 : 0;
    }
    EXPECT_EQ(n, 6);
  }
  EXPECT_TRUE(g.frequencies.empty());
}

TEST(scenario, remove_line) {
  auto const f = ten_trip_line();
  auto const dates = std::vector<gtfs::date>{2025y / June / 10};
  auto const g = apply_scenario(f, {"s", {remove_line{{route_selector::field::id, "L"}}}}, dates);
  EXPECT_TRUE(g.trips.empty());
  EXPECT_TRUE(gtfs::service_on_date(g, dates[0]).empty());
  EXPECT_EQ(thrown_code([&] {
              apply_scenario(f, {"s", {remove_line{{route_selector::field::id, "T99"}}}},
                             dates);
            }),
            errc::unresolved_selector);
}

TEST(scenario, edit_after_removal_conflicts) {
  auto const f = ten_trip_line();
  auto const dates = std::vector<gtfs::date>{2025y / June / 10};
  auto const sel = route_selector{route_selector::field::id, "L"};
  EXPECT_EQ(thrown_code([&] {
              apply_scenario(f, {"s", {remove_line{sel}, scale_supply{sel, 0.5}}}, dates);
            }),
            errc::edit_conflict);
}

TEST(scenario, builtin_specs) {
  auto const specs = builtin_scenarios(default_station_catalog());
  ASSERT_EQ(specs.size(), 3U);
  EXPECT_EQ(specs[0].name, "baseline");
  EXPECT_TRUE(specs[0].edits.empty());

  auto const& partial = std::get<add_line>(specs[1].edits.front()).line;
  EXPECT_EQ(partial.stations.size(), 11U);
  EXPECT_EQ(partial.stations.back().name, "Gare du Nord");
  EXPECT_TRUE(std::holds_alternative<scale_supply>(specs[1].edits[1]));

  auto const& full = std::get<add_line>(specs[2].edits.front()).line;
  EXPECT_EQ(full.stations.size(), 18U);
  EXPECT_EQ(full.stations.front().name, "Albert");
  EXPECT_EQ(full.stations.back().name, "Bordet");
  EXPECT_LT(end_to_end_runtime(full), 1200);
}

TEST(scenario, station_catalog_override) {
  auto const cat = parse_station_catalog("# comment\nname,lat,lon\nA,50.8,4.3\nB,50.9,4.3\n");
  ASSERT_EQ(cat.size(), 2U);
  EXPECT_EQ(cat[1].name, "B");
  EXPECT_TRUE(thrown_code([] { builtin_scenario("full", parse_station_catalog(
                                                            "name,lat,lon\nA,50.8,4.3\n")); })
                  .has_value());
}

TEST(scenario, yaml_round_trip) {
  for (auto const& s : builtin_scenarios(default_station_catalog())) {
    auto const yaml = to_yaml(s);
    auto const back = parse_scenario_spec(yaml);
    EXPECT_EQ(to_yaml(back), yaml);
  }
}

TEST(scenario, malformed_spec_reports_line) {
  auto const yaml =
      "name: broken\n"
      "edits:\n"
      "  - scale_supply:\n"
      "      route: {id: L}\n"
      "      factor: 1.5\n";
  try {
    parse_scenario_spec(yaml, "spec.yaml");
    FAIL();
  } catch (error const& e) {
    EXPECT_EQ(e.code(), errc::malformed_row);
    EXPECT_NE(std::string{e.what()}.find("spec.yaml line 5"), std::string::npos) << e.what();
  }
  EXPECT_TRUE(thrown_code([] { parse_scenario_spec("name: [unclosed\n"); }).has_value());
}
