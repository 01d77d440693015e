#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cfta/geo.hpp"
#include "cfta/gtfs.hpp"

namespace cfta::scenario {

using gtfs::seconds;

struct station {
  std::string name;
  latlon pos;
};

struct run_time_calibration {
  double commercial_speed_mps{15.0};
  seconds min_segment_time{30};
};

// Shipped defaults: metro calibration gives an 18-station Albert-Bordet run of
// 1168 s with 30 s dwells; trams fall back to 5 m/s where no observed segment
// exists.
inline constexpr run_time_calibration metro_calibration{15.0, 30};
inline constexpr run_time_calibration tram_calibration{5.0, 30};
inline constexpr seconds default_dwell = 30;

enum class day_type { all, weekday, saturday, sunday };

struct headway_band {
  day_type days{day_type::all};
  seconds start{0};
  seconds end{0};
  seconds headway{0};
};

struct line_definition {
  std::string route_id;
  std::string short_name;
  std::string long_name;
  int route_type{1};
  std::vector<station> stations;
  seconds dwell{default_dwell};
  std::vector<headway_band> headways;
  run_time_calibration calibration{metro_calibration};
  bool bidirectional{false};
};

struct route_selector {
  enum class field { id, short_name };
  field by{field::short_name};
  std::string value;

  bool matches(gtfs::route const&) const;
  std::string describe() const;
};

enum class run_time_source { observed, derived };

struct station_ref {
  std::string name;
  std::optional<latlon> pos;
};

struct add_line {
  line_definition line;
};

struct remove_line {
  route_selector route;
};

// Keeps, on every trip of the route, the stops between the first occurrences
// of `from_stop` and `to_stop` (matched by stop name). Trips that do not serve
// both are dropped.
struct curtail_line {
  route_selector route;
  std::string from_stop;
  std::string to_stop;
};

// Appends `stations` after trips ending at `anchor` and prepends them in
// reverse before trips starting there.
struct extend_line {
  route_selector route;
  std::string anchor;
  std::vector<station_ref> stations;
  run_time_source source{run_time_source::observed};
  run_time_calibration fallback{tram_calibration};
  seconds dwell{20};
};

struct scale_supply {
  route_selector route;
  double factor{1.0};
};

using edit =
    std::variant<add_line, remove_line, curtail_line, extend_line, scale_supply>;

struct scenario_spec {
  std::string name;
  std::vector<edit> edits;
};

// segment_i = max(min_segment_time, round(haversine / speed)).
std::vector<seconds> derive_run_times(std::span<latlon const> stations,
                                      run_time_calibration);

// Sum of segment run times plus dwells at intermediate stations.
seconds end_to_end_runtime(line_definition const&);

// 0-based departure ranks removed when keeping ceil(factor * n) of n trips.
std::vector<std::size_t> removed_ranks(std::size_t n, double factor);

gtfs::feed apply_scenario(gtfs::feed const& base, scenario_spec const&,
                          std::span<gtfs::date const> dates);

gtfs::feed scale_supply_edit(gtfs::feed, route_selector const&, double factor);

std::vector<station> parse_station_catalog(std::string_view csv);
std::vector<station> const& default_station_catalog();

// baseline, partial, full, in that order.
std::vector<scenario_spec> builtin_scenarios(std::span<station const> catalog);
scenario_spec builtin_scenario(std::string_view name,
                               std::span<station const> catalog);

scenario_spec parse_scenario_spec(std::string_view yaml,
                                  std::string_view source_name = "<spec>");
scenario_spec load_scenario_spec(std::filesystem::path const&);
std::string to_yaml(scenario_spec const&);

}  // namespace cfta::scenario
