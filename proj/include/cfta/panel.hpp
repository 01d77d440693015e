#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfta/geo.hpp"
#include "cfta/gtfs.hpp"
#include "cfta/router.hpp"

namespace cfta::panel {

using gtfs::seconds;

// One service day with its departure instants, e.g. AM on 2025-06-10 at
// 08:00 with offsets -600, 0, +600.
struct slice_spec {
  std::string band;
  gtfs::date date;
  seconds centre{0};
  std::vector<seconds> offsets{-600, 0, 600};

  std::string day_code() const;  // MMDD
  std::vector<seconds> instants() const;
};

// "t", "t-10", "t+10" (minutes).
std::string snapshot_label(seconds offset);
std::string hhmm(seconds);

// LABEL=YYYY-MM-DDTHH:MM
slice_spec parse_slice(std::string_view, std::vector<seconds> offsets = {-600, 0, 600});
std::vector<slice_spec> default_slices();

struct node {
  std::string id;
  latlon pos;
};

// Travel times for one (scenario, day, instant), dense N x N, row = origin.
// `router::unreachable` encodes NA; the diagonal is 0.
struct partition {
  std::string scenario;
  std::string band;
  std::string day;         // MMDD
  seconds instant{0};
  std::string snapshot;    // t-10 / t / t+10
  std::vector<seconds> times;
  std::size_t origins_out_of_range{0};
};

struct od_panel {
  std::vector<node> nodes;
  std::vector<partition> partitions;
  std::vector<std::string> dropped;

  std::size_t size() const { return nodes.size(); }
  std::size_t row_count() const;  // N (N - 1) per partition
};

inline constexpr double na = std::numeric_limits<double>::quiet_NaN();

// Dense N x N matrix of seconds; NaN encodes NA.
struct od_matrix {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::string provenance;

  std::size_t size() const { return ids.size(); }
  double operator()(std::size_t i, std::size_t j) const {
    return values[i * ids.size() + j];
  }
  double& operator()(std::size_t i, std::size_t j) { return values[i * ids.size() + j]; }
};

struct routing_params {
  int max_rounds{5};
  double max_walk_per_leg_m{1500.0};
};

// Reference kernel: one origin after another.
std::vector<seconds> compute_partition_serial(router::timetable_network const&,
                                              std::span<node const>, seconds instant,
                                              routing_params const&,
                                              std::size_t* out_of_range = nullptr);

// Origin-parallel kernel (OpenMP). Each origin owns its output row, so the
// result does not depend on the thread count or schedule. threads <= 0 uses
// the OpenMP default.
std::vector<seconds> compute_partition_omp(router::timetable_network const&,
                                           std::span<node const>, seconds instant,
                                           routing_params const&, int threads,
                                           std::size_t* out_of_range = nullptr);

// scenario -> date -> network
using network_map =
    std::map<std::string, std::map<gtfs::date, router::timetable_network const*>>;

od_panel compute_panel(network_map const&, std::span<node const>,
                       std::span<slice_spec const>, routing_params const& = {},
                       int threads = 0);

std::vector<node> nodes_from_positions(std::span<latlon const>);

// Drops every node whose rows as origin and as destination are NA in every
// partition. Returns the dropped ids (also appended to panel.dropped).
std::vector<std::string> drop_unreachable(od_panel&);

// Mean over the instants of `scenario` (restricted to `day` when given);
// NA when any selected instant is NA.
od_matrix aggregate_over_instants(od_panel const&, std::string_view scenario,
                                  std::optional<std::string_view> day = std::nullopt);

std::vector<std::string> scenarios(od_panel const&);
std::vector<std::string> days(od_panel const&);  // sorted MMDD codes

// ---- persistence: one CSV per partition plus manifest.json ----

inline constexpr std::string_view csv_header =
    "origin_id,destination_id,origin_lon,origin_lat,destination_lon,destination_lat,"
    "scenario,snapshot_time,time_s,day,start_time";

std::string partition_file_name(partition const&);
std::string partition_csv(std::span<node const>, partition const&);

// Parses one partition; node order is taken from the first appearance of
// origin ids.
struct parsed_partition {
  std::vector<node> nodes;
  partition part;
};
parsed_partition parse_partition_csv(std::string_view content, std::string_view name);

od_panel load_panel(std::filesystem::path const& dir);

}  // namespace cfta::panel
