#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cfta/grid.hpp"
#include "cfta/gtfs.hpp"
#include "cfta/panel.hpp"
#include "cfta/router.hpp"
#include "cfta/scenario.hpp"

// File-level steps behind the command-line tool. Every step writes its
// artifacts plus a JSON manifest listing each artifact with its SHA-256.
namespace cfta::pipeline {

inline constexpr std::string_view tool_version = "0.1.0";
inline constexpr std::string_view quantile_rule = "type7";

namespace fs = std::filesystem;

// SHA-256 over the canonical serialisation (sorted table names).
std::string feed_digest(gtfs::feed const&);

// Non-fatal findings: unused stops, routes without trips, trips with fewer
// than two stop times, services never active.
std::vector<std::string> feed_warnings(gtfs::feed const&);

struct ingest_config {
  std::vector<fs::path> feeds;
  std::vector<std::string> prefixes;
  bool zip{false};  // also write feed.zip
};

// Writes out/feed/*.txt, optionally out/feed.zip, and out/report.json.
nlohmann::json run_ingest(ingest_config const&, fs::path const& out);

struct scenario_config {
  fs::path base;
  scenario::scenario_spec spec;
  std::vector<gtfs::date> dates;
};

// Writes out/feed/*.txt, out/scenario.yaml and out/report.json.
nlohmann::json run_scenario(scenario_config const&, fs::path const& out);

// Writes the lattice tiles as GeoJSON with projection and access-overhead
// metadata.
nlohmann::json run_grid(fs::path const& boundary, grid::grid_params const&,
                        double walk_speed, fs::path const& out_geojson);

struct matrix_config {
  std::vector<std::pair<std::string, fs::path>> feeds;  // scenario -> GTFS
  fs::path boundary;
  grid::grid_params grid;
  std::vector<panel::slice_spec> slices;
  router::network_params network;
  panel::routing_params routing;
  int threads{0};
  // Stop after this many newly computed partitions (simulates an interrupted
  // run).
  std::optional<std::size_t> stop_after;
};

struct matrix_outcome {
  std::size_t computed{0};
  std::size_t skipped{0};
  std::size_t total{0};
};

// One CSV per (scenario, slice, instant) plus manifest.json, rewritten after
// every partition. An existing manifest with the same configuration digest
// lets the run resume: partitions whose files still match their recorded
// digest are skipped.
matrix_outcome run_matrix(matrix_config const&, fs::path const& out);

grid::lattice lattice_from_manifest(nlohmann::json const& manifest);

struct analyze_config {
  fs::path panel_dir;
  std::string baseline{"baseline"};
  std::vector<std::string> compare;  // empty: every other scenario
  double half_life_s{1200.0};
  double ecdf_step_s{60.0};
  int threads{0};
};

// Delta summaries and percentiles, shift and dECDF curves, per-origin GeoJSON,
// directionality and the reliability deltas, plus params.json and
// manifest.json.
nlohmann::json run_analyze(analyze_config const&, fs::path const& out);

}  // namespace cfta::pipeline
