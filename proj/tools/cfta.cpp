#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fmt/format.h"

#include "cfta/error.hpp"
#include "cfta/io.hpp"
#include "cfta/monetise.hpp"
#include "cfta/pipeline.hpp"

namespace fs = std::filesystem;
using namespace cfta;

namespace {

std::vector<gtfs::date> parse_dates(std::vector<std::string> const& in) {
  auto out = std::vector<gtfs::date>{};
  if (in.empty()) {
    for (auto const& s : panel::default_slices()) {
      out.push_back(s.date);
    }
  }
  for (auto const& s : in) {
    out.push_back(gtfs::parse_date(s));
  }
  return out;
}

// "name=path"
std::pair<std::string, fs::path> split_feed(std::string const& s) {
  auto const eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
    throw CLI::ValidationError{"--feed", "expected SCENARIO=PATH, got " + s};
  }
  return {s.substr(0, eq), fs::path{s.substr(eq + 1)}};
}

}  // namespace

int main(int argc, char** argv) {
  auto app = CLI::App{"Counterfactual transit accessibility toolkit"};
  app.set_version_flag("--version", std::string{pipeline::tool_version});
  app.require_subcommand(1);

  // ingest
  auto ingest = pipeline::ingest_config{};
  auto ingest_out = fs::path{};
  auto* c_ingest = app.add_subcommand("ingest", "Parse, validate and merge GTFS feeds");
  c_ingest->add_option("--feed", ingest.feeds, "GTFS directory or zip (repeat)")->required();
  c_ingest->add_option("--prefix", ingest.prefixes, "id prefix per feed (repeat)")->required();
  c_ingest->add_option("--out", ingest_out, "output directory")->required();
  c_ingest->add_flag("--zip", ingest.zip, "also write feed.zip");

  // scenario
  auto sc_base = fs::path{};
  auto sc_spec = fs::path{};
  auto sc_builtin = std::string{};
  auto sc_stations = fs::path{};
  auto sc_dates = std::vector<std::string>{};
  auto sc_out = fs::path{};
  auto* c_scenario = app.add_subcommand("scenario", "Build a derived GTFS feed");
  c_scenario->add_option("--base", sc_base, "base GTFS directory or zip")->required();
  auto* o_spec = c_scenario->add_option("--spec", sc_spec, "scenario YAML file");
  auto* o_builtin = c_scenario->add_option("--builtin", sc_builtin, "baseline, partial or full");
  o_spec->excludes(o_builtin);
  c_scenario->add_option("--stations", sc_stations, "station catalogue CSV for builtins");
  c_scenario->add_option("--date", sc_dates,
                         "service date of added lines (repeat; default: slice dates)");
  c_scenario->add_option("--out", sc_out, "output directory")->required();

  // grid
  auto g_boundary = fs::path{};
  auto g_params = grid::grid_params{};
  auto g_offset = std::vector<double>{0.0, 0.0};
  auto g_speed = 1.3;
  auto g_out = fs::path{};
  auto* c_grid = app.add_subcommand("grid", "Write the lattice tiles as GeoJSON");
  c_grid->add_option("--boundary", g_boundary, "boundary GeoJSON")->required();
  c_grid->add_option("--cell", g_params.cell_size, "cell size in metres")
      ->capture_default_str();
  c_grid->add_option("--anchor-offset", g_offset, "anchor offset x y in metres")
      ->expected(2);
  c_grid->add_option("--walk-speed", g_speed, "walk speed in m/s")->capture_default_str();
  c_grid->add_option("--out", g_out, "output GeoJSON")->required();

  // matrix
  auto m = pipeline::matrix_config{};
  auto m_feeds = std::vector<std::string>{};
  auto m_slices = std::vector<std::string>{};
  auto m_offsets = std::vector<int>{-600, 0, 600};
  auto m_offset = std::vector<double>{0.0, 0.0};
  auto m_stop_after = std::optional<std::size_t>{};
  auto m_out = fs::path{};
  auto* c_matrix = app.add_subcommand("matrix", "Compute the OD travel-time panel");
  c_matrix->add_option("--feed", m_feeds, "SCENARIO=GTFS path (repeat)")->required();
  c_matrix->add_option("--boundary", m.boundary, "boundary GeoJSON")->required();
  c_matrix->add_option("--cell", m.grid.cell_size, "cell size in metres")
      ->capture_default_str();
  c_matrix->add_option("--anchor-offset", m_offset, "anchor offset x y in metres")
      ->expected(2);
  c_matrix->add_option("--slice", m_slices,
                       "LABEL=YYYY-MM-DDTHH:MM (repeat; default AM, PM, SAT)");
  c_matrix->add_option("--offsets", m_offsets, "instant offsets in seconds")
      ->delimiter(',')
      ->capture_default_str();
  c_matrix->add_option("--walk-speed", m.network.walk.speed_mps, "m/s")
      ->capture_default_str();
  c_matrix->add_option("--detour", m.network.walk.detour_factor, "walk detour factor")
      ->capture_default_str();
  c_matrix->add_option("--max-access", m.network.walk.max_access_m, "metres")
      ->capture_default_str();
  c_matrix->add_option("--transfer-radius", m.network.transfer_radius_m, "metres")
      ->capture_default_str();
  c_matrix->add_option("--transfer-slack", m.network.transfer_slack, "seconds")
      ->capture_default_str();
  c_matrix->add_option("--max-rounds", m.routing.max_rounds, "vehicle legs")
      ->capture_default_str();
  c_matrix->add_option("--max-walk", m.routing.max_walk_per_leg_m, "metres per walk leg")
      ->capture_default_str();
  c_matrix->add_option("--threads", m.threads, "worker threads (0: all)")
      ->capture_default_str();
  c_matrix->add_option("--stop-after", m_stop_after,
                       "stop after computing this many partitions");
  c_matrix->add_option("--out", m_out, "panel directory")->required();

  // analyze
  auto a = pipeline::analyze_config{};
  auto a_out = fs::path{};
  auto* c_analyze = app.add_subcommand("analyze", "Diagnostics and reliability metrics");
  c_analyze->add_option("--panel", a.panel_dir, "panel directory")->required();
  c_analyze->add_option("--baseline", a.baseline, "baseline scenario")
      ->capture_default_str();
  c_analyze->add_option("--compare", a.compare, "scenario to compare (repeat)");
  c_analyze->add_option("--half-life", a.half_life_s, "CE half-life in seconds")
      ->capture_default_str();
  c_analyze->add_option("--ecdf-step", a.ecdf_step_s, "dECDF grid step in seconds")
      ->capture_default_str();
  c_analyze->add_option("--threads", a.threads, "worker threads (0: all)");
  c_analyze->add_option("--out", a_out, "output directory")->required();

  // monetise
  auto mi = monetise::input{};
  auto mo_sensitivity = false;
  auto mo_out = fs::path{};
  auto* c_mon = app.add_subcommand("monetise", "Annual benefit and breakeven CAPEX");
  auto* o_dt = c_mon->add_option("--mean-dt", mi.mean_dt_s, "mean travel-time change, s");
  auto* o_trips = c_mon->add_option("--trips", mi.trips_per_year, "trips per year");
  auto* o_vot = c_mon->add_option("--vot", mi.vot_eur_per_h, "value of time, EUR/h");
  c_mon->add_option("--rate", mi.rate, "discount rate")->capture_default_str();
  c_mon->add_option("--years", mi.years, "appraisal horizon")->capture_default_str();
  c_mon->add_option("--om", mi.om_eur_per_year, "O&M, EUR/year")->capture_default_str();
  auto* o_app = c_mon->add_flag("--sensitivity", mo_sensitivity,
                                "emit the benefit, CRF and CAPEX sensitivity grids");
  c_mon->add_option("--out", mo_out, "output directory (default: stdout)");
  o_app->excludes(o_dt, o_trips, o_vot);

  try {
    app.parse(argc, argv);
    if (c_scenario->parsed() && sc_spec.empty() && sc_builtin.empty()) {
      throw CLI::RequiredError{"--spec or --builtin"};
    }
    if (c_mon->parsed() && !mo_sensitivity &&
        (o_dt->count() == 0 || o_trips->count() == 0 || o_vot->count() == 0)) {
      throw CLI::RequiredError{"--mean-dt, --trips and --vot"};
    }
  } catch (CLI::ParseError const& e) {
    auto const code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_ingest->parsed()) {
      auto const r = pipeline::run_ingest(ingest, ingest_out);
      fmt::print("merged feed {} ({} warnings)\n", r["merged"]["digest"].get<std::string>(),
                 r["warnings"].size());
    } else if (c_scenario->parsed()) {
      auto cfg = pipeline::scenario_config{};
      cfg.base = sc_base;
      cfg.dates = parse_dates(sc_dates);
      if (!sc_spec.empty()) {
        cfg.spec = scenario::load_scenario_spec(sc_spec);
      } else if (sc_stations.empty()) {
        cfg.spec = scenario::builtin_scenario(sc_builtin, scenario::default_station_catalog());
      } else {
        auto const catalog = scenario::parse_station_catalog(read_file(sc_stations));
        cfg.spec = scenario::builtin_scenario(sc_builtin, catalog);
      }
      auto const r = pipeline::run_scenario(cfg, sc_out);
      fmt::print("scenario {} -> {}\n", cfg.spec.name,
                 r["derived"]["digest"].get<std::string>());
    } else if (c_grid->parsed()) {
      g_params.anchor_offset = {g_offset[0], g_offset[1]};
      auto const meta = pipeline::run_grid(g_boundary, g_params, g_speed, g_out);
      fmt::print("{} centroids\n", meta["centroids"].get<std::size_t>());
    } else if (c_matrix->parsed()) {
      for (auto const& f : m_feeds) {
        m.feeds.push_back(split_feed(f));
      }
      m.grid.anchor_offset = {m_offset[0], m_offset[1]};
      auto offsets = std::vector<gtfs::seconds>(begin(m_offsets), end(m_offsets));
      if (m_slices.empty()) {
        m.slices = panel::default_slices();
        for (auto& s : m.slices) {
          s.offsets = offsets;
        }
      }
      for (auto const& s : m_slices) {
        m.slices.push_back(panel::parse_slice(s, offsets));
      }
      m.stop_after = m_stop_after;
      auto const r = pipeline::run_matrix(m, m_out);
      fmt::print("{} computed, {} reused, {} planned\n", r.computed, r.skipped, r.total);
    } else if (c_analyze->parsed()) {
      auto const r = pipeline::run_analyze(a, a_out);
      fmt::print("{} comparison(s) against {}\n", r["comparisons"].size(), a.baseline);
    } else if (c_mon->parsed()) {
      auto files = std::vector<std::pair<std::string, std::string>>{};
      if (mo_sensitivity) {
        auto const t = monetise::sensitivity_tables();
        files = {{"benefits.csv", monetise::benefits_csv(t)},
                 {"crf.csv", monetise::crf_csv(t)},
                 {"capex.csv", monetise::capex_csv(t)}};
      } else {
        files = {{"monetise.csv", monetise::result_csv(mi, monetise::evaluate(mi))}};
      }
      for (auto const& [name, content] : files) {
        if (mo_out.empty()) {
          std::cout << content;
        } else {
          write_file_atomic(mo_out / name, content);
        }
      }
    }
  } catch (CLI::ParseError const& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 1;
  } catch (error const& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (nlohmann::json::exception const& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (std::exception const& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
