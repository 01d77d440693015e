#include "cfta/pipeline.hpp"

#include <map>
#include <set>

#include "fmt/format.h"

#include "cfta/diagnostics.hpp"
#include "cfta/error.hpp"
#include "cfta/io.hpp"
#include "cfta/reliability.hpp"
#include "cfta/zip.hpp"

namespace cfta::pipeline {

using json = nlohmann::json;

namespace {

std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) {
      c = '_';
    }
  }
  return s;
}

json counts(gtfs::feed const& f) {
  auto services = std::set<std::string>{};
  for (auto const& [id, _] : f.calendars) {
    services.insert(id);
  }
  for (auto const& [id, _] : f.calendar_dates) {
    services.insert(id);
  }
  return {{"agencies", f.agencies.size()},    {"stops", f.stops.size()},
          {"routes", f.routes.size()},        {"trips", f.trips.size()},
          {"stop_times", f.stop_time_count()}, {"services", services.size()},
          {"frequencies", f.frequencies.size()}};
}

// Writes `content` and records it in `artifacts`.
void emit(fs::path const& out, std::string const& name, std::string_view content,
          json& artifacts) {
  write_file_atomic(out / name, content);
  artifacts.push_back({{"file", name}, {"sha256", sha256_hex(content)}});
}

json write_feed_dir(gtfs::feed const& f, fs::path const& out, bool const zip) {
  auto artifacts = json::array();
  auto const tables = gtfs::serialize_feed(f);
  if (fs::exists(out / "feed")) {
    fs::remove_all(out / "feed");
  }
  for (auto const& [name, content] : tables) {
    emit(out, "feed/" + name, content, artifacts);
  }
  if (zip) {
    write_zip(out / "feed.zip", tables);
    artifacts.push_back({{"file", "feed.zip"}, {"sha256", sha256_file(out / "feed.zip")}});
  }
  return artifacts;
}

}  // namespace

std::string feed_digest(gtfs::feed const& f) {
  auto all = std::string{};
  for (auto const& [name, content] : gtfs::serialize_feed(f)) {
    all += fmt::format("{}\n{}\n", name, content.size());
    all += content;
  }
  return sha256_hex(all);
}

std::vector<std::string> feed_warnings(gtfs::feed const& f) {
  auto out = std::vector<std::string>{};
  auto used_stops = std::set<std::string>{};
  auto used_routes = std::set<std::string>{};
  auto used_services = std::set<std::string>{};
  for (auto const& [id, t] : f.trips) {
    used_routes.insert(t.route_id);
    used_services.insert(t.service_id);
    for (auto const& st : t.stop_times) {
      used_stops.insert(st.stop_id);
    }
    if (t.stop_times.size() < 2) {
      out.push_back(fmt::format("trip {} has {} stop time(s)", id, t.stop_times.size()));
    }
  }
  for (auto const& [id, _] : f.stops) {
    if (!used_stops.contains(id)) {
      out.push_back(fmt::format("stop {} is not served", id));
    }
  }
  for (auto const& [id, _] : f.routes) {
    if (!used_routes.contains(id)) {
      out.push_back(fmt::format("route {} has no trips", id));
    }
  }
  auto services = std::set<std::string>{};
  for (auto const& [id, _] : f.calendars) {
    services.insert(id);
  }
  for (auto const& [id, _] : f.calendar_dates) {
    services.insert(id);
  }
  for (auto const& id : services) {
    auto active = false;
    if (auto const it = f.calendars.find(id); it != end(f.calendars)) {
      for (auto const w : it->second.weekdays) {
        active = active || w;
      }
    }
    if (auto const it = f.calendar_dates.find(id); it != end(f.calendar_dates)) {
      for (auto const& cd : it->second) {
        active = active || cd.type == gtfs::exception_type::added;
      }
    }
    if (!active) {
      out.push_back(fmt::format("service {} is never active", id));
    }
  }
  return out;
}

json run_ingest(ingest_config const& cfg, fs::path const& out) {
  if (cfg.feeds.empty() || cfg.feeds.size() != cfg.prefixes.size()) {
    throw error{errc::invalid_argument, "need one prefix per feed"};
  }
  auto feeds = std::vector<gtfs::feed>{};
  auto inputs = json::array();
  for (auto i = std::size_t{0}; i != cfg.feeds.size(); ++i) {
    feeds.push_back(gtfs::parse_feed(cfg.feeds[i]));
    inputs.push_back({{"path", cfg.feeds[i].generic_string()},
                      {"prefix", cfg.prefixes[i]},
                      {"digest", feed_digest(feeds.back())},
                      {"counts", counts(feeds.back())}});
  }
  auto const merged = gtfs::merge_feeds(feeds, cfg.prefixes);
  gtfs::validate(merged);

  auto report = json{{"tool", "cfta"},
                     {"version", tool_version},
                     {"inputs", inputs},
                     {"merged", {{"digest", feed_digest(merged)}, {"counts", counts(merged)}}},
                     {"warnings", feed_warnings(merged)},
                     {"artifacts", write_feed_dir(merged, out, cfg.zip)}};
  write_file_atomic(out / "report.json", report.dump(2) + "\n");
  return report;
}

json run_scenario(scenario_config const& cfg, fs::path const& out) {
  auto const base = gtfs::parse_feed(cfg.base);
  auto const derived = scenario::apply_scenario(base, cfg.spec, cfg.dates);
  gtfs::validate(derived);

  auto artifacts = write_feed_dir(derived, out, false);
  auto const yaml = scenario::to_yaml(cfg.spec);
  emit(out, "scenario.yaml", yaml, artifacts);

  auto dates = json::array();
  for (auto const d : cfg.dates) {
    dates.push_back(gtfs::format_iso_date(d));
  }
  auto added = json::array();
  auto removed = json::array();
  for (auto const& [id, _] : derived.routes) {
    if (!base.routes.contains(id)) {
      added.push_back(id);
    }
  }
  for (auto const& [id, _] : base.routes) {
    if (!derived.routes.contains(id)) {
      removed.push_back(id);
    }
  }
  auto report = json{{"tool", "cfta"},
                     {"version", tool_version},
                     {"scenario", cfg.spec.name},
                     {"spec_sha256", sha256_hex(yaml)},
                     {"dates", dates},
                     {"base", {{"digest", feed_digest(base)}, {"counts", counts(base)}}},
                     {"derived", {{"digest", feed_digest(derived)}, {"counts", counts(derived)}}},
                     {"routes_added", added},
                     {"routes_removed", removed},
                     {"warnings", feed_warnings(derived)},
                     {"artifacts", artifacts}};
  write_file_atomic(out / "report.json", report.dump(2) + "\n");
  return report;
}

json run_grid(fs::path const& boundary, grid::grid_params const& params,
              double const walk_speed, fs::path const& out_geojson) {
  auto const l = grid::generate_grid(grid::load_boundary(boundary), params);
  auto const overhead = grid::expected_access_overhead(params.cell_size, walk_speed);
  auto j = json::parse(grid::tiles_geojson(l, {}));
  j["metadata"]["centroids"] = l.centroids.size();
  j["metadata"]["boundary_sha256"] = sha256_file(boundary);
  j["metadata"]["expected_access_distance_m"] = overhead.distance_m;
  j["metadata"]["expected_access_time_s"] = overhead.time_s;
  j["metadata"]["walk_speed_mps"] = walk_speed;
  write_file_atomic(out_geojson, j.dump(1) + "\n");
  return j["metadata"];
}

namespace {

json lattice_json(grid::lattice const& l) {
  auto cs = json::array();
  for (auto const& c : l.centroids) {
    cs.push_back({c.id, c.pos.lon, c.pos.lat});
  }
  return {{"cell_size_m", l.cell_size},
          {"projection", "azimuthal_equidistant"},
          {"projection_center", {l.projection_center.lon, l.projection_center.lat}},
          {"anchor_xy_m", {l.anchor.x, l.anchor.y}},
          {"centroids", cs}};
}

json parameters_json(matrix_config const& cfg) {
  return {{"walk_speed_mps", cfg.network.walk.speed_mps},
          {"detour_factor", cfg.network.walk.detour_factor},
          {"max_access_m", cfg.network.walk.max_access_m},
          {"transfer_radius_m", cfg.network.transfer_radius_m},
          {"transfer_slack_s", cfg.network.transfer_slack},
          {"max_rounds", cfg.routing.max_rounds},
          {"max_walk_per_leg_m", cfg.routing.max_walk_per_leg_m},
          {"cell_size_m", cfg.grid.cell_size},
          {"anchor_offset_m", {cfg.grid.anchor_offset.x, cfg.grid.anchor_offset.y}},
          {"quantile_rule", quantile_rule}};
}

struct planned {
  std::size_t scenario;
  std::size_t slice;
  gtfs::seconds offset;
  panel::partition meta;  // without times
};

}  // namespace

grid::lattice lattice_from_manifest(json const& manifest) {
  auto const& j = manifest.at("lattice");
  auto l = grid::lattice{};
  l.cell_size = j.at("cell_size_m").get<double>();
  l.projection_center = {j.at("projection_center")[1].get<double>(),
                         j.at("projection_center")[0].get<double>()};
  l.anchor = {j.at("anchor_xy_m")[0].get<double>(), j.at("anchor_xy_m")[1].get<double>()};
  auto const proj = azimuthal_equidistant{l.projection_center};
  for (auto const& c : j.at("centroids")) {
    auto const pos = latlon{c[2].get<double>(), c[1].get<double>()};
    l.centroids.push_back(grid::centroid{c[0].get<std::uint32_t>(), pos, proj.forward(pos)});
  }
  return l;
}

matrix_outcome run_matrix(matrix_config const& cfg, fs::path const& out) {
  if (cfg.feeds.empty() || cfg.slices.empty()) {
    throw error{errc::invalid_argument, "need at least one feed and one slice"};
  }
  auto const l = grid::generate_grid(grid::load_boundary(cfg.boundary), cfg.grid);
  auto const nodes = panel::nodes_from_positions(l.positions());

  auto feeds = std::vector<gtfs::feed>{};
  auto inputs = json::array();
  auto names = std::set<std::string>{};
  for (auto const& [name, path] : cfg.feeds) {
    if (!names.insert(name).second) {
      throw error{errc::invalid_argument, "duplicate scenario name " + name};
    }
    feeds.push_back(gtfs::parse_feed(path));
    inputs.push_back({{"scenario", name}, {"digest", feed_digest(feeds.back())}});
  }

  auto slices = json::array();
  for (auto const& s : cfg.slices) {
    slices.push_back({{"band", s.band},
                      {"date", gtfs::format_iso_date(s.date)},
                      {"day", s.day_code()},
                      {"centre", gtfs::format_time(s.centre)},
                      {"offsets_s", s.offsets}});
  }

  auto config = json{{"parameters", parameters_json(cfg)},
                     {"inputs", {{"feeds", inputs},
                                 {"boundary_sha256", sha256_file(cfg.boundary)}}},
                     {"slices", slices},
                     {"lattice", lattice_json(l)}};
  auto const config_digest = sha256_hex(config.dump());

  // plan
  auto plan = std::vector<planned>{};
  auto files = std::set<std::string>{};
  for (auto si = std::size_t{0}; si != cfg.feeds.size(); ++si) {
    for (auto k = std::size_t{0}; k != cfg.slices.size(); ++k) {
      auto const& s = cfg.slices[k];
      auto offsets = s.offsets;
      std::sort(begin(offsets), end(offsets));
      for (auto const o : offsets) {
        auto p = panel::partition{};
        p.scenario = cfg.feeds[si].first;
        p.band = s.band;
        p.day = s.day_code();
        p.instant = s.centre + o;
        p.snapshot = panel::snapshot_label(o);
        if (!files.insert(panel::partition_file_name(p)).second) {
          throw error{errc::invalid_argument,
                      "two partitions map to " + panel::partition_file_name(p)};
        }
        plan.push_back({si, k, o, std::move(p)});
      }
    }
  }

  // resume state
  auto done = std::map<std::string, json>{};
  auto const manifest_path = out / "manifest.json";
  if (fs::exists(manifest_path)) {
    auto const old = json::parse(read_file(manifest_path), nullptr, false);
    if (!old.is_discarded() && old.value("config_sha256", std::string{}) == config_digest) {
      for (auto const& e : old.at("partitions")) {
        auto const file = e.at("file").get<std::string>();
        if (fs::exists(out / file) &&
            sha256_file(out / file) == e.at("sha256").get<std::string>()) {
          done[file] = e;
        }
      }
    }
  }

  auto manifest = json{{"tool", "cfta"},
                       {"version", tool_version},
                       {"config_sha256", config_digest},
                       {"complete", false}};
  manifest.update(config);
  manifest["partitions"] = json::array();
  auto const save = [&] { write_file_atomic(manifest_path, manifest.dump(1) + "\n"); };

  auto outcome = matrix_outcome{};
  outcome.total = plan.size();
  auto networks = std::map<std::pair<std::size_t, gtfs::date>, router::timetable_network>{};
  auto stopped = false;
  for (auto const& step : plan) {
    auto const file = panel::partition_file_name(step.meta);
    if (auto const it = done.find(file); it != end(done)) {
      manifest["partitions"].push_back(it->second);
      ++outcome.skipped;
      continue;
    }
    if (cfg.stop_after && outcome.computed == *cfg.stop_after) {
      stopped = true;
      break;
    }
    auto const key = std::pair{step.scenario, cfg.slices[step.slice].date};
    auto it = networks.find(key);
    if (it == end(networks)) {
      std::erase_if(networks, [&](auto const& kv) { return kv.first.first != step.scenario; });
      it = networks
               .emplace(key, router::build_network(feeds[step.scenario], key.second,
                                                   cfg.network))
               .first;
    }
    auto part = step.meta;
    part.times = panel::compute_partition_omp(it->second, nodes, part.instant, cfg.routing,
                                              cfg.threads, &part.origins_out_of_range);
    auto const csv = panel::partition_csv(nodes, part);
    write_file_atomic(out / file, csv);
    manifest["partitions"].push_back({{"file", file},
                                      {"scenario", part.scenario},
                                      {"band", part.band},
                                      {"day", part.day},
                                      {"instant_s", part.instant},
                                      {"start_time", panel::hhmm(part.instant)},
                                      {"snapshot_time", part.snapshot},
                                      {"rows", nodes.size() * (nodes.size() - 1)},
                                      {"origins_out_of_range", part.origins_out_of_range},
                                      {"sha256", sha256_hex(csv)}});
    ++outcome.computed;
    save();
  }
  manifest["complete"] = !stopped;
  save();
  return outcome;
}

json run_analyze(analyze_config const& cfg, fs::path const& out) {
  auto const manifest_text = read_file(cfg.panel_dir / "manifest.json");
  auto const manifest = json::parse(manifest_text);
  auto const l = lattice_from_manifest(manifest);
  auto p = panel::load_panel(cfg.panel_dir);

  auto const present = panel::scenarios(p);
  auto const has = [&](std::string const& s) {
    return std::find(begin(present), end(present), s) != end(present);
  };
  if (!has(cfg.baseline)) {
    throw error{errc::empty_support,
                fmt::format("baseline scenario '{}' is not in the panel", cfg.baseline)};
  }
  auto compare = cfg.compare;
  if (compare.empty()) {
    for (auto const& s : present) {
      if (s != cfg.baseline) {
        compare.push_back(s);
      }
    }
  }
  for (auto const& s : compare) {
    if (!has(s)) {
      throw error{errc::empty_support, fmt::format("scenario '{}' is not in the panel", s)};
    }
  }

  auto const nodes_before = p.size();
  auto const dropped = panel::drop_unreachable(p);
  auto observed = std::vector<latlon>{};
  for (auto const& nd : p.nodes) {
    observed.push_back(nd.pos);
  }
  auto const expected = l.positions();
  auto const holes = grid::detect_holes(expected, observed);
  auto const rho = reliability::rho_from_halflife(cfg.half_life_s);

  auto artifacts = json::array();
  auto summary = diagnostics::summary_csv_header();
  auto percentiles = diagnostics::percentile_csv_header();
  auto reliability_table = reliability::reliability_csv_header();
  auto support = json::object();
  auto const base_mean = panel::aggregate_over_instants(p, cfg.baseline);
  auto const days = panel::days(p);

  auto const with_meta = [&](std::string const& geojson, std::string const& scenario,
                             std::string const& day) {
    auto j = json::parse(geojson);
    j["metadata"] = {{"scenario", scenario},
                     {"baseline", cfg.baseline},
                     {"day", day},
                     {"rho_per_s", rho},
                     {"cell_size_m", l.cell_size},
                     {"projection", "azimuthal_equidistant"},
                     {"projection_center", {l.projection_center.lon, l.projection_center.lat}}};
    return j.dump(1) + "\n";
  };

  for (auto const& s : compare) {
    auto const name = sanitize(s);
    auto const scen_mean = panel::aggregate_over_instants(p, s);
    auto const pv = diagnostics::common_support(base_mean, scen_mean);
    auto const ds = diagnostics::summarize_delta(pv);
    summary += diagnostics::summary_csv_row(s, ds);
    percentiles += diagnostics::percentile_csv_row(s, ds);

    auto const shift = diagnostics::shift_function(pv.base, pv.scen);
    emit(out, fmt::format("shift_{}.csv", name), diagnostics::curve_csv("p", "delta_q_s", shift),
         artifacts);
    auto const grid_t = diagnostics::default_t_grid(pv.base, pv.scen, cfg.ecdf_step_s);
    auto const decdf = diagnostics::delta_ecdf(pv.base, pv.scen, grid_t);
    emit(out, fmt::format("decdf_{}.csv", name),
         diagnostics::curve_csv("t_s", "delta_f_pp", decdf), artifacts);

    auto const od = diagnostics::per_origin_deltas(base_mean, scen_mean);
    auto const sd = diagnostics::per_origin_sd_delta(p, s, cfg.baseline);
    emit(out, fmt::format("origins_{}.geojson", name),
         with_meta(diagnostics::origin_geojson(l, holes, od, sd), s, "all"), artifacts);
    for (auto const& d : days) {
      auto const od_d = diagnostics::per_origin_deltas(p, s, cfg.baseline, d);
      emit(out, fmt::format("origins_{}_{}.geojson", name, d),
           with_meta(diagnostics::origin_geojson(l, holes, od_d, {}), s, d), artifacts);
    }

    reliability_table += reliability::reliability_csv_row(
        reliability::delta_report(p, s, cfg.baseline, rho, cfg.threads));

    support[s] = {{"pairs", ds.pairs},
                  {"excluded_pairs", ds.excluded_pairs},
                  {"origins", od.origins.size()},
                  {"origins_omitted", od.omitted},
                  {"sd_origins_omitted", sd.omitted}};
  }

  auto direction = diagnostics::directionality_csv_header();
  auto all = std::vector<std::string>{cfg.baseline};
  all.insert(end(all), begin(compare), end(compare));
  for (auto const& s : all) {
    direction += diagnostics::directionality_csv_row(
        s, diagnostics::directionality(panel::aggregate_over_instants(p, s)));
  }

  emit(out, "summary.csv", summary, artifacts);
  emit(out, "percentiles.csv", percentiles, artifacts);
  emit(out, "reliability.csv", reliability_table, artifacts);
  emit(out, "directionality.csv", direction, artifacts);

  auto hole_ids = json::array();
  for (auto const h : holes) {
    hole_ids.push_back(l.centroids[h].id);
  }
  auto const params =
      json{{"tool", "cfta"},
           {"version", tool_version},
           {"baseline", cfg.baseline},
           {"comparisons", compare},
           {"half_life_s", cfg.half_life_s},
           {"rho_per_s", rho},
           {"quantile_rule", quantile_rule},
           {"shift_grid", "0.01:0.01:0.99"},
           {"ecdf_step_s", cfg.ecdf_step_s},
           {"share_bands", {{"improved", "dT < 0"},
                            {"improved_beyond_1s", "dT < -1"},
                            {"equal_1s", "|dT| <= 1"},
                            {"worsened_beyond_1s", "dT > 1"}}},
           {"aggregation", "strict: any NA instant makes the pair NA"},
           {"panel_manifest_sha256", sha256_hex(manifest_text)},
           {"panel_parameters", manifest.at("parameters")},
           {"nodes_total", nodes_before},
           {"nodes_dropped", dropped},
           {"holes", hole_ids},
           {"support", support}};
  emit(out, "params.json", params.dump(2) + "\n", artifacts);

  auto const report = json{{"tool", "cfta"}, {"version", tool_version}, {"artifacts", artifacts}};
  write_file_atomic(out / "manifest.json", report.dump(2) + "\n");
  return params;
}

}  // namespace cfta::pipeline
