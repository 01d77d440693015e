#include "cfta/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "fmt/format.h"

#include "cfta/csv.hpp"
#include "cfta/error.hpp"
#include "station_catalog_data.hpp"

namespace cfta::scenario {

using namespace std::chrono;

bool route_selector::matches(gtfs::route const& r) const {
  return by == field::id ? r.id == value : r.short_name == value;
}

std::string route_selector::describe() const {
  return fmt::format("{}={}", by == field::id ? "id" : "short_name", value);
}

std::vector<seconds> derive_run_times(std::span<latlon const> stations,
                                      run_time_calibration const cal) {
  if (stations.size() < 2) {
    throw error{errc::invalid_argument, "a line needs at least 2 stations"};
  }
  if (!(cal.commercial_speed_mps > 0.0)) {
    throw error{errc::invalid_argument, "commercial speed must be positive"};
  }
  auto times = std::vector<seconds>{};
  times.reserve(stations.size() - 1);
  for (auto i = std::size_t{0}; i + 1 < stations.size(); ++i) {
    if (stations[i] == stations[i + 1] && cal.min_segment_time == 0) {
      throw error{errc::degenerate_segment,
                  fmt::format("stations {} and {} coincide", i, i + 1)};
    }
    auto const d = haversine_m(stations[i], stations[i + 1]);
    auto const t =
        static_cast<seconds>(std::lround(d / cal.commercial_speed_mps));
    times.push_back(std::max(cal.min_segment_time, t));
  }
  return times;
}

seconds end_to_end_runtime(line_definition const& line) {
  auto pos = std::vector<latlon>{};
  for (auto const& s : line.stations) {
    pos.push_back(s.pos);
  }
  auto const segs = derive_run_times(pos, line.calibration);
  auto total = static_cast<seconds>(line.stations.size() - 2) * line.dwell;
  for (auto const s : segs) {
    total += s;
  }
  return total;
}

std::vector<std::size_t> removed_ranks(std::size_t const n,
                                       double const factor) {
  if (!(factor > 0.0 && factor <= 1.0)) {
    throw error{errc::invalid_argument,
                fmt::format("supply factor {} outside (0, 1]", factor)};
  }
  // epsilon guards products like 0.8 * 10 = 8.000000000000002
  auto const kept = static_cast<std::size_t>(
      std::ceil(factor * static_cast<double>(n) - 1e-9));
  auto const m = n - std::min(n, kept);
  auto ranks = std::vector<std::size_t>{};
  for (auto i = std::size_t{0}; i < m; ++i) {
    ranks.push_back(static_cast<std::size_t>(
        std::floor((static_cast<double>(i) + 0.5) * static_cast<double>(n) /
                   static_cast<double>(m))));
  }
  return ranks;
}

namespace {

bool day_matches(day_type const t, gtfs::date const d) {
  auto const wd = weekday{sys_days{d}}.iso_encoding();
  switch (t) {
    case day_type::all: return true;
    case day_type::weekday: return wd <= 5;
    case day_type::saturday: return wd == 6;
    case day_type::sunday: return wd == 7;
  }
  return false;
}

std::string_view to_string(day_type const t) {
  switch (t) {
    case day_type::all: return "all";
    case day_type::weekday: return "weekday";
    case day_type::saturday: return "saturday";
    case day_type::sunday: return "sunday";
  }
  return "all";
}

// Applies edits in order while remembering routes removed so far, so that a
// later edit naming them is reported as a conflict rather than a typo.
class editor {
public:
  editor(gtfs::feed const& base, std::span<gtfs::date const> dates)
      : base_{base}, feed_{base}, dates_{dates.begin(), dates.end()} {}

  gtfs::feed take() && { return std::move(feed_); }

  void operator()(add_line const& e) {
    auto const& line = e.line;
    if (line.stations.size() < 2) {
      throw error{errc::invalid_argument, "AddLine needs at least 2 stations"};
    }
    if (line.dwell < 0) {
      throw error{errc::invalid_argument, "dwell must be >= 0"};
    }
    if (feed_.routes.contains(line.route_id) ||
        removed_.contains(line.route_id)) {
      throw error{errc::edit_conflict,
                  fmt::format("route '{}' already exists", line.route_id)};
    }
    for (auto const& h : line.headways) {
      if (h.headway <= 0) {
        throw error{errc::invalid_argument, "headway must be > 0"};
      }
    }

    auto pos = std::vector<latlon>{};
    auto stop_ids = std::vector<std::string>{};
    for (auto i = std::size_t{0}; i < line.stations.size(); ++i) {
      auto const& st = line.stations[i];
      auto id = fmt::format("{}:{}", line.route_id, i);
      feed_.stops[id] = gtfs::stop{id, st.name, st.pos.lat, st.pos.lon};
      stop_ids.push_back(std::move(id));
      pos.push_back(st.pos);
    }
    auto const runs = derive_run_times(pos, line.calibration);

    feed_.routes[line.route_id] =
        gtfs::route{line.route_id, "", line.short_name, line.long_name,
                    line.route_type};

    auto const make_stop_times = [&](bool const reverse) {
      auto st = std::vector<gtfs::stop_time>{};
      auto t = seconds{0};
      auto const n = stop_ids.size();
      for (auto k = std::size_t{0}; k < n; ++k) {
        auto const idx = reverse ? n - 1 - k : k;
        if (k > 0) {
          t += runs[reverse ? idx : idx - 1];
        }
        auto const dwell = (k == 0 || k + 1 == n) ? 0 : line.dwell;
        st.push_back(gtfs::stop_time{stop_ids[idx], t, t + dwell});
        t += dwell;
      }
      return st;
    };

    auto mini = gtfs::feed{};
    auto day_types = std::set<day_type>{};
    for (auto const& h : line.headways) {
      day_types.insert(h.days);
    }
    for (auto const dt : day_types) {
      auto dates = std::vector<gtfs::calendar_date>{};
      for (auto const d : dates_) {
        if (day_matches(dt, d)) {
          dates.push_back({d, gtfs::exception_type::added});
        }
      }
      if (dates.empty()) {
        continue;
      }
      auto const service = fmt::format("{}:{}", line.route_id, to_string(dt));
      feed_.calendar_dates[service] = std::move(dates);

      for (auto const dir : {0, 1}) {
        if (dir == 1 && !line.bidirectional) {
          continue;
        }
        auto tmpl = gtfs::trip{};
        tmpl.id = fmt::format("{}:{}", service, dir);
        tmpl.route_id = line.route_id;
        tmpl.service_id = service;
        tmpl.headsign = dir == 0 ? line.stations.back().name
                                 : line.stations.front().name;
        tmpl.direction_id = dir;
        tmpl.stop_times = make_stop_times(dir == 1);
        for (auto const& h : line.headways) {
          if (h.days == dt) {
            mini.frequencies.push_back(
                gtfs::frequency{tmpl.id, h.start, h.end, h.headway});
          }
        }
        mini.trips[tmpl.id] = std::move(tmpl);
      }
    }
    for (auto& [id, t] : gtfs::expand_frequencies(std::move(mini)).trips) {
      feed_.trips[id] = std::move(t);
    }
  }

  void operator()(remove_line const& e) {
    for (auto const& id : resolve(e.route)) {
      removed_[id] = feed_.routes.at(id);
      feed_.routes.erase(id);
      std::erase_if(feed_.trips,
                    [&](auto const& kv) { return kv.second.route_id == id; });
    }
    std::erase_if(feed_.frequencies, [&](gtfs::frequency const& f) {
      return !feed_.trips.contains(f.trip_id);
    });
  }

  void operator()(curtail_line const& e) {
    auto const routes = resolve(e.route);
    auto any = false;
    for (auto it = begin(feed_.trips); it != end(feed_.trips);) {
      auto& t = it->second;
      if (!routes.contains(t.route_id)) {
        ++it;
        continue;
      }
      auto const a = find_stop(t, e.from_stop);
      auto const b = find_stop(t, e.to_stop);
      if (!a || !b) {
        it = feed_.trips.erase(it);
        continue;
      }
      any = true;
      auto const lo = std::min(*a, *b);
      auto const hi = std::max(*a, *b);
      t.stop_times = std::vector<gtfs::stop_time>(
          begin(t.stop_times) + static_cast<std::ptrdiff_t>(lo),
          begin(t.stop_times) + static_cast<std::ptrdiff_t>(hi) + 1);
      ++it;
    }
    if (!any) {
      throw error{errc::edit_conflict,
                  fmt::format("no trip of {} serves the span {} - {}",
                              e.route.describe(), e.from_stop, e.to_stop)};
    }
    std::erase_if(feed_.frequencies, [&](gtfs::frequency const& f) {
      return !feed_.trips.contains(f.trip_id);
    });
  }

  void operator()(extend_line const& e) {
    auto const routes = resolve(e.route);
    auto any = false;
    for (auto& [id, t] : feed_.trips) {
      if (!routes.contains(t.route_id) || t.stop_times.empty()) {
        continue;
      }
      auto const& first = feed_.stops.at(t.stop_times.front().stop_id);
      auto const& last = feed_.stops.at(t.stop_times.back().stop_id);
      if (last.name == e.anchor) {
        append(t, e, false);
        any = true;
      } else if (first.name == e.anchor) {
        append(t, e, true);
        any = true;
      }
    }
    if (!any) {
      throw error{errc::edit_conflict,
                  fmt::format("no trip of {} terminates at '{}'",
                              e.route.describe(), e.anchor)};
    }
  }

  void operator()(scale_supply const& e) {
    resolve(e.route);  // reports routes removed by an earlier edit
    feed_ = scale_supply_edit(std::move(feed_), e.route, e.factor);
  }

  std::set<std::string> resolve(route_selector const& sel) const {
    auto ids = std::set<std::string>{};
    for (auto const& [id, r] : feed_.routes) {
      if (sel.matches(r)) {
        ids.insert(id);
      }
    }
    if (ids.empty()) {
      for (auto const& [id, r] : removed_) {
        if (sel.matches(r)) {
          throw error{errc::edit_conflict,
                      fmt::format("route {} was removed by an earlier edit",
                                  sel.describe())};
        }
      }
      throw error{errc::unresolved_selector, sel.describe()};
    }
    return ids;
  }

private:
  std::optional<std::size_t> find_stop(gtfs::trip const& t,
                                       std::string const& name) const {
    for (auto i = std::size_t{0}; i < t.stop_times.size(); ++i) {
      if (feed_.stops.at(t.stop_times[i].stop_id).name == name) {
        return i;
      }
    }
    return std::nullopt;
  }

  // Median observed run time between consecutive stops named a -> b in the
  // base feed (either direction), if any trip serves that pair.
  std::optional<seconds> observed_run_time(std::string const& a,
                                           std::string const& b) const {
    auto samples = std::vector<seconds>{};
    for (auto const& [_, t] : base_.trips) {
      for (auto i = std::size_t{0}; i + 1 < t.stop_times.size(); ++i) {
        auto const& x = base_.stops.at(t.stop_times[i].stop_id).name;
        auto const& y = base_.stops.at(t.stop_times[i + 1].stop_id).name;
        if ((x == a && y == b) || (x == b && y == a)) {
          samples.push_back(t.stop_times[i + 1].arrival -
                            t.stop_times[i].departure);
        }
      }
    }
    if (samples.empty()) {
      return std::nullopt;
    }
    std::sort(begin(samples), end(samples));
    return samples[(samples.size() - 1) / 2];
  }

  std::string resolve_station(station_ref const& s, latlon const near,
                              std::string const& route_id) {
    auto best = std::optional<std::string>{};
    auto best_d = 0.0;
    for (auto const& [id, st] : feed_.stops) {
      if (st.name != s.name) {
        continue;
      }
      auto const d = haversine_m(near, {st.lat, st.lon});
      if (!best || d < best_d) {
        best = id;
        best_d = d;
      }
    }
    if (best) {
      return *best;
    }
    if (!s.pos) {
      throw error{errc::unresolved_selector,
                  fmt::format("station '{}' not in feed and has no coordinates",
                              s.name)};
    }
    auto id = fmt::format("{}:ext:{}", route_id, s.name);
    feed_.stops[id] = gtfs::stop{id, s.name, s.pos->lat, s.pos->lon};
    return id;
  }

  void append(gtfs::trip& t, extend_line const& e, bool const at_front) {
    auto const& anchor_id =
        at_front ? t.stop_times.front().stop_id : t.stop_times.back().stop_id;
    auto chain = std::vector<std::string>{anchor_id};
    for (auto const& s : e.stations) {
      auto const& prev = feed_.stops.at(chain.back());
      chain.push_back(resolve_station(s, {prev.lat, prev.lon}, t.route_id));
    }

    auto runs = std::vector<seconds>{};
    for (auto i = std::size_t{0}; i + 1 < chain.size(); ++i) {
      auto const& a = feed_.stops.at(chain[i]);
      auto const& b = feed_.stops.at(chain[i + 1]);
      auto run = e.source == run_time_source::observed
                     ? observed_run_time(a.name, b.name)
                     : std::nullopt;
      if (!run) {
        auto const pts = std::array{latlon{a.lat, a.lon}, latlon{b.lat, b.lon}};
        run = derive_run_times(pts, e.fallback).front();
      }
      runs.push_back(*run);
    }

    if (!at_front) {
      auto& end_st = t.stop_times.back();
      end_st.departure = end_st.arrival + e.dwell;
      auto time = end_st.departure;
      for (auto i = std::size_t{1}; i < chain.size(); ++i) {
        time += runs[i - 1];
        auto const dwell = i + 1 == chain.size() ? 0 : e.dwell;
        t.stop_times.push_back(gtfs::stop_time{chain[i], time, time + dwell});
        time += dwell;
      }
    } else {
      auto& start_st = t.stop_times.front();
      start_st.arrival = start_st.departure - e.dwell;
      auto time = start_st.arrival;
      auto prefix = std::vector<gtfs::stop_time>{};
      for (auto i = std::size_t{1}; i < chain.size(); ++i) {
        time -= runs[i - 1];
        auto const dwell = i + 1 == chain.size() ? 0 : e.dwell;
        prefix.push_back(gtfs::stop_time{chain[i], time - dwell, time});
        time -= dwell;
      }
      std::reverse(begin(prefix), end(prefix));
      t.stop_times.insert(begin(t.stop_times), begin(prefix), end(prefix));
    }
  }

  gtfs::feed const& base_;
  gtfs::feed feed_;
  std::vector<gtfs::date> dates_;
  std::map<std::string, gtfs::route> removed_;
};

}  // namespace

gtfs::feed scale_supply_edit(gtfs::feed f, route_selector const& sel,
                             double const factor) {
  if (!(factor > 0.0 && factor <= 1.0)) {
    throw error{errc::invalid_argument,
                fmt::format("supply factor {} outside (0, 1]", factor)};
  }
  auto routes = std::set<std::string>{};
  for (auto const& [id, r] : f.routes) {
    if (sel.matches(r)) {
      routes.insert(id);
    }
  }
  if (routes.empty()) {
    throw error{errc::unresolved_selector, sel.describe()};
  }

  // Headway-defined trips of the selected routes become explicit first, so the
  // cut applies to actual departures; other routes keep their templates.
  auto mini = gtfs::feed{};
  for (auto const& fr : f.frequencies) {
    auto const it = f.trips.find(fr.trip_id);
    if (it != end(f.trips) && routes.contains(it->second.route_id)) {
      mini.trips.emplace(fr.trip_id, it->second);
      mini.frequencies.push_back(fr);
    }
  }
  if (!mini.frequencies.empty()) {
    std::erase_if(f.frequencies, [&](gtfs::frequency const& fr) {
      return mini.trips.contains(fr.trip_id);
    });
    for (auto const& [id, _] : mini.trips) {
      f.trips.erase(id);
    }
    for (auto& [id, t] : gtfs::expand_frequencies(std::move(mini)).trips) {
      f.trips[id] = std::move(t);
    }
  }

  // Trips sharing a service (and direction) run on exactly the same days, so
  // thinning each group thins every service day.
  auto groups = std::map<std::tuple<std::string, std::string, int>,
                         std::vector<gtfs::trip const*>>{};
  for (auto const& [id, t] : f.trips) {
    if (routes.contains(t.route_id) && !t.stop_times.empty()) {
      groups[{t.route_id, t.service_id, t.direction_id}].push_back(&t);
    }
  }
  auto doomed = std::vector<std::string>{};
  for (auto& [_, trips] : groups) {
    std::sort(begin(trips), end(trips),
              [](gtfs::trip const* a, gtfs::trip const* b) {
                auto const da = a->stop_times.front().departure;
                auto const db = b->stop_times.front().departure;
                return da != db ? da < db : a->id < b->id;
              });
    for (auto const r : removed_ranks(trips.size(), factor)) {
      doomed.push_back(trips[r]->id);
    }
  }
  for (auto const& id : doomed) {
    f.trips.erase(id);
  }
  return f;
}

gtfs::feed apply_scenario(gtfs::feed const& base, scenario_spec const& spec,
                          std::span<gtfs::date const> dates) {
  auto ed = editor{base, dates};
  for (auto const& e : spec.edits) {
    std::visit(ed, e);
  }
  auto out = std::move(ed).take();
  gtfs::validate(out);
  return out;
}

std::vector<station> parse_station_catalog(std::string_view const csv) {
  // '#' lines carry provenance notes
  auto body = std::string{};
  auto pos = std::size_t{0};
  while (pos < csv.size()) {
    auto const nl = csv.find('\n', pos);
    auto const line =
        csv.substr(pos, nl == std::string_view::npos ? csv.npos : nl - pos + 1);
    if (!line.starts_with('#')) {
      body += line;
    }
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
  }
  auto const t = parse_csv(body, "stations");
  auto const c_name = t.column("name");
  auto const c_lat = t.column("lat");
  auto const c_lon = t.column("lon");
  if (!c_name || !c_lat || !c_lon) {
    throw error{errc::malformed_row, "stations: need name,lat,lon columns"};
  }
  auto out = std::vector<station>{};
  for (auto const& r : t.rows) {
    try {
      out.push_back(station{r.fields[*c_name],
                            {std::stod(r.fields[*c_lat]),
                             std::stod(r.fields[*c_lon])}});
    } catch (std::exception const&) {
      throw error{errc::malformed_row,
                  fmt::format("stations line {}: bad coordinate", r.line)};
    }
  }
  return out;
}

std::vector<station> const& default_station_catalog() {
  static auto const catalog = parse_station_catalog(detail::station_catalog_csv);
  return catalog;
}

namespace {

std::vector<headway_band> metro_headways() {
  auto const h = [](day_type const d, int const h0, int const m0, int const h1,
                    int const m1, seconds const hw) {
    return headway_band{d, h0 * 3600 + m0 * 60, h1 * 3600 + m1 * 60, hw};
  };
  return {
      h(day_type::weekday, 5, 30, 7, 0, 600),
      h(day_type::weekday, 7, 0, 9, 30, 240),
      h(day_type::weekday, 9, 30, 16, 0, 360),
      h(day_type::weekday, 16, 0, 19, 0, 240),
      h(day_type::weekday, 19, 0, 24, 0, 600),
      h(day_type::saturday, 6, 0, 24, 0, 420),
      h(day_type::sunday, 6, 0, 24, 0, 600),
  };
}

std::vector<edit> tram_restructuring(std::span<station const> catalog) {
  auto albert = std::optional<latlon>{};
  for (auto const& s : catalog) {
    if (s.name == "Albert") {
      albert = s.pos;
    }
  }
  auto const by_name = [](std::string v) {
    return route_selector{route_selector::field::short_name, std::move(v)};
  };
  return {
      extend_line{by_name("7"), "Vanderkindere", {station_ref{"Albert", albert}},
                  run_time_source::observed, tram_calibration, 20},
      curtail_line{by_name("4"), "Stalle", "Albert"},
      curtail_line{by_name("10"), "Esplanade", "Rogier"},
  };
}

line_definition metro3_line(std::span<station const> catalog,
                            std::size_t const n_stations) {
  if (catalog.size() < n_stations) {
    throw error{errc::invalid_argument,
                fmt::format("station catalog has {} stations, need {}",
                            catalog.size(), n_stations)};
  }
  auto line = line_definition{};
  line.route_id = "M3";
  line.short_name = "M3";
  line.long_name = fmt::format("{} - {}", catalog.front().name,
                               catalog[n_stations - 1].name);
  line.route_type = 1;
  line.stations.assign(catalog.begin(),
                       catalog.begin() + static_cast<std::ptrdiff_t>(n_stations));
  line.dwell = default_dwell;
  line.headways = metro_headways();
  line.calibration = metro_calibration;
  line.bidirectional = true;
  return line;
}

}  // namespace

std::vector<scenario_spec> builtin_scenarios(std::span<station const> catalog) {
  auto baseline = scenario_spec{"baseline", {}};

  auto partial = scenario_spec{"partial", {}};
  partial.edits.emplace_back(add_line{metro3_line(catalog, 11)});
  partial.edits.emplace_back(scale_supply{
      route_selector{route_selector::field::id, "M3"}, 0.8});
  for (auto& e : tram_restructuring(catalog)) {
    partial.edits.push_back(std::move(e));
  }

  auto full = scenario_spec{"full", {}};
  full.edits.emplace_back(add_line{metro3_line(catalog, 18)});
  for (auto& e : tram_restructuring(catalog)) {
    full.edits.push_back(std::move(e));
  }

  return {std::move(baseline), std::move(partial), std::move(full)};
}

scenario_spec builtin_scenario(std::string_view const name,
                               std::span<station const> catalog) {
  for (auto& s : builtin_scenarios(catalog)) {
    if (s.name == name) {
      return std::move(s);
    }
  }
  throw error{errc::invalid_argument,
              fmt::format("unknown builtin scenario '{}'", name)};
}

}  // namespace cfta::scenario
