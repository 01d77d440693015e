#include <fstream>
#include <iterator>

#include "fmt/format.h"
#include "yaml-cpp/yaml.h"

#include "cfta/error.hpp"
#include "cfta/scenario.hpp"

namespace cfta::scenario {

namespace {

class spec_reader {
public:
  explicit spec_reader(std::string_view source) : source_{source} {}

  [[noreturn]] void fail(YAML::Node const& n, std::string_view why) const {
    auto const line = n.Mark().line >= 0 ? n.Mark().line + 1 : 0;
    throw error{errc::malformed_row,
                fmt::format("{} line {}: {}", source_, line, why)};
  }

  YAML::Node need(YAML::Node const& n, char const* key) const {
    auto v = n[key];
    if (!v) {
      fail(n, fmt::format("missing key '{}'", key));
    }
    return v;
  }

  template <typename T>
  T as(YAML::Node const& n, std::string_view what) const {
    try {
      return n.as<T>();
    } catch (YAML::Exception const&) {
      fail(n, fmt::format("'{}' has the wrong type", what));
    }
  }

  template <typename T>
  T get_or(YAML::Node const& n, char const* key, T fallback) const {
    auto v = n[key];
    return v ? as<T>(v, key) : fallback;
  }

  seconds time(YAML::Node const& n, std::string_view what) const {
    auto const s = as<std::string>(n, what);
    try {
      return gtfs::parse_time(s);
    } catch (error const&) {
      fail(n, fmt::format("'{}' is not HH:MM:SS", what));
    }
  }

  route_selector selector(YAML::Node const& n) const {
    auto const r = need(n, "route");
    if (r["id"]) {
      return {route_selector::field::id, as<std::string>(r["id"], "id")};
    }
    if (r["short_name"]) {
      return {route_selector::field::short_name,
              as<std::string>(r["short_name"], "short_name")};
    }
    fail(r, "route selector needs 'id' or 'short_name'");
  }

  run_time_calibration calibration(YAML::Node const& n,
                                   run_time_calibration fallback) const {
    if (!n) {
      return fallback;
    }
    auto c = fallback;
    c.commercial_speed_mps =
        get_or(n, "commercial_speed", fallback.commercial_speed_mps);
    c.min_segment_time = get_or(n, "min_segment_time", fallback.min_segment_time);
    if (!(c.commercial_speed_mps > 0.0)) {
      fail(n, "commercial_speed must be > 0");
    }
    return c;
  }

  day_type days(YAML::Node const& n) const {
    auto const s = as<std::string>(n, "days");
    if (s == "all") return day_type::all;
    if (s == "weekday") return day_type::weekday;
    if (s == "saturday") return day_type::saturday;
    if (s == "sunday") return day_type::sunday;
    fail(n, fmt::format("unknown day type '{}'", s));
  }

  edit parse_edit(YAML::Node const& n) const {
    if (!n.IsMap() || n.size() != 1) {
      fail(n, "each edit is a single-key map");
    }
    auto const kind = n.begin()->first.as<std::string>();
    auto const body = n.begin()->second;

    if (kind == "add_line") {
      auto line = line_definition{};
      line.route_id = as<std::string>(need(body, "route_id"), "route_id");
      line.short_name = get_or<std::string>(body, "short_name", line.route_id);
      line.long_name = get_or<std::string>(body, "long_name", "");
      line.route_type = get_or(body, "route_type", 1);
      line.dwell = get_or(body, "dwell", default_dwell);
      line.bidirectional = get_or(body, "bidirectional", false);
      line.calibration = calibration(body["calibration"], metro_calibration);
      auto const stations = need(body, "stations");
      for (auto const& s : stations) {
        line.stations.push_back(
            station{as<std::string>(need(s, "name"), "name"),
                    {as<double>(need(s, "lat"), "lat"),
                     as<double>(need(s, "lon"), "lon")}});
      }
      if (line.stations.size() < 2) {
        fail(stations, "add_line needs at least 2 stations");
      }
      if (line.dwell < 0) {
        fail(body["dwell"], "dwell must be >= 0");
      }
      for (auto const& h : need(body, "headways")) {
        auto band = headway_band{};
        band.days = h["days"] ? days(h["days"]) : day_type::all;
        band.start = time(need(h, "start"), "start");
        band.end = time(need(h, "end"), "end");
        band.headway = as<seconds>(need(h, "headway"), "headway");
        if (band.headway <= 0) {
          fail(h, "headway must be > 0");
        }
        line.headways.push_back(band);
      }
      return add_line{std::move(line)};
    }
    if (kind == "remove_line") {
      return remove_line{selector(body)};
    }
    if (kind == "curtail_line") {
      return curtail_line{selector(body),
                          as<std::string>(need(body, "from"), "from"),
                          as<std::string>(need(body, "to"), "to")};
    }
    if (kind == "extend_line") {
      auto e = extend_line{};
      e.route = selector(body);
      e.anchor = as<std::string>(need(body, "anchor"), "anchor");
      for (auto const& s : need(body, "stations")) {
        auto ref = station_ref{as<std::string>(need(s, "name"), "name"), {}};
        if (s["lat"] || s["lon"]) {
          ref.pos = latlon{as<double>(need(s, "lat"), "lat"),
                           as<double>(need(s, "lon"), "lon")};
        }
        e.stations.push_back(std::move(ref));
      }
      auto const src = get_or<std::string>(body, "run_times", "observed");
      if (src == "observed") {
        e.source = run_time_source::observed;
      } else if (src == "derived") {
        e.source = run_time_source::derived;
      } else {
        fail(body["run_times"], "run_times must be 'observed' or 'derived'");
      }
      e.fallback = calibration(body["calibration"], tram_calibration);
      e.dwell = get_or(body, "dwell", e.dwell);
      return e;
    }
    if (kind == "scale_supply") {
      auto const factor = as<double>(need(body, "factor"), "factor");
      if (!(factor > 0.0 && factor <= 1.0)) {
        fail(body["factor"], "factor must lie in (0, 1]");
      }
      return scale_supply{selector(body), factor};
    }
    fail(n, fmt::format("unknown edit '{}'", kind));
  }

private:
  std::string_view source_;
};

char const* day_name(day_type const d) {
  switch (d) {
    case day_type::all: return "all";
    case day_type::weekday: return "weekday";
    case day_type::saturday: return "saturday";
    case day_type::sunday: return "sunday";
  }
  return "all";
}

void emit_selector(YAML::Emitter& out, route_selector const& s) {
  out << YAML::Key << "route" << YAML::Value << YAML::Flow << YAML::BeginMap
      << YAML::Key << (s.by == route_selector::field::id ? "id" : "short_name")
      << YAML::Value << s.value << YAML::EndMap;
}

void emit_calibration(YAML::Emitter& out, run_time_calibration const& c) {
  out << YAML::Key << "calibration" << YAML::Value << YAML::Flow
      << YAML::BeginMap << YAML::Key << "commercial_speed" << YAML::Value
      << c.commercial_speed_mps << YAML::Key << "min_segment_time"
      << YAML::Value << c.min_segment_time << YAML::EndMap;
}

struct edit_emitter {
  YAML::Emitter& out;

  void operator()(add_line const& e) const {
    auto const& l = e.line;
    out << YAML::BeginMap << YAML::Key << "add_line" << YAML::Value
        << YAML::BeginMap;
    out << YAML::Key << "route_id" << YAML::Value << l.route_id;
    out << YAML::Key << "short_name" << YAML::Value << l.short_name;
    out << YAML::Key << "long_name" << YAML::Value << l.long_name;
    out << YAML::Key << "route_type" << YAML::Value << l.route_type;
    out << YAML::Key << "bidirectional" << YAML::Value << l.bidirectional;
    out << YAML::Key << "dwell" << YAML::Value << l.dwell;
    emit_calibration(out, l.calibration);
    out << YAML::Key << "stations" << YAML::Value << YAML::BeginSeq;
    for (auto const& s : l.stations) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value
          << s.name << YAML::Key << "lat" << YAML::Value << s.pos.lat
          << YAML::Key << "lon" << YAML::Value << s.pos.lon << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "headways" << YAML::Value << YAML::BeginSeq;
    for (auto const& h : l.headways) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "days" << YAML::Value
          << day_name(h.days) << YAML::Key << "start" << YAML::Value
          << gtfs::format_time(h.start) << YAML::Key << "end" << YAML::Value
          << gtfs::format_time(h.end) << YAML::Key << "headway" << YAML::Value
          << h.headway << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap << YAML::EndMap;
  }

  void operator()(remove_line const& e) const {
    out << YAML::BeginMap << YAML::Key << "remove_line" << YAML::Value
        << YAML::BeginMap;
    emit_selector(out, e.route);
    out << YAML::EndMap << YAML::EndMap;
  }

  void operator()(curtail_line const& e) const {
    out << YAML::BeginMap << YAML::Key << "curtail_line" << YAML::Value
        << YAML::BeginMap;
    emit_selector(out, e.route);
    out << YAML::Key << "from" << YAML::Value << e.from_stop << YAML::Key
        << "to" << YAML::Value << e.to_stop << YAML::EndMap << YAML::EndMap;
  }

  void operator()(extend_line const& e) const {
    out << YAML::BeginMap << YAML::Key << "extend_line" << YAML::Value
        << YAML::BeginMap;
    emit_selector(out, e.route);
    out << YAML::Key << "anchor" << YAML::Value << e.anchor;
    out << YAML::Key << "stations" << YAML::Value << YAML::BeginSeq;
    for (auto const& s : e.stations) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value
          << s.name;
      if (s.pos) {
        out << YAML::Key << "lat" << YAML::Value << s.pos->lat << YAML::Key
            << "lon" << YAML::Value << s.pos->lon;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "run_times" << YAML::Value
        << (e.source == run_time_source::observed ? "observed" : "derived");
    emit_calibration(out, e.fallback);
    out << YAML::Key << "dwell" << YAML::Value << e.dwell;
    out << YAML::EndMap << YAML::EndMap;
  }

  void operator()(scale_supply const& e) const {
    out << YAML::BeginMap << YAML::Key << "scale_supply" << YAML::Value
        << YAML::BeginMap;
    emit_selector(out, e.route);
    out << YAML::Key << "factor" << YAML::Value << e.factor << YAML::EndMap
        << YAML::EndMap;
  }
};

}  // namespace

scenario_spec parse_scenario_spec(std::string_view const yaml,
                                  std::string_view const source_name) {
  auto root = YAML::Node{};
  try {
    root = YAML::Load(std::string{yaml});
  } catch (YAML::ParserException const& e) {
    throw error{errc::malformed_row, fmt::format("{} line {}: {}", source_name,
                                                 e.mark.line + 1, e.msg)};
  }
  auto const rd = spec_reader{source_name};
  if (!root.IsMap()) {
    rd.fail(root, "scenario spec must be a map with 'name' and 'edits'");
  }
  auto spec = scenario_spec{};
  spec.name = rd.as<std::string>(rd.need(root, "name"), "name");
  if (auto const edits = root["edits"]) {
    if (!edits.IsSequence() && !edits.IsNull()) {
      rd.fail(edits, "'edits' must be a list");
    }
    for (auto const& e : edits) {
      spec.edits.push_back(rd.parse_edit(e));
    }
  }
  return spec;
}

scenario_spec load_scenario_spec(std::filesystem::path const& p) {
  auto in = std::ifstream{p, std::ios::binary};
  if (!in) {
    throw error{errc::missing_file, p.string()};
  }
  auto const text = std::string{std::istreambuf_iterator<char>{in}, {}};
  return parse_scenario_spec(text, p.filename().string());
}

std::string to_yaml(scenario_spec const& spec) {
  auto out = YAML::Emitter{};
  out.SetDoublePrecision(10);
  out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << spec.name;
  out << YAML::Key << "edits" << YAML::Value << YAML::BeginSeq;
  for (auto const& e : spec.edits) {
    std::visit(edit_emitter{out}, e);
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string{out.c_str()} + "\n";
}

}  // namespace cfta::scenario
