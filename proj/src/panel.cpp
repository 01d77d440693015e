#include "cfta/panel.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_map>

#include "omp.h"
#include "fmt/format.h"
#include "json.hpp"

#include "cfta/csv.hpp"
#include "cfta/error.hpp"
#include "cfta/io.hpp"

namespace cfta::panel {

using router::unreachable;

std::string slice_spec::day_code() const {
  return fmt::format("{:02}{:02}", static_cast<unsigned>(date.month()),
                     static_cast<unsigned>(date.day()));
}

std::vector<seconds> slice_spec::instants() const {
  auto out = std::vector<seconds>{};
  for (auto const o : offsets) {
    out.push_back(centre + o);
  }
  std::sort(begin(out), end(out));
  return out;
}

std::string snapshot_label(seconds const offset) {
  if (offset == 0) {
    return "t";
  }
  auto const sign = offset < 0 ? '-' : '+';
  auto const mag = offset < 0 ? -offset : offset;
  return mag % 60 == 0 ? fmt::format("t{}{}", sign, mag / 60)
                       : fmt::format("t{}{}s", sign, mag);
}

std::string hhmm(seconds const t) { return fmt::format("{:02}{:02}", t / 3600, t / 60 % 60); }

slice_spec parse_slice(std::string_view const s, std::vector<seconds> offsets) {
  auto const eq = s.find('=');
  auto const tpos = s.find('T', eq == std::string_view::npos ? 0 : eq);
  if (eq == std::string_view::npos || eq == 0 || tpos == std::string_view::npos) {
    throw error{errc::invalid_argument,
                fmt::format("slice '{}' is not LABEL=YYYY-MM-DDTHH:MM", s)};
  }
  auto time = std::string{s.substr(tpos + 1)};
  if (std::count(begin(time), end(time), ':') == 1) {
    time += ":00";
  }
  auto spec = slice_spec{};
  spec.band = std::string{s.substr(0, eq)};
  spec.date = gtfs::parse_date(s.substr(eq + 1, tpos - eq - 1));
  spec.centre = gtfs::parse_time(time);
  spec.offsets = std::move(offsets);
  if (spec.offsets.empty()) {
    throw error{errc::invalid_argument, "slice needs at least one instant"};
  }
  return spec;
}

std::vector<slice_spec> default_slices() {
  using namespace std::chrono;
  return {slice_spec{"AM", 2025y / June / 10, 8 * 3600},
          slice_spec{"PM", 2025y / June / 12, 17 * 3600 + 30 * 60},
          slice_spec{"SAT", 2025y / July / 12, 13 * 3600}};
}

std::size_t od_panel::row_count() const {
  auto const n = nodes.size();
  return partitions.size() * n * (n == 0 ? 0 : n - 1);
}

std::vector<node> nodes_from_positions(std::span<latlon const> positions) {
  auto out = std::vector<node>{};
  out.reserve(positions.size());
  for (auto i = std::size_t{0}; i != positions.size(); ++i) {
    out.push_back(node{std::to_string(i), positions[i]});
  }
  return out;
}

namespace {

std::vector<latlon> positions_of(std::span<node const> nodes) {
  auto out = std::vector<latlon>{};
  out.reserve(nodes.size());
  for (auto const& n : nodes) {
    out.push_back(n.pos);
  }
  return out;
}

void check_params(routing_params const& p) {
  if (p.max_rounds < 1) {
    throw error{errc::invalid_argument, "max_rounds must be >= 1"};
  }
}

void fill_row(std::vector<seconds>& out, std::size_t const i, std::size_t const n,
              router::travel_time_result const& r) {
  std::copy(begin(r.times), end(r.times), begin(out) + static_cast<std::ptrdiff_t>(i * n));
  out[i * n + i] = 0;
}

}  // namespace

std::vector<seconds> compute_partition_serial(router::timetable_network const& net,
                                              std::span<node const> nodes,
                                              seconds const instant,
                                              routing_params const& params,
                                              std::size_t* out_of_range) {
  check_params(params);
  auto const pos = positions_of(nodes);
  auto const targets = router::prepare_targets(net, pos, params.max_walk_per_leg_m);
  auto const n = nodes.size();
  auto out = std::vector<seconds>(n * n, unreachable);
  auto oor = std::size_t{0};
  for (auto i = std::size_t{0}; i != n; ++i) {
    auto const r = router::earliest_arrival(net, pos[i], instant, targets, params.max_rounds);
    oor += r.origin_out_of_range ? 1 : 0;
    fill_row(out, i, n, r);
  }
  if (out_of_range != nullptr) {
    *out_of_range = oor;
  }
  return out;
}

std::vector<seconds> compute_partition_omp(router::timetable_network const& net,
                                           std::span<node const> nodes,
                                           seconds const instant,
                                           routing_params const& params, int const threads,
                                           std::size_t* out_of_range) {
  check_params(params);
  auto const pos = positions_of(nodes);
  auto const targets = router::prepare_targets(net, pos, params.max_walk_per_leg_m);
  auto const n = static_cast<long>(nodes.size());
  auto out = std::vector<seconds>(nodes.size() * nodes.size(), unreachable);
  auto oor = 0L;

#pragma omp parallel for schedule(dynamic, 1) reduction(+ : oor) \
    num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (auto i = 0L; i < n; ++i) {
    auto const r = router::earliest_arrival(net, pos[static_cast<std::size_t>(i)],
                                            instant, targets, params.max_rounds);
    oor += r.origin_out_of_range ? 1 : 0;
    fill_row(out, static_cast<std::size_t>(i), nodes.size(), r);
  }

  if (out_of_range != nullptr) {
    *out_of_range = static_cast<std::size_t>(oor);
  }
  return out;
}

od_panel compute_panel(network_map const& networks, std::span<node const> nodes,
                       std::span<slice_spec const> slices, routing_params const& params,
                       int const threads) {
  auto panel = od_panel{};
  panel.nodes.assign(begin(nodes), end(nodes));
  for (auto const& [scenario, by_date] : networks) {
    for (auto const& slice : slices) {
      auto const it = by_date.find(slice.date);
      if (it == end(by_date) || it->second == nullptr) {
        throw error{errc::invalid_argument,
                    fmt::format("no network for scenario {} on {}", scenario,
                                gtfs::format_iso_date(slice.date))};
      }
      auto offsets = slice.offsets;
      std::sort(begin(offsets), end(offsets));
      for (auto const o : offsets) {
        auto p = partition{};
        p.scenario = scenario;
        p.band = slice.band;
        p.day = slice.day_code();
        p.instant = slice.centre + o;
        p.snapshot = snapshot_label(o);
        p.times = compute_partition_omp(*it->second, nodes, p.instant, params, threads,
                                        &p.origins_out_of_range);
        panel.partitions.push_back(std::move(p));
      }
    }
  }
  return panel;
}

std::vector<std::string> drop_unreachable(od_panel& panel) {
  auto const n = panel.nodes.size();
  auto keep = std::vector<bool>(n, false);
  for (auto const& p : panel.partitions) {
    for (auto i = std::size_t{0}; i != n; ++i) {
      for (auto j = std::size_t{0}; j != n; ++j) {
        if (i != j && p.times[i * n + j] != unreachable) {
          keep[i] = true;
          keep[j] = true;
        }
      }
    }
  }

  auto dropped = std::vector<std::string>{};
  auto kept_idx = std::vector<std::size_t>{};
  for (auto i = std::size_t{0}; i != n; ++i) {
    if (keep[i]) {
      kept_idx.push_back(i);
    } else {
      dropped.push_back(panel.nodes[i].id);
    }
  }
  if (dropped.empty()) {
    return dropped;
  }

  auto const m = kept_idx.size();
  for (auto& p : panel.partitions) {
    auto t = std::vector<seconds>(m * m);
    for (auto a = std::size_t{0}; a != m; ++a) {
      for (auto b = std::size_t{0}; b != m; ++b) {
        t[a * m + b] = p.times[kept_idx[a] * n + kept_idx[b]];
      }
    }
    p.times = std::move(t);
  }
  auto nodes = std::vector<node>{};
  for (auto const i : kept_idx) {
    nodes.push_back(panel.nodes[i]);
  }
  panel.nodes = std::move(nodes);
  panel.dropped.insert(end(panel.dropped), begin(dropped), end(dropped));
  return dropped;
}

od_matrix aggregate_over_instants(od_panel const& panel, std::string_view const scenario,
                                  std::optional<std::string_view> const day) {
  auto selected = std::vector<partition const*>{};
  for (auto const& p : panel.partitions) {
    if (p.scenario == scenario && (!day || p.day == *day)) {
      selected.push_back(&p);
    }
  }
  if (selected.empty()) {
    throw error{errc::empty_support,
                fmt::format("no partitions for scenario {}{}", scenario,
                            day ? fmt::format(" on day {}", *day) : std::string{})};
  }

  auto const n = panel.nodes.size();
  auto m = od_matrix{};
  for (auto const& nd : panel.nodes) {
    m.ids.push_back(nd.id);
  }
  m.provenance = fmt::format("{}:{}:mean", scenario, day ? *day : "all");
  m.values.assign(n * n, na);
  auto const k = static_cast<double>(selected.size());
  for (auto idx = std::size_t{0}; idx != n * n; ++idx) {
    auto sum = 0.0;
    auto complete = true;
    for (auto const* p : selected) {
      auto const t = p->times[idx];
      if (t == unreachable) {
        complete = false;
        break;
      }
      sum += t;
    }
    if (complete) {
      m.values[idx] = sum / k;
    }
  }
  return m;
}

std::vector<std::string> scenarios(od_panel const& panel) {
  auto s = std::set<std::string>{};
  for (auto const& p : panel.partitions) {
    s.insert(p.scenario);
  }
  return {begin(s), end(s)};
}

std::vector<std::string> days(od_panel const& panel) {
  auto s = std::set<std::string>{};
  for (auto const& p : panel.partitions) {
    s.insert(p.day);
  }
  return {begin(s), end(s)};
}

std::string partition_file_name(partition const& p) {
  auto const clean = [](std::string s) {
    for (auto& c : s) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) {
        c = '_';
      }
    }
    return s;
  };
  return fmt::format("{}_{}_{}_{}.csv", clean(p.scenario), clean(p.band), p.day,
                     hhmm(p.instant));
}

std::string partition_csv(std::span<node const> nodes, partition const& p) {
  auto const n = nodes.size();
  auto ids = std::vector<std::string>{};
  auto coords = std::vector<std::string>{};
  for (auto const& nd : nodes) {
    ids.push_back(csv_escape(nd.id));
    coords.push_back(fmt::format("{},{}", nd.pos.lon, nd.pos.lat));
  }
  auto const tail_scenario = csv_escape(p.scenario);
  auto const tail_snapshot = csv_escape(p.snapshot);
  auto const start = hhmm(p.instant);

  auto out = fmt::memory_buffer{};
  fmt::format_to(std::back_inserter(out), "{}\r\n", csv_header);
  for (auto i = std::size_t{0}; i != n; ++i) {
    for (auto j = std::size_t{0}; j != n; ++j) {
      if (i == j) {
        continue;
      }
      auto const t = p.times[i * n + j];
      fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},", ids[i], ids[j],
                     coords[i], coords[j], tail_scenario, tail_snapshot);
      if (t == unreachable) {
        fmt::format_to(std::back_inserter(out), "NA");
      } else {
        fmt::format_to(std::back_inserter(out), "{}", t);
      }
      fmt::format_to(std::back_inserter(out), ",{},{}\r\n", p.day, start);
    }
  }
  return fmt::to_string(out);
}

namespace {

double to_double(std::string const& s, std::string_view name, std::size_t line) {
  auto v = 0.0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw error{errc::malformed_row, fmt::format("{} line {}: bad number '{}'", name, line, s)};
  }
  return v;
}

seconds to_seconds(std::string const& s, std::string_view name, std::size_t line) {
  auto v = seconds{0};
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) {
    throw error{errc::malformed_row, fmt::format("{} line {}: bad time '{}'", name, line, s)};
  }
  return v;
}

}  // namespace

parsed_partition parse_partition_csv(std::string_view const content,
                                     std::string_view const name) {
  auto const table = parse_csv(content, std::string{name});
  auto header = std::string{};
  for (auto const& h : table.header) {
    header += header.empty() ? h : "," + h;
  }
  if (header != csv_header) {
    throw error{errc::malformed_row, fmt::format("{} line 1: unexpected header", name)};
  }

  auto out = parsed_partition{};
  auto index = std::unordered_map<std::string, std::size_t>{};
  auto const intern = [&](std::string const& id, double lon, double lat) {
    auto const [it, inserted] = index.emplace(id, out.nodes.size());
    if (inserted) {
      out.nodes.push_back(node{id, {lat, lon}});
    }
    return it->second;
  };

  struct cell {
    std::size_t i, j;
    seconds t;
  };
  auto cells = std::vector<cell>{};
  cells.reserve(table.rows.size());
  for (auto const& row : table.rows) {
    auto const& f = row.fields;
    auto const i = intern(f[0], to_double(f[2], name, row.line), to_double(f[3], name, row.line));
    auto const j = intern(f[1], to_double(f[4], name, row.line), to_double(f[5], name, row.line));
    if (i == j) {
      throw error{errc::malformed_row, fmt::format("{} line {}: origin equals destination",
                                                   name, row.line)};
    }
    if (out.part.scenario.empty()) {
      out.part.scenario = f[6];
      out.part.snapshot = f[7];
      out.part.day = f[9];
      auto const st = to_seconds(f[10], name, row.line);
      out.part.instant = st / 100 * 3600 + st % 100 * 60;
    } else if (f[6] != out.part.scenario || f[7] != out.part.snapshot || f[9] != out.part.day) {
      throw error{errc::malformed_row,
                  fmt::format("{} line {}: mixed partitions in one file", name, row.line)};
    }
    cells.push_back({i, j, f[8] == "NA" ? unreachable : to_seconds(f[8], name, row.line)});
  }

  auto const n = out.nodes.size();
  if (cells.size() != n * (n == 0 ? 0 : n - 1)) {
    throw error{errc::malformed_row, fmt::format("{}: {} rows for {} nodes", name,
                                                 cells.size(), n)};
  }
  out.part.times.assign(n * n, unreachable);
  for (auto i = std::size_t{0}; i != n; ++i) {
    out.part.times[i * n + i] = 0;
  }
  for (auto const& c : cells) {
    out.part.times[c.i * n + c.j] = c.t;
  }
  return out;
}

od_panel load_panel(std::filesystem::path const& dir) {
  auto const manifest_path = dir / "manifest.json";
  auto const manifest = nlohmann::json::parse(read_file(manifest_path), nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("partitions")) {
    throw error{errc::malformed_row, manifest_path.string() + ": not a panel manifest"};
  }

  auto panel = od_panel{};
  for (auto const& e : manifest.at("partitions")) {
    auto const file = e.at("file").get<std::string>();
    auto const content = read_file(dir / file);
    if (e.contains("sha256") && sha256_hex(content) != e.at("sha256").get<std::string>()) {
      throw error{errc::io_error, file + ": digest mismatch"};
    }
    auto parsed = parse_partition_csv(content, file);
    if (panel.partitions.empty()) {
      panel.nodes = std::move(parsed.nodes);
    } else {
      auto same = parsed.nodes.size() == panel.nodes.size();
      for (auto i = std::size_t{0}; same && i != parsed.nodes.size(); ++i) {
        same = parsed.nodes[i].id == panel.nodes[i].id;
      }
      if (!same) {
        throw error{errc::malformed_row, file + ": node set differs from first partition"};
      }
    }
    parsed.part.band = e.value("band", std::string{});
    parsed.part.instant = e.value("instant_s", parsed.part.instant);
    parsed.part.origins_out_of_range = e.value("origins_out_of_range", std::size_t{0});
    panel.partitions.push_back(std::move(parsed.part));
  }
  return panel;
}

}  // namespace cfta::panel
