#include "cfta/gtfs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>

#include "fmt/format.h"

#include "cfta/csv.hpp"
#include "cfta/error.hpp"
#include "cfta/zip.hpp"

namespace cfta::gtfs {

namespace fs = std::filesystem;
using namespace std::chrono;

std::size_t feed::stop_time_count() const {
  auto n = std::size_t{0};
  for (auto const& [_, t] : trips) {
    n += t.stop_times.size();
  }
  return n;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
std::optional<T> to_number(std::string_view s) {
  s = trim(s);
  auto v = T{};
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) {
    return std::nullopt;
  }
  // from_chars<double> is available in libstdc++ 11
  auto v = 0.0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

// Shortest representation that parses back to the same double.
std::string format_coord(double const v) { return fmt::format("{}", v); }

// Accessor over one table that reports errors with file + line.
struct table_reader {
  csv_table const& t;

  [[noreturn]] void fail(csv_row const& r, std::string_view why) const {
    throw error{errc::malformed_row,
                fmt::format("{} line {}: {}", t.name, r.line, why)};
  }

  std::optional<std::size_t> col(std::string_view name) const {
    return t.column(name);
  }

  std::size_t required_col(std::string_view name) const {
    auto const c = t.column(name);
    if (!c) {
      throw error{errc::malformed_row,
                  fmt::format("{} line 1: missing column {}", t.name, name)};
    }
    return *c;
  }

  std::string get(csv_row const& r, std::optional<std::size_t> c) const {
    return c ? std::string{trim(r.fields[*c])} : std::string{};
  }
};

std::optional<csv_table> load_table(
    std::map<std::string, std::string> const& files, std::string const& name) {
  auto const it = files.find(name);
  if (it == end(files)) {
    return std::nullopt;
  }
  return parse_csv(it->second, name);
}

csv_table require_table(std::map<std::string, std::string> const& files,
                        std::string const& name) {
  auto t = load_table(files, name);
  if (!t) {
    throw error{errc::missing_file, name};
  }
  return std::move(*t);
}

void interpolate_missing(std::vector<std::optional<seconds>>& arr,
                         std::vector<std::optional<seconds>>& dep,
                         table_reader const& rd, csv_row const& first_row) {
  auto const n = arr.size();
  for (auto i = std::size_t{0}; i < n; ++i) {
    if (!arr[i] && dep[i]) {
      arr[i] = dep[i];
    }
    if (!dep[i] && arr[i]) {
      dep[i] = arr[i];
    }
  }
  if (n == 0 || !arr.front() || !arr.back()) {
    rd.fail(first_row, "first and last stop of a trip must be timed");
  }
  auto prev = std::size_t{0};
  for (auto i = std::size_t{1}; i < n; ++i) {
    if (!arr[i]) {
      continue;
    }
    for (auto k = prev + 1; k < i; ++k) {
      auto const frac = static_cast<double>(k - prev) /
                        static_cast<double>(i - prev);
      auto const v = static_cast<seconds>(std::lround(
          *dep[prev] + frac * static_cast<double>(*arr[i] - *dep[prev])));
      arr[k] = v;
      dep[k] = v;
    }
    prev = i;
  }
}

}  // namespace

seconds parse_time(std::string_view s) {
  s = trim(s);
  auto const c1 = s.find(':');
  auto const c2 = c1 == std::string_view::npos ? c1 : s.find(':', c1 + 1);
  if (c2 == std::string_view::npos) {
    throw error{errc::malformed_row, fmt::format("bad time '{}'", s)};
  }
  auto const h = to_number<int>(s.substr(0, c1));
  auto const m = to_number<int>(s.substr(c1 + 1, c2 - c1 - 1));
  auto const sec = to_number<int>(s.substr(c2 + 1));
  if (!h || !m || !sec || *h < 0 || *m < 0 || *m > 59 || *sec < 0 ||
      *sec > 59 || s.size() - c2 - 1 != 2 || c2 - c1 - 1 != 2) {
    throw error{errc::malformed_row, fmt::format("bad time '{}'", s)};
  }
  return *h * 3600 + *m * 60 + *sec;
}

std::string format_time(seconds const t) {
  return fmt::format("{:02}:{:02}:{:02}", t / 3600, (t / 60) % 60, t % 60);
}

date parse_date(std::string_view s) {
  s = trim(s);
  auto y = std::optional<int>{};
  auto m = std::optional<unsigned>{};
  auto d = std::optional<unsigned>{};
  if (s.size() == 8) {
    y = to_number<int>(s.substr(0, 4));
    m = to_number<unsigned>(s.substr(4, 2));
    d = to_number<unsigned>(s.substr(6, 2));
  } else if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    y = to_number<int>(s.substr(0, 4));
    m = to_number<unsigned>(s.substr(5, 2));
    d = to_number<unsigned>(s.substr(8, 2));
  }
  if (!y || !m || !d) {
    throw error{errc::malformed_row, fmt::format("bad date '{}'", s)};
  }
  auto const ymd = year{*y} / month{*m} / day{*d};
  if (!ymd.ok()) {
    throw error{errc::malformed_row, fmt::format("bad date '{}'", s)};
  }
  return ymd;
}

std::string format_date(date const d) {
  return fmt::format("{:04}{:02}{:02}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()),
                     static_cast<unsigned>(d.day()));
}

std::string format_iso_date(date const d) {
  return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()),
                     static_cast<unsigned>(d.day()));
}

feed parse_feed(fs::path const& path) {
  auto files = std::map<std::string, std::string>{};
  if (fs::is_directory(path)) {
    for (auto const& entry : fs::directory_iterator{path}) {
      if (!entry.is_regular_file() || entry.path().extension() != ".txt") {
        continue;
      }
      auto in = std::ifstream{entry.path(), std::ios::binary};
      files.emplace(entry.path().filename().string(),
                    std::string{std::istreambuf_iterator<char>{in}, {}});
    }
  } else if (fs::is_regular_file(path)) {
    files = read_zip(path);
  } else {
    throw error{errc::missing_file, path.string()};
  }
  return parse_feed_tables(files);
}

feed parse_feed_tables(std::map<std::string, std::string> const& files) {
  auto f = feed{};

  if (auto const t = load_table(files, "agency.txt")) {
    auto const rd = table_reader{*t};
    auto const c_id = rd.col("agency_id");
    auto const c_name = rd.col("agency_name");
    auto const c_url = rd.col("agency_url");
    auto const c_tz = rd.col("agency_timezone");
    for (auto const& r : t->rows) {
      auto a = agency{rd.get(r, c_id), rd.get(r, c_name), rd.get(r, c_url),
                      rd.get(r, c_tz)};
      auto const id = a.id;
      if (!f.agencies.emplace(id, std::move(a)).second) {
        rd.fail(r, fmt::format("duplicate agency_id '{}'", id));
      }
    }
  }

  {
    auto const t = require_table(files, "stops.txt");
    auto const rd = table_reader{t};
    auto const c_id = rd.required_col("stop_id");
    auto const c_name = rd.col("stop_name");
    auto const c_lat = rd.col("stop_lat");
    auto const c_lon = rd.col("stop_lon");
    auto const c_type = rd.col("location_type");
    for (auto const& r : t.rows) {
      auto const type = rd.get(r, c_type);
      if (!type.empty() && type != "0") {
        continue;  // stations, entrances, nodes: not boardable
      }
      auto const lat = to_double(rd.get(r, c_lat));
      auto const lon = to_double(rd.get(r, c_lon));
      if (!lat || !lon || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 ||
          *lon > 180.0) {
        rd.fail(r, "stop_lat/stop_lon missing or out of range");
      }
      auto s = stop{rd.get(r, c_id), rd.get(r, c_name), *lat, *lon};
      if (s.id.empty()) {
        rd.fail(r, "empty stop_id");
      }
      auto const id = s.id;
      if (!f.stops.emplace(id, std::move(s)).second) {
        rd.fail(r, fmt::format("duplicate stop_id '{}'", id));
      }
    }
  }

  {
    auto const t = require_table(files, "routes.txt");
    auto const rd = table_reader{t};
    auto const c_id = rd.required_col("route_id");
    auto const c_agency = rd.col("agency_id");
    auto const c_short = rd.col("route_short_name");
    auto const c_long = rd.col("route_long_name");
    auto const c_type = rd.required_col("route_type");
    for (auto const& r : t.rows) {
      auto const type = to_number<int>(rd.get(r, c_type));
      if (!type) {
        rd.fail(r, "bad route_type");
      }
      auto rt = route{rd.get(r, c_id), rd.get(r, c_agency), rd.get(r, c_short),
                      rd.get(r, c_long), *type};
      auto const id = rt.id;
      if (!f.routes.emplace(id, std::move(rt)).second) {
        rd.fail(r, fmt::format("duplicate route_id '{}'", id));
      }
    }
  }

  {
    auto const t = require_table(files, "trips.txt");
    auto const rd = table_reader{t};
    auto const c_route = rd.required_col("route_id");
    auto const c_service = rd.required_col("service_id");
    auto const c_id = rd.required_col("trip_id");
    auto const c_headsign = rd.col("trip_headsign");
    auto const c_dir = rd.col("direction_id");
    for (auto const& r : t.rows) {
      auto tr = trip{};
      tr.id = rd.get(r, c_id);
      tr.route_id = rd.get(r, c_route);
      tr.service_id = rd.get(r, c_service);
      tr.headsign = rd.get(r, c_headsign);
      if (auto const d = rd.get(r, c_dir); !d.empty()) {
        auto const v = to_number<int>(d);
        if (!v || (*v != 0 && *v != 1)) {
          rd.fail(r, "bad direction_id");
        }
        tr.direction_id = *v;
      }
      auto const id = tr.id;
      if (!f.trips.emplace(id, std::move(tr)).second) {
        rd.fail(r, fmt::format("duplicate trip_id '{}'", id));
      }
    }
  }

  {
    auto const t = require_table(files, "stop_times.txt");
    auto const rd = table_reader{t};
    auto const c_trip = rd.required_col("trip_id");
    auto const c_arr = rd.required_col("arrival_time");
    auto const c_dep = rd.required_col("departure_time");
    auto const c_stop = rd.required_col("stop_id");
    auto const c_seq = rd.required_col("stop_sequence");

    struct raw {
      int seq;
      std::string stop_id;
      std::optional<seconds> arr;
      std::optional<seconds> dep;
      csv_row const* row;
    };
    auto by_trip = std::map<std::string, std::vector<raw>>{};
    for (auto const& r : t.rows) {
      auto const seq = to_number<int>(rd.get(r, c_seq));
      if (!seq) {
        rd.fail(r, "bad stop_sequence");
      }
      auto const parse_opt = [&](std::size_t const c) -> std::optional<seconds> {
        auto const v = rd.get(r, c);
        if (v.empty()) {
          return std::nullopt;
        }
        try {
          return parse_time(v);
        } catch (error const&) {
          rd.fail(r, fmt::format("bad time '{}'", v));
        }
      };
      by_trip[rd.get(r, c_trip)].push_back(
          raw{*seq, rd.get(r, c_stop), parse_opt(c_arr), parse_opt(c_dep), &r});
    }
    for (auto& [trip_id, rows] : by_trip) {
      auto const it = f.trips.find(trip_id);
      if (it == end(f.trips)) {
        throw error{errc::dangling_reference,
                    fmt::format("stop_times.txt line {}: trip_id '{}' undefined",
                                rows.front().row->line, trip_id)};
      }
      std::stable_sort(begin(rows), end(rows),
                       [](raw const& a, raw const& b) { return a.seq < b.seq; });
      for (auto i = std::size_t{1}; i < rows.size(); ++i) {
        if (rows[i].seq == rows[i - 1].seq) {
          rd.fail(*rows[i].row, "duplicate stop_sequence within trip");
        }
      }
      auto arr = std::vector<std::optional<seconds>>{};
      auto dep = std::vector<std::optional<seconds>>{};
      for (auto const& x : rows) {
        arr.push_back(x.arr);
        dep.push_back(x.dep);
      }
      interpolate_missing(arr, dep, rd, *rows.front().row);
      auto& st = it->second.stop_times;
      for (auto i = std::size_t{0}; i < rows.size(); ++i) {
        st.push_back(stop_time{rows[i].stop_id, *arr[i], *dep[i]});
      }
    }
  }

  auto const has_calendar = files.contains("calendar.txt");
  auto const has_dates = files.contains("calendar_dates.txt");
  if (!has_calendar && !has_dates) {
    throw error{errc::missing_file, "calendar.txt and calendar_dates.txt"};
  }
  if (auto const t = load_table(files, "calendar.txt")) {
    auto const rd = table_reader{*t};
    auto const c_id = rd.required_col("service_id");
    static constexpr std::array<std::string_view, 7> names = {
        "monday", "tuesday", "wednesday", "thursday",
        "friday", "saturday", "sunday"};
    auto cols = std::array<std::size_t, 7>{};
    for (auto i = 0; i < 7; ++i) {
      cols[i] = rd.required_col(names[i]);
    }
    auto const c_start = rd.required_col("start_date");
    auto const c_end = rd.required_col("end_date");
    for (auto const& r : t->rows) {
      auto c = calendar{};
      c.service_id = rd.get(r, c_id);
      for (auto i = 0; i < 7; ++i) {
        auto const v = rd.get(r, cols[i]);
        if (v != "0" && v != "1") {
          rd.fail(r, fmt::format("bad {} flag", names[i]));
        }
        c.weekdays[i] = v == "1";
      }
      try {
        c.start = parse_date(rd.get(r, c_start));
        c.end = parse_date(rd.get(r, c_end));
      } catch (error const&) {
        rd.fail(r, "bad start_date/end_date");
      }
      auto const id = c.service_id;
      if (!f.calendars.emplace(id, std::move(c)).second) {
        rd.fail(r, fmt::format("duplicate service_id '{}'", id));
      }
    }
  }
  if (auto const t = load_table(files, "calendar_dates.txt")) {
    auto const rd = table_reader{*t};
    auto const c_id = rd.required_col("service_id");
    auto const c_date = rd.required_col("date");
    auto const c_type = rd.required_col("exception_type");
    for (auto const& r : t->rows) {
      auto cd = calendar_date{};
      try {
        cd.day = parse_date(rd.get(r, c_date));
      } catch (error const&) {
        rd.fail(r, "bad date");
      }
      auto const type = rd.get(r, c_type);
      if (type == "1") {
        cd.type = exception_type::added;
      } else if (type == "2") {
        cd.type = exception_type::removed;
      } else {
        rd.fail(r, "bad exception_type");
      }
      f.calendar_dates[rd.get(r, c_id)].push_back(cd);
    }
  }

  if (auto const t = load_table(files, "frequencies.txt")) {
    auto const rd = table_reader{*t};
    auto const c_trip = rd.required_col("trip_id");
    auto const c_start = rd.required_col("start_time");
    auto const c_end = rd.required_col("end_time");
    auto const c_headway = rd.required_col("headway_secs");
    for (auto const& r : t->rows) {
      auto fr = frequency{};
      fr.trip_id = rd.get(r, c_trip);
      try {
        fr.start = parse_time(rd.get(r, c_start));
        fr.end = parse_time(rd.get(r, c_end));
      } catch (error const&) {
        rd.fail(r, "bad start_time/end_time");
      }
      auto const h = to_number<int>(rd.get(r, c_headway));
      if (!h || *h <= 0) {
        rd.fail(r, "headway_secs must be a positive integer");
      }
      fr.headway = *h;
      f.frequencies.push_back(std::move(fr));
    }
  }

  validate(f);
  return f;
}

void validate(feed const& f) {
  auto const dangling = [](std::string_view what, std::string_view id,
                           std::string_view owner) {
    throw error{errc::dangling_reference,
                fmt::format("{} '{}' referenced by '{}' is undefined", what, id,
                            owner)};
  };
  for (auto const& [id, r] : f.routes) {
    if (!r.agency_id.empty() && !f.agencies.empty() &&
        !f.agencies.contains(r.agency_id)) {
      dangling("agency", r.agency_id, id);
    }
  }
  for (auto const& [id, t] : f.trips) {
    if (!f.routes.contains(t.route_id)) {
      dangling("route", t.route_id, id);
    }
    if (!f.calendars.contains(t.service_id) &&
        !f.calendar_dates.contains(t.service_id)) {
      dangling("service", t.service_id, id);
    }
    auto prev = std::numeric_limits<seconds>::min();
    for (auto const& st : t.stop_times) {
      if (!f.stops.contains(st.stop_id)) {
        dangling("stop", st.stop_id, id);
      }
      if (st.arrival < prev || st.departure < st.arrival) {
        throw error{errc::malformed_row,
                    fmt::format("stop_times.txt: times decrease along trip '{}'",
                                id)};
      }
      prev = st.departure;
    }
  }
  for (auto const& fr : f.frequencies) {
    if (!f.trips.contains(fr.trip_id)) {
      dangling("trip", fr.trip_id, "frequencies.txt");
    }
  }
}

std::map<std::string, std::string> serialize_feed(feed const& f) {
  auto files = std::map<std::string, std::string>{};
  auto out = std::ostringstream{};

  if (!f.agencies.empty()) {
    write_csv_row(out, {"agency_id", "agency_name", "agency_url",
                        "agency_timezone"});
    for (auto const& [_, a] : f.agencies) {
      write_csv_row(out, {a.id, a.name, a.url, a.timezone});
    }
    files["agency.txt"] = std::exchange(out, {}).str();
  }

  write_csv_row(out, {"stop_id", "stop_name", "stop_lat", "stop_lon"});
  for (auto const& [_, s] : f.stops) {
    write_csv_row(out, {s.id, s.name, format_coord(s.lat), format_coord(s.lon)});
  }
  files["stops.txt"] = std::exchange(out, {}).str();

  write_csv_row(out, {"route_id", "agency_id", "route_short_name",
                      "route_long_name", "route_type"});
  for (auto const& [_, r] : f.routes) {
    write_csv_row(out, {r.id, r.agency_id, r.short_name, r.long_name,
                        std::to_string(r.type)});
  }
  files["routes.txt"] = std::exchange(out, {}).str();

  write_csv_row(out, {"route_id", "service_id", "trip_id", "trip_headsign",
                      "direction_id"});
  for (auto const& [_, t] : f.trips) {
    write_csv_row(out, {t.route_id, t.service_id, t.id, t.headsign,
                        t.direction_id < 0 ? std::string{}
                                           : std::to_string(t.direction_id)});
  }
  files["trips.txt"] = std::exchange(out, {}).str();

  write_csv_row(out, {"trip_id", "arrival_time", "departure_time", "stop_id",
                      "stop_sequence"});
  for (auto const& [_, t] : f.trips) {
    for (auto i = std::size_t{0}; i < t.stop_times.size(); ++i) {
      auto const& st = t.stop_times[i];
      write_csv_row(out, {t.id, format_time(st.arrival),
                          format_time(st.departure), st.stop_id,
                          std::to_string(i)});
    }
  }
  files["stop_times.txt"] = std::exchange(out, {}).str();

  if (!f.calendars.empty() || f.calendar_dates.empty()) {
    write_csv_row(out, {"service_id", "monday", "tuesday", "wednesday",
                        "thursday", "friday", "saturday", "sunday",
                        "start_date", "end_date"});
    for (auto const& [_, c] : f.calendars) {
      auto row = std::vector<std::string>{c.service_id};
      for (auto const w : c.weekdays) {
        row.emplace_back(w ? "1" : "0");
      }
      row.push_back(format_date(c.start));
      row.push_back(format_date(c.end));
      write_csv_row(out, row);
    }
    files["calendar.txt"] = std::exchange(out, {}).str();
  }

  if (!f.calendar_dates.empty()) {
    write_csv_row(out, {"service_id", "date", "exception_type"});
    for (auto const& [service, dates] : f.calendar_dates) {
      for (auto const& d : dates) {
        write_csv_row(out, {service, format_date(d.day),
                            d.type == exception_type::added ? "1" : "2"});
      }
    }
    files["calendar_dates.txt"] = std::exchange(out, {}).str();
  }

  if (!f.frequencies.empty()) {
    write_csv_row(out, {"trip_id", "start_time", "end_time", "headway_secs",
                        "exact_times"});
    for (auto const& fr : f.frequencies) {
      write_csv_row(out, {fr.trip_id, format_time(fr.start), format_time(fr.end),
                          std::to_string(fr.headway), "1"});
    }
    files["frequencies.txt"] = std::exchange(out, {}).str();
  }
  return files;
}

void write_feed(feed const& f, fs::path const& dir) {
  fs::create_directories(dir);
  for (auto const& [name, content] : serialize_feed(f)) {
    auto out = std::ofstream{dir / name, std::ios::binary | std::ios::trunc};
    if (!out) {
      throw error{errc::io_error, fmt::format("cannot write {}", (dir / name).string())};
    }
    out << content;
  }
}

feed merge_feeds(std::span<feed const> feeds,
                 std::span<std::string const> prefixes) {
  if (feeds.size() != prefixes.size()) {
    throw error{errc::invalid_argument,
                fmt::format("{} feeds but {} prefixes", feeds.size(),
                            prefixes.size())};
  }
  auto seen = std::set<std::string>{};
  for (auto const& p : prefixes) {
    if (!seen.insert(p).second) {
      throw error{errc::duplicate_prefix, p};
    }
  }

  auto merged = feed{};
  for (auto i = std::size_t{0}; i < feeds.size(); ++i) {
    auto const& f = feeds[i];
    auto const pre = [&](std::string const& id) {
      return id.empty() ? id : prefixes[i] + ":" + id;
    };
    for (auto const& [id, a] : f.agencies) {
      auto x = a;
      x.id = pre(a.id.empty() ? std::string{"agency"} : a.id);
      merged.agencies.emplace(x.id, std::move(x));
    }
    for (auto const& [id, s] : f.stops) {
      auto x = s;
      x.id = pre(s.id);
      merged.stops.emplace(x.id, std::move(x));
    }
    for (auto const& [id, r] : f.routes) {
      auto x = r;
      x.id = pre(r.id);
      if (!r.agency_id.empty()) {
        x.agency_id = pre(r.agency_id);
      } else if (f.agencies.size() == 1) {
        auto const& only = begin(f.agencies)->second.id;
        x.agency_id = pre(only.empty() ? std::string{"agency"} : only);
      }
      merged.routes.emplace(x.id, std::move(x));
    }
    for (auto const& [id, t] : f.trips) {
      auto x = t;
      x.id = pre(t.id);
      x.route_id = pre(t.route_id);
      x.service_id = pre(t.service_id);
      for (auto& st : x.stop_times) {
        st.stop_id = pre(st.stop_id);
      }
      merged.trips.emplace(x.id, std::move(x));
    }
    for (auto const& [id, c] : f.calendars) {
      auto x = c;
      x.service_id = pre(c.service_id);
      merged.calendars.emplace(x.service_id, std::move(x));
    }
    for (auto const& [id, dates] : f.calendar_dates) {
      merged.calendar_dates.emplace(pre(id), dates);
    }
    for (auto const& fr : f.frequencies) {
      auto x = fr;
      x.trip_id = pre(fr.trip_id);
      merged.frequencies.push_back(std::move(x));
    }
  }
  return merged;
}

feed expand_frequencies(feed f) {
  if (f.frequencies.empty()) {
    return f;
  }
  auto generated = std::vector<trip>{};
  auto templates = std::set<std::string>{};
  for (auto const& fr : f.frequencies) {
    auto const& tmpl = f.trips.at(fr.trip_id);
    templates.insert(fr.trip_id);
    if (tmpl.stop_times.empty()) {
      continue;
    }
    auto const origin = tmpl.stop_times.front().departure;
    for (auto dep = fr.start; dep < fr.end; dep += fr.headway) {
      auto t = tmpl;
      t.id = fmt::format("{}@{}", tmpl.id, format_time(dep));
      auto const shift = dep - origin;
      for (auto& st : t.stop_times) {
        st.arrival += shift;
        st.departure += shift;
      }
      generated.push_back(std::move(t));
    }
  }
  for (auto const& id : templates) {
    f.trips.erase(id);
  }
  for (auto& t : generated) {
    auto const id = t.id;
    f.trips.insert_or_assign(id, std::move(t));
  }
  f.frequencies.clear();
  return f;
}

bool service_active(feed const& f, std::string const& service_id,
                    date const d) {
  auto active = false;
  if (auto const it = f.calendars.find(service_id); it != end(f.calendars)) {
    auto const& c = it->second;
    if (sys_days{d} >= sys_days{c.start} && sys_days{d} <= sys_days{c.end}) {
      auto const wd = weekday{sys_days{d}}.iso_encoding();  // Monday = 1
      active = c.weekdays[wd - 1];
    }
  }
  if (auto const it = f.calendar_dates.find(service_id);
      it != end(f.calendar_dates)) {
    for (auto const& cd : it->second) {
      if (cd.day == d) {
        active = cd.type == exception_type::added;
      }
    }
  }
  return active;
}

std::set<std::string> service_on_date(feed const& f, date const d) {
  auto active = std::map<std::string, bool>{};
  auto trips = std::set<std::string>{};
  for (auto const& [id, t] : f.trips) {
    auto [it, inserted] = active.try_emplace(t.service_id, false);
    if (inserted) {
      it->second = service_active(f, t.service_id, d);
    }
    if (it->second) {
      trips.insert(id);
    }
  }
  return trips;
}

}  // namespace cfta::gtfs
