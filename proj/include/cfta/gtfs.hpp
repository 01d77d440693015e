#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cfta::gtfs {

// Seconds past service-day midnight; values above 86400 are overnight.
using seconds = std::int32_t;
using date = std::chrono::year_month_day;

struct agency {
  std::string id;
  std::string name;
  std::string url;
  std::string timezone;

  friend bool operator==(agency const&, agency const&) = default;
};

struct stop {
  std::string id;
  std::string name;
  double lat{0.0};
  double lon{0.0};

  friend bool operator==(stop const&, stop const&) = default;
};

struct route {
  std::string id;
  std::string agency_id;
  std::string short_name;
  std::string long_name;
  int type{3};

  friend bool operator==(route const&, route const&) = default;
};

struct stop_time {
  std::string stop_id;
  seconds arrival{0};
  seconds departure{0};

  friend bool operator==(stop_time const&, stop_time const&) = default;
};

struct trip {
  std::string id;
  std::string route_id;
  std::string service_id;
  std::string headsign;
  int direction_id{-1};  // -1 when absent
  std::vector<stop_time> stop_times;

  friend bool operator==(trip const&, trip const&) = default;
};

struct calendar {
  std::string service_id;
  std::array<bool, 7> weekdays{};  // Monday first, as in calendar.txt
  date start{};
  date end{};

  friend bool operator==(calendar const&, calendar const&) = default;
};

enum class exception_type : std::uint8_t { added = 1, removed = 2 };

struct calendar_date {
  date day{};
  exception_type type{exception_type::added};

  friend bool operator==(calendar_date const&, calendar_date const&) = default;
};

struct frequency {
  std::string trip_id;
  seconds start{0};
  seconds end{0};
  seconds headway{0};

  friend bool operator==(frequency const&, frequency const&) = default;
};

// A merged timetable. Ordered maps keep iteration (and hence every derived
// artifact) deterministic.
struct feed {
  std::map<std::string, agency> agencies;
  std::map<std::string, stop> stops;
  std::map<std::string, route> routes;
  std::map<std::string, trip> trips;
  std::map<std::string, calendar> calendars;
  std::map<std::string, std::vector<calendar_date>> calendar_dates;
  std::vector<frequency> frequencies;

  std::size_t stop_time_count() const;

  friend bool operator==(feed const&, feed const&) = default;
};

// "HH:MM:SS" with hours allowed >= 24.
seconds parse_time(std::string_view);
std::string format_time(seconds);

// "YYYYMMDD" (GTFS) and "YYYY-MM-DD" (CLI) forms.
date parse_date(std::string_view);
std::string format_date(date);
std::string format_iso_date(date);

// Reads a GTFS zip archive or a directory of .txt tables.
feed parse_feed(std::filesystem::path const&);

// Parses from in-memory tables keyed by file name (e.g. "stops.txt").
feed parse_feed_tables(std::map<std::string, std::string> const& files);

// Serialises to GTFS tables keyed by file name; the output parses back into an
// equal feed.
std::map<std::string, std::string> serialize_feed(feed const&);
void write_feed(feed const&, std::filesystem::path const& dir);

// Checks referential integrity and time monotonicity; throws cfta::error.
void validate(feed const&);

feed merge_feeds(std::span<feed const> feeds,
                 std::span<std::string const> prefixes);

// Replaces every frequency-based trip by explicit trips departing at start,
// start + headway, ... while < end.
feed expand_frequencies(feed);

bool service_active(feed const&, std::string const& service_id, date);
std::set<std::string> service_on_date(feed const&, date);

}  // namespace cfta::gtfs
