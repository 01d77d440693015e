// One PASS/FAIL line per acceptance criterion; the exit code is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "fmt/format.h"

#include "cfta/diagnostics.hpp"
#include "cfta/grid.hpp"
#include "cfta/io.hpp"
#include "cfta/monetise.hpp"
#include "cfta/pipeline.hpp"
#include "cfta/reliability.hpp"
#include "cfta/router.hpp"
#include "cfta/scenario.hpp"
#include "cfta/stats.hpp"

#include "random_feed.hpp"

using namespace cfta;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

struct outcome {
  bool pass{true};
  std::vector<std::string> notes;

  void expect(bool const ok, std::string note) {
    if (!ok) {
      pass = false;
      notes.push_back(std::move(note));
    }
  }
};

double elapsed_s(clock_type::time_point const start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

double sorted_quantile(std::vector<double> v, double const p) {
  std::sort(begin(v), end(v));
  auto const h = (static_cast<double>(v.size()) - 1.0) * p;
  auto const lo = static_cast<std::size_t>(std::floor(h));
  auto const hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double ecdf(std::vector<double> const& v, double const t) {
  auto const n = std::count_if(begin(v), end(v), [&](double x) { return x <= t; });
  return static_cast<double>(n) / static_cast<double>(v.size());
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(begin(a), end(a));
  std::sort(begin(b), end(b));
  auto i = std::size_t{0};
  auto j = std::size_t{0};
  auto d = 0.0;
  while (i < a.size() || j < b.size()) {
    auto const x = j == b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
    while (i < a.size() && a[i] == x) {
      ++i;
    }
    while (j < b.size() && b[j] == x) {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(a.size()) -
                             static_cast<double>(j) / static_cast<double>(b.size())));
  }
  return d;
}

// ---- 1 ----
outcome monetisation_tables() {
  auto r = outcome{};
  auto const start = clock_type::now();
  auto const t = monetise::sensitivity_tables();

  auto const benefits = std::vector<double>{22.0, 27.5, 27.5, 34.4, 48.1, 60.2, 60.2, 75.2};
  r.expect(t.benefits.size() == benefits.size(), "benefit row count");
  for (auto k = std::size_t{0}; k != std::min(benefits.size(), t.benefits.size()); ++k) {
    auto const got = t.benefits[k].benefit_million;
    r.expect(std::abs(got - benefits[k]) <= 0.05,
             fmt::format("benefit row {}: {} vs {}", k, got, benefits[k]));
  }

  auto const crfs = std::map<std::pair<int, int>, double>{
      {{3, 30}, 0.051019}, {{3, 40}, 0.043262}, {{3, 50}, 0.038865},
      {{4, 30}, 0.057830}, {{4, 40}, 0.050523}, {{4, 50}, 0.046550},
      {{5, 30}, 0.065051}, {{5, 40}, 0.058278}, {{5, 50}, 0.054777}};
  r.expect(t.crfs.size() == crfs.size(), "crf cell count");
  for (auto const& c : t.crfs) {
    auto const key = std::pair{static_cast<int>(std::lround(c.rate * 100)), c.years};
    auto const it = crfs.find(key);
    r.expect(it != crfs.end() && std::abs(c.value - it->second) <= 5e-7,
             fmt::format("crf r={} n={}: {}", c.rate, c.years, c.value));
  }

  // (rate %, benefit m EUR) -> O&M 0 / 40 / 60 m EUR
  auto const capex = std::map<std::pair<int, double>, std::array<double, 3>>{
      {{3, 60.2}, {1.392, 0.467, 0.005}}, {{3, 75.2}, {1.738, 0.814, 0.351}},
      {{4, 60.2}, {1.192, 0.400, 0.004}}, {{4, 75.2}, {1.488, 0.697, 0.301}},
      {{5, 60.2}, {1.033, 0.347, 0.003}}, {{5, 75.2}, {1.290, 0.604, 0.261}}};
  auto const om_index = std::map<int, std::size_t>{{0, 0}, {40, 1}, {60, 2}};
  r.expect(t.capex.size() == 18, "capex cell count");
  for (auto const& c : t.capex) {
    auto const it = capex.find({static_cast<int>(std::lround(c.rate * 100)),
                                std::round(c.benefit_million * 10) / 10});
    auto const om = om_index.find(static_cast<int>(std::lround(c.om_million)));
    r.expect(it != capex.end() && om != om_index.end() &&
                 std::abs(c.capex_billion - it->second[om->second]) <= 0.001,
             fmt::format("capex r={} B={} om={}: {}", c.rate, c.benefit_million, c.om_million,
                         c.capex_billion));
  }
  auto const took = elapsed_s(start);
  r.expect(took < 1.0, fmt::format("runtime {:.3f} s", took));
  return r;
}

// ---- 2 ----
outcome certainty_equivalent() {
  auto r = outcome{};
  auto const rho = reliability::rho_from_halflife(20.0);  // per minute
  auto const t = std::vector<double>{30, 70};
  auto const w = std::vector<double>{0.9, 0.1};
  auto const ce = reliability::certainty_equivalent(t, rho, w);
  r.expect(std::abs(ce - 32.25) <= 0.01, fmt::format("CE {}", ce));
  r.expect(std::abs((34.0 - ce) - 1.75) <= 0.01, fmt::format("premium {}", 34.0 - ce));
  auto const sure = std::vector<double>{34, 34, 34};
  auto const d = reliability::certainty_equivalent(sure, rho);
  r.expect(d == 34.0, fmt::format("degenerate CE {}", d));
  return r;
}

// ---- 3 ----
outcome directionality() {
  auto r = outcome{};
  auto const vf = diagnostics::variance_fraction(0.035) * 100.0;
  r.expect(std::abs(vf - 0.1224) <= 0.0005, fmt::format("variance fraction {} %", vf));
  auto rng = std::mt19937_64{3};
  auto worst = 0.0;
  for (auto k = 0; k != 100; ++k) {
    auto m = panel::od_matrix{};
    for (auto i = 0; i != 50; ++i) {
      m.ids.push_back(std::to_string(i));
    }
    m.values = test::random_matrix(rng, 50, 60.0, 5400.0);
    auto const d = diagnostics::directionality(m);
    auto const a2 = d.norm_a * d.norm_a;
    worst = std::max(worst, std::abs(a2 - d.norm_s * d.norm_s - d.norm_k * d.norm_k) / a2);
  }
  r.expect(worst <= 1e-9, fmt::format("Pythagoras relative error {}", worst));
  return r;
}

// ---- 4 ----
outcome grid_constant() {
  auto r = outcome{};
  auto const o = grid::expected_access_overhead(500.0, 1.3);
  r.expect(std::abs(o.distance_m - 191.30) <= 0.01, fmt::format("distance {}", o.distance_m));
  r.expect(std::abs(o.time_s - 147.0) <= 0.5, fmt::format("time {}", o.time_s));

  auto rng = std::mt19937_64{4};
  auto u = std::uniform_real_distribution<double>{-250.0, 250.0};
  constexpr auto n = 10'000'000;
  auto sum = 0.0;
  auto sum2 = 0.0;
  for (auto k = 0; k != n; ++k) {
    auto const x = u(rng);
    auto const y = u(rng);
    auto const d = std::hypot(x, y);
    sum += d;
    sum2 += d * d;
  }
  auto const mean = sum / n;
  auto const se = std::sqrt((sum2 / n - mean * mean) / n);
  r.expect(std::abs(o.distance_m - mean) <= 3 * se,
           fmt::format("Monte Carlo {} +- {}", mean, se));
  return r;
}

// ---- 5 ----
outcome router_optimality() {
  auto r = outcome{};
  auto const start = clock_type::now();
  auto rng = std::mt19937_64{5};
  auto when = std::uniform_int_distribution<gtfs::seconds>{6 * 3600 + 1800, 9 * 3600};
  auto rounds = std::uniform_int_distribution<int>{1, 5};
  auto walk = std::uniform_real_distribution<double>{200.0, 2000.0};
  auto const day = std::chrono::year{2025} / std::chrono::June / 10;
  auto mismatches = 0;
  for (auto trial = 0; trial != 1000; ++trial) {
    auto const f = test::random_feed(rng);
    auto const net = router::build_network(f, day, test::random_network_params(rng));
    auto q = router::query{};
    q.origin = test::random_point(rng);
    for (auto k = 0; k != 8; ++k) {
      q.destinations.push_back(test::random_point(rng));
    }
    q.departure = when(rng);
    q.max_rounds = rounds(rng);
    q.max_walk_per_leg_m = walk(rng);
    if (router::earliest_arrival(net, q).times != router::oracle_earliest_arrival(net, q).times) {
      ++mismatches;
    }
  }
  r.expect(mismatches == 0, fmt::format("{} mismatches", mismatches));
  auto const took = elapsed_s(start);
  r.expect(took < 120.0, fmt::format("runtime {:.1f} s", took));
  return r;
}

// ---- 6 ----
outcome statistics_oracles() {
  auto r = outcome{};
  auto rng = std::mt19937_64{6};
  auto const deciles = stats::decile_grid();
  auto worst_ks = 0.0;
  auto mismatches = 0;
  for (auto k = 0; k != 100; ++k) {
    auto const a = test::random_integer_sample(rng, 30 + k, 0, 5400);
    auto const b = test::random_integer_sample(rng, 45 + k, 0, 5400);

    auto paired = diagnostics::paired_values{};
    paired.base = a;
    paired.scen = test::random_integer_sample(rng, a.size(), 0, 5400);
    auto deltas = std::vector<double>{};
    for (auto i = std::size_t{0}; i != a.size(); ++i) {
      deltas.push_back(paired.scen[i] - paired.base[i]);
    }
    auto const s = diagnostics::summarize_delta(paired);
    for (auto d = std::size_t{0}; d != deciles.size(); ++d) {
      mismatches += s.deciles[d] != sorted_quantile(deltas, deciles[d]);
    }

    auto const shift = diagnostics::shift_function(a, b);
    for (auto p = std::size_t{0}; p != shift.x.size(); ++p) {
      mismatches += shift.y[p] != sorted_quantile(b, shift.x[p]) - sorted_quantile(a, shift.x[p]);
    }

    auto grid = a;
    grid.insert(end(grid), begin(b), end(b));
    std::sort(begin(grid), end(grid));
    grid.erase(std::unique(begin(grid), end(grid)), end(grid));
    auto const de = diagnostics::delta_ecdf(a, b, grid);
    auto sup = 0.0;
    for (auto g = std::size_t{0}; g != grid.size(); ++g) {
      mismatches += std::abs(de.y[g] - 100.0 * (ecdf(b, grid[g]) - ecdf(a, grid[g]))) > 1e-9;
      sup = std::max(sup, std::abs(de.y[g]) / 100.0);
    }
    worst_ks = std::max(worst_ks, std::abs(sup - ks_statistic(a, b)));

    auto const rs = reliability::compute_stats(a);
    mismatches += rs.median != sorted_quantile(a, 0.5);
    mismatches += rs.iqr != sorted_quantile(a, 0.75) - sorted_quantile(a, 0.25);
    mismatches += rs.rbi_abs != sorted_quantile(a, 0.95) - sorted_quantile(a, 0.5);
  }
  r.expect(mismatches == 0, fmt::format("{} oracle mismatches", mismatches));
  r.expect(worst_ks <= 1e-12, fmt::format("KS gap {}", worst_ks));
  return r;
}

// ---- 7 ----
std::map<std::string, std::string> snapshot(fs::path const& root) {
  auto out = std::map<std::string, std::string>{};
  for (auto const& e : fs::recursive_directory_iterator{root}) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
    }
  }
  return out;
}

outcome pipeline_determinism(fs::path const& source) {
  auto r = outcome{};
  auto const start = clock_type::now();
  auto const toy = source / "data" / "toy_city";
  auto const root = fs::temp_directory_path() / fmt::format("cfta_acceptance_{}", ::getpid());
  fs::remove_all(root);

  auto runs = std::vector<std::map<std::string, std::string>>{};
  for (auto const threads : {1, 1, 8}) {
    auto const dir = root / std::to_string(runs.size());
    auto ingest = pipeline::ingest_config{};
    ingest.feeds = {toy / "tram", toy / "bus"};
    ingest.prefixes = {"t", "b"};
    pipeline::run_ingest(ingest, dir / "ingest");

    auto m = pipeline::matrix_config{};
    for (auto const* name : {"baseline", "partial", "full"}) {
      auto sc = pipeline::scenario_config{};
      sc.base = dir / "ingest" / "feed";
      sc.spec = scenario::builtin_scenario(name, scenario::default_station_catalog());
      for (auto const& s : panel::default_slices()) {
        sc.dates.push_back(s.date);
      }
      pipeline::run_scenario(sc, dir / name);
      m.feeds.emplace_back(name, dir / name / "feed");
    }
    m.boundary = toy / "boundary.geojson";
    m.grid.cell_size = 1000.0;
    m.slices = panel::default_slices();
    m.threads = threads;
    pipeline::run_matrix(m, dir / "panel");

    auto a = pipeline::analyze_config{};
    a.panel_dir = dir / "panel";
    a.threads = threads;
    pipeline::run_analyze(a, dir / "analysis");
    runs.push_back(snapshot(dir));
  }
  fs::remove_all(root);

  r.expect(runs[0] == runs[1], "two runs differ");
  r.expect(runs[1] == runs[2], "1 vs 8 workers differ");
  auto partitions = 0;
  for (auto const& [name, _] : runs[0]) {
    partitions += name.starts_with("panel/") && name.ends_with(".csv");
  }
  r.expect(partitions == 27, fmt::format("{} partitions", partitions));
  auto const took = elapsed_s(start);
  r.expect(took < 60.0, fmt::format("runtime {:.1f} s", took));
  r.notes.push_back(fmt::format("{} files compared", runs[0].size()));
  return r;
}

// ---- 8 ----
outcome scenario_sanity() {
  auto r = outcome{};
  auto const full = scenario::builtin_scenario("full", scenario::default_station_catalog());
  auto const& line = std::get<scenario::add_line>(full.edits.front()).line;
  r.expect(line.stations.size() == 18, fmt::format("{} stations", line.stations.size()));
  auto const run = scenario::end_to_end_runtime(line);
  r.expect(run < 1200, fmt::format("end-to-end {} s", run));

  auto f = gtfs::feed{};
  f.stops["A"] = {"A", "A", 50.85, 4.35};
  f.stops["B"] = {"B", "B", 50.86, 4.35};
  f.routes["L"] = {"L", "", "L1", "", 3};
  f.calendars["S"] = {"S", {true, true, true, true, true, true, true},
                      std::chrono::year{2025} / 1 / 1, std::chrono::year{2025} / 12 / 31};
  for (auto k = 0; k != 10; ++k) {
    auto const dep = 25200 + 600 * k;
    auto const id = fmt::format("t{}", k);
    f.trips[id] = {id, "L", "S", "", 0, {{"A", dep, dep}, {"B", dep + 300, dep + 300}}};
  }
  auto const kept = scenario::scale_supply_edit(
                        f, {scenario::route_selector::field::id, "L"}, 0.8)
                        .trips.size();
  r.expect(kept == 8, fmt::format("ScaleSupply kept {}", kept));
  r.notes.push_back(fmt::format("full line {} s", run));
  return r;
}

// ---- 9 ----
bool has_columns(std::string const& header, std::vector<std::string> const& columns) {
  return std::all_of(begin(columns), end(columns), [&](auto const& c) {
    return header.find(c) != std::string::npos;
  });
}

outcome format_conformance() {
  auto r = outcome{};
  r.expect(has_columns(diagnostics::summary_csv_header(),
                       {"comparison", "mean_dt_s", "median_dt_s", "improved_pct", "equal_1s_pct",
                        "better_5pct_pct", "better_10pct_pct"}),
           "summary columns");
  r.expect(has_columns(diagnostics::percentile_csv_header(),
                       {"comparison", "p0_dt_s", "p20_dt_s", "p40_dt_s", "p60_dt_s", "p80_dt_s",
                        "p100_dt_s"}),
           "percentile columns");
  r.expect(reliability::reliability_csv_header() ==
               "scenario,Δp50_s,ΔIQR_s,ΔRBI_abs_s,ΔRBI_rel,ΔCE_s\r\n",
           "reliability columns");
  r.notes.push_back(
      "city-scale headline values need the full regional feeds; only layouts are checked");
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  auto const source = fs::path{argc > 1 ? argv[1] : CFTA_SOURCE_DIR};
  auto const criteria = std::vector<std::pair<std::string, std::function<outcome()>>>{
      {"monetisation tables", monetisation_tables},
      {"certainty equivalent illustration", certainty_equivalent},
      {"directionality identity", directionality},
      {"access overhead constant", grid_constant},
      {"router matches oracle", router_optimality},
      {"statistics oracles", statistics_oracles},
      {"pipeline determinism", [&] { return pipeline_determinism(source); }},
      {"scenario sanity", scenario_sanity},
      {"output format conformance", format_conformance}};

  auto failed = 0;
  for (auto k = std::size_t{0}; k != criteria.size(); ++k) {
    auto result = outcome{};
    try {
      result = criteria[k].second();
    } catch (std::exception const& e) {
      result.pass = false;
      result.notes.push_back(e.what());
    }
    failed += result.pass ? 0 : 1;
    auto notes = std::string{};
    for (auto const& n : result.notes) {
      notes += "; " + n;
    }
    fmt::print("criterion {}: {} ({}{})\n", k + 1, result.pass ? "PASS" : "FAIL",
               criteria[k].first, notes);
    std::fflush(stdout);
  }
  return failed;
}
