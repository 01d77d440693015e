// Serial reference vs OpenMP kernels on the toy city.
//
//   cfta_bench --benchmark_counters_tabular=true

#include <filesystem>
#include <random>

#include "benchmark/benchmark.h"

#include "cfta/grid.hpp"
#include "cfta/gtfs.hpp"
#include "cfta/io.hpp"
#include "cfta/panel.hpp"
#include "cfta/reliability.hpp"
#include "cfta/router.hpp"

using namespace cfta;
namespace fs = std::filesystem;

namespace {

constexpr auto service_day = std::chrono::year{2025} / std::chrono::June / 10;
constexpr gtfs::seconds instant = 8 * 3600;

fs::path const toy_root = fs::path{CFTA_SOURCE_DIR} / "data" / "toy_city";

router::timetable_network toy_network() {
  auto const feeds = std::vector<gtfs::feed>{gtfs::parse_feed(toy_root / "tram"),
                                             gtfs::parse_feed(toy_root / "bus")};
  auto const prefixes = std::vector<std::string>{"t", "b"};
  return router::build_network(gtfs::merge_feeds(feeds, prefixes), service_day);
}

std::vector<panel::node> toy_nodes() {
  auto const boundary = grid::parse_boundary(read_file(toy_root / "boundary.geojson"));
  return panel::nodes_from_positions(grid::generate_grid(boundary, {250.0, {}}).positions());
}

struct toy_city {
  router::timetable_network network{toy_network()};
  std::vector<panel::node> nodes{toy_nodes()};
};

toy_city const& city() {
  static auto const c = toy_city{};
  return c;
}

panel::od_panel const& random_panel() {
  static auto const p = [] {
    constexpr auto n = std::size_t{300};
    auto out = panel::od_panel{};
    for (auto i = std::size_t{0}; i != n; ++i) {
      out.nodes.push_back({std::to_string(i), {}});
    }
    auto rng = std::mt19937_64{7};
    auto t = std::uniform_int_distribution<gtfs::seconds>{60, 5400};
    for (auto k = 0; k != 3; ++k) {
      auto part = panel::partition{};
      part.scenario = "full";
      part.band = "AM";
      part.day = "0610";
      part.instant = 28200 + 600 * k;
      part.snapshot = panel::snapshot_label(600 * (k - 1));
      part.times.resize(n * n);
      for (auto& v : part.times) {
        v = t(rng);
      }
      out.partitions.push_back(std::move(part));
    }
    return out;
  }();
  return p;
}

void partition_serial(benchmark::State& state) {
  auto const& c = city();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        panel::compute_partition_serial(c.network, c.nodes, instant, panel::routing_params{}));
  }
  state.counters["nodes"] = static_cast<double>(c.nodes.size());
}

void partition_omp(benchmark::State& state) {
  auto const& c = city();
  auto const threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(panel::compute_partition_omp(c.network, c.nodes, instant,
                                                          panel::routing_params{}, threads));
  }
  state.counters["nodes"] = static_cast<double>(c.nodes.size());
}

void metric_table_serial(benchmark::State& state) {
  auto const rho = reliability::rho_from_halflife(1200.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reliability::metric_table_serial(random_panel(), "full", "0610", rho));
  }
}

void metric_table_omp(benchmark::State& state) {
  auto const rho = reliability::rho_from_halflife(1200.0);
  auto const threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reliability::metric_table_omp(random_panel(), "full", "0610", rho, threads));
  }
}

}  // namespace

BENCHMARK(partition_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(partition_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(metric_table_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(metric_table_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_MAIN();
