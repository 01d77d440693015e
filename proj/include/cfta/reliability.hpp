#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfta/panel.hpp"

namespace cfta::reliability {

inline constexpr double default_half_life_s = 1200.0;

double rho_from_halflife(double half_life_s);

struct reliability_stats {
  double median{0.0};
  double iqr{0.0};
  double rbi_abs{0.0};
  double rbi_rel{0.0};  // NaN when the median is 0
};

// Type-7 quantiles of the sample. Throws errc::empty_sample.
reliability_stats compute_stats(std::span<double const> times);

// Entropic certainty equivalent -(1/rho) log(sum w exp(-rho T) / sum w),
// evaluated in log space after shifting by min T; clamped to [min T, max T].
// Empty `weights` means equal weights.
double certainty_equivalent(std::span<double const> times, double rho,
                            std::span<double const> weights = {});

enum metric : std::size_t { p50, iqr, rbi_abs, rbi_rel, ce, metric_count };
inline constexpr std::array<std::string_view, metric_count> metric_names{
    "p50", "IQR", "RBI_abs", "RBI_rel", "CE"};

// Per-OD metrics for one (scenario, day) over that day's instants. Pairs that
// are NA at any instant, and the diagonal, hold NaN.
struct metric_table {
  std::string scenario;
  std::string day;
  std::vector<std::string> ids;
  std::vector<std::array<double, metric_count>> values;  // N x N, row-major
};

metric_table metric_table_serial(panel::od_panel const&, std::string_view scenario,
                                 std::string_view day, double rho);
// Same result computed with an OpenMP loop over origins.
metric_table metric_table_omp(panel::od_panel const&, std::string_view scenario,
                              std::string_view day, double rho, int threads = 0);

struct scenario_delta_report {
  std::string scenario;
  double rho{0.0};
  std::array<double, metric_count> delta{};  // mean over days of per-day deltas
  std::vector<std::string> days;
  std::size_t pairs{0};  // summed common support over days
};

// For each day the metric is averaged over the pairs finite in both tables
// (RBI_rel additionally skips pairs with an undefined ratio), differenced,
// and the differences are averaged over days. Tables pair up by index.
scenario_delta_report delta_report(std::span<metric_table const> scenario,
                                   std::span<metric_table const> baseline, double rho);

scenario_delta_report delta_report(panel::od_panel const&, std::string_view scenario,
                                   std::string_view baseline, double rho, int threads = 0);

std::string reliability_csv_header();
std::string reliability_csv_row(scenario_delta_report const&);

}  // namespace cfta::reliability
