#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfta/grid.hpp"
#include "cfta/panel.hpp"

namespace cfta::diagnostics {

using panel::od_matrix;
using panel::od_panel;

// Comparison of two mean matrices over the pairwise-finite common support.
// Shares are percentages. `share_improved` counts dT < 0 (the headline
// definition); `share_improved_beyond_1s`, `share_equal_1s` and
// `share_worsened_beyond_1s` partition the support into dT < -1, |dT| <= 1,
// dT > 1.
struct delta_summary {
  double mean{0.0};
  double median{0.0};
  double share_improved{0.0};
  double share_equal_1s{0.0};
  double share_better_5pct{0.0};
  double share_better_10pct{0.0};
  double share_improved_beyond_1s{0.0};
  double share_worsened_beyond_1s{0.0};
  std::vector<double> deciles;  // p = 0, 0.1, ..., 1
  std::size_t pairs{0};
  std::size_t excluded_pairs{0};
};

// Baseline and scenario values on the common support, pair by pair.
struct paired_values {
  std::vector<double> base;
  std::vector<double> scen;
  std::size_t excluded{0};
};

paired_values common_support(od_matrix const& base, od_matrix const& scen);

delta_summary summarize_delta(od_matrix const& base, od_matrix const& scen);
delta_summary summarize_delta(paired_values const&);

struct curve_series {
  std::vector<double> x;
  std::vector<double> y;
};

// dQ(p) = Q_scen(p) - Q_base(p); the default grid is p = 0.01..0.99.
curve_series shift_function(std::span<double const> base, std::span<double const> scen,
                            std::span<double const> p_grid = {});

// dF(t) = F_scen(t) - F_base(t) in percentage points.
curve_series delta_ecdf(std::span<double const> base, std::span<double const> scen,
                        std::span<double const> t_grid);

// 0, step, 2 step, ... up to the first multiple of `step` >= the largest
// value of either sample.
std::vector<double> default_t_grid(std::span<double const> base,
                                   std::span<double const> scen, double step = 60.0);

struct origin_delta {
  std::string origin_id;
  double delta_out{0.0};
  std::size_t support{0};  // destinations behind the scenario mean
};

struct origin_deltas {
  std::vector<origin_delta> origins;
  std::size_t omitted{0};  // origins without finite destinations in either matrix
};

// Per-origin outbound mean in each matrix (own finite destinations), then
// differenced over origins present in both.
origin_deltas per_origin_deltas(od_matrix const& base, od_matrix const& scen);
origin_deltas per_origin_deltas(od_panel const&, std::string_view scenario,
                                std::string_view baseline,
                                std::optional<std::string_view> day = std::nullopt);

struct origin_sd {
  std::string origin_id;
  double sigma_scen{0.0};
  double sigma_base{0.0};
  double delta_sd{0.0};
};

struct origin_sd_deltas {
  std::vector<origin_sd> origins;
  std::size_t omitted{0};
};

// Population variance over the instants of each day, averaged over
// destinations, then over days, square-rooted and differenced.
std::vector<double> origin_sigma(od_panel const&, std::string_view scenario);
origin_sd_deltas per_origin_sd_delta(od_panel const&, std::string_view scenario,
                                     std::string_view baseline);

struct directionality_report {
  double norm_a{0.0};
  double norm_s{0.0};
  double norm_k{0.0};
  double di{0.0};
  double variance_fraction{0.0};
  std::size_t excluded_pairs{0};  // unordered pairs with an NA in either direction
};

double variance_fraction(double di);
directionality_report directionality(od_matrix const&);

// ---- exports ----

std::string summary_csv_header();
std::string summary_csv_row(std::string_view comparison, delta_summary const&);

std::string percentile_csv_header();
std::string percentile_csv_row(std::string_view comparison, delta_summary const&);

std::string curve_csv(std::string_view x_name, std::string_view y_name,
                      curve_series const&);

std::string directionality_csv_header();
std::string directionality_csv_row(std::string_view scenario, directionality_report const&);

// Per-origin layer on the lattice tiles: {id, lon, lat, is_hole,
// delta_out_s, delta_sd_s}; origins missing from the deltas get nulls.
std::string origin_geojson(grid::lattice const&, std::span<std::size_t const> holes,
                           origin_deltas const&, origin_sd_deltas const&);

}  // namespace cfta::diagnostics
