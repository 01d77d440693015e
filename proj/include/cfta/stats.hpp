#pragma once

#include <span>
#include <vector>

namespace cfta::stats {

// Type-7 quantile: with h = (n - 1) p, interpolate linearly between the
// order statistics x[floor(h)] and x[floor(h) + 1] (0-based). Uses selection,
// not a full sort. Throws errc::empty_sample.
double quantile(std::span<double const> values, double p);
std::vector<double> quantiles(std::span<double const> values, std::span<double const> ps);

double mean(std::span<double const>);
double population_variance(std::span<double const>);

// p = 0.01, 0.02, ..., 0.99
std::vector<double> percent_grid();
// p = 0.0, 0.1, ..., 1.0
std::vector<double> decile_grid();

}  // namespace cfta::stats
