#include "cfta/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cfta/error.hpp"

namespace cfta::stats {

namespace {

// Expects `work` to be a scratch copy; reorders it.
double select_quantile(std::vector<double>& work, double const p) {
  auto const n = work.size();
  auto const h = static_cast<double>(n - 1) * p;
  auto const lo = static_cast<std::size_t>(std::floor(h));
  auto const lo_it = begin(work) + static_cast<std::ptrdiff_t>(lo);
  std::nth_element(begin(work), lo_it, end(work));
  auto const x_lo = *lo_it;
  if (lo + 1 >= n) {
    return x_lo;
  }
  auto const x_hi = *std::min_element(lo_it + 1, end(work));
  return x_lo + (h - static_cast<double>(lo)) * (x_hi - x_lo);
}

}  // namespace

double quantile(std::span<double const> values, double const p) {
  auto const one = std::array{p};
  return quantiles(values, one).front();
}

std::vector<double> quantiles(std::span<double const> values, std::span<double const> ps) {
  if (values.empty()) {
    throw error{errc::empty_sample, "quantile of an empty sample"};
  }
  auto work = std::vector<double>(begin(values), end(values));
  auto out = std::vector<double>{};
  out.reserve(ps.size());
  for (auto const p : ps) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw error{errc::invalid_argument, "quantile level outside [0, 1]"};
    }
    out.push_back(select_quantile(work, p));
  }
  return out;
}

double mean(std::span<double const> v) {
  if (v.empty()) {
    throw error{errc::empty_sample, "mean of an empty sample"};
  }
  auto s = 0.0;
  for (auto const x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

double population_variance(std::span<double const> v) {
  auto const m = mean(v);
  auto s = 0.0;
  for (auto const x : v) {
    s += (x - m) * (x - m);
  }
  return s / static_cast<double>(v.size());
}

std::vector<double> percent_grid() {
  auto out = std::vector<double>{};
  for (auto k = 1; k <= 99; ++k) {
    out.push_back(k / 100.0);
  }
  return out;
}

std::vector<double> decile_grid() {
  auto out = std::vector<double>{};
  for (auto k = 0; k <= 10; ++k) {
    out.push_back(k / 10.0);
  }
  return out;
}

}  // namespace cfta::stats
