#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cfta/geo.hpp"
#include "cfta/gtfs.hpp"
#include "cfta/router.hpp"

namespace cfta::test {

inline constexpr latlon random_area_center{50.85, 4.35};

struct random_feed_params {
  std::size_t max_stops{20};
  std::size_t max_trips{50};
  double area_m{3000.0};  // side of the square holding the stops
};

// Random single-service feed: a few stop sequences with trips that may
// overtake each other, and stop clusters close enough to create footpaths.
gtfs::feed random_feed(std::mt19937_64&, random_feed_params const& = {});

// Uniform point in the random feed's square, grown by `margin_m`.
latlon random_point(std::mt19937_64&, random_feed_params const& = {},
                    double margin_m = 500.0);

router::network_params random_network_params(std::mt19937_64&);

// Integer-valued samples, with duplicates, as doubles.
std::vector<double> random_integer_sample(std::mt19937_64&, std::size_t n, int lo, int hi);

// Dense random matrix with a zero diagonal.
std::vector<double> random_matrix(std::mt19937_64&, std::size_t n, double lo, double hi);

}  // namespace cfta::test
