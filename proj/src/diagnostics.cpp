#include "cfta/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fmt/format.h"
#include "json.hpp"

#include "cfta/csv.hpp"
#include "cfta/error.hpp"
#include "cfta/stats.hpp"

namespace cfta::diagnostics {

namespace {

void require_same_nodes(od_matrix const& a, od_matrix const& b) {
  if (a.ids != b.ids) {
    throw error{errc::invalid_argument, "matrices do not share a node index"};
  }
}

double pct(std::size_t const k, std::size_t const n) {
  return 100.0 * static_cast<double>(k) / static_cast<double>(n);
}

}  // namespace

paired_values common_support(od_matrix const& base, od_matrix const& scen) {
  require_same_nodes(base, scen);
  auto out = paired_values{};
  auto const n = base.size();
  for (auto i = std::size_t{0}; i != n; ++i) {
    for (auto j = std::size_t{0}; j != n; ++j) {
      if (i == j) {
        continue;
      }
      auto const b = base(i, j);
      auto const s = scen(i, j);
      if (std::isnan(b) || std::isnan(s)) {
        ++out.excluded;
        continue;
      }
      out.base.push_back(b);
      out.scen.push_back(s);
    }
  }
  return out;
}

delta_summary summarize_delta(paired_values const& v) {
  if (v.base.empty()) {
    throw error{errc::empty_support, "no OD pair is finite in both matrices"};
  }
  auto const n = v.base.size();
  auto delta = std::vector<double>(n);
  auto improved = std::size_t{0};
  auto improved_1s = std::size_t{0};
  auto equal = std::size_t{0};
  auto worse_1s = std::size_t{0};
  auto better5 = std::size_t{0};
  auto better10 = std::size_t{0};
  for (auto k = std::size_t{0}; k != n; ++k) {
    auto const d = v.scen[k] - v.base[k];
    delta[k] = d;
    improved += d < 0.0 ? 1 : 0;
    improved_1s += d < -1.0 ? 1 : 0;
    equal += std::abs(d) <= 1.0 ? 1 : 0;
    worse_1s += d > 1.0 ? 1 : 0;
    if (v.base[k] > 0.0) {
      better5 += d / v.base[k] <= -0.05 ? 1 : 0;
      better10 += d / v.base[k] <= -0.10 ? 1 : 0;
    }
  }

  auto s = delta_summary{};
  s.pairs = n;
  s.excluded_pairs = v.excluded;
  s.mean = stats::mean(delta);
  s.median = stats::quantile(delta, 0.5);
  s.deciles = stats::quantiles(delta, stats::decile_grid());
  s.share_improved = pct(improved, n);
  s.share_equal_1s = pct(equal, n);
  s.share_better_5pct = pct(better5, n);
  s.share_better_10pct = pct(better10, n);
  s.share_improved_beyond_1s = pct(improved_1s, n);
  s.share_worsened_beyond_1s = pct(worse_1s, n);
  return s;
}

delta_summary summarize_delta(od_matrix const& base, od_matrix const& scen) {
  return summarize_delta(common_support(base, scen));
}

curve_series shift_function(std::span<double const> base, std::span<double const> scen,
                            std::span<double const> p_grid) {
  if (base.empty() || scen.empty()) {
    throw error{errc::empty_support, "shift function of an empty sample"};
  }
  auto const default_grid = stats::percent_grid();
  auto const grid = p_grid.empty() ? std::span<double const>{default_grid} : p_grid;
  auto const qb = stats::quantiles(base, grid);
  auto const qs = stats::quantiles(scen, grid);
  auto out = curve_series{};
  out.x.assign(begin(grid), end(grid));
  for (auto k = std::size_t{0}; k != grid.size(); ++k) {
    out.y.push_back(qs[k] - qb[k]);
  }
  return out;
}

curve_series delta_ecdf(std::span<double const> base, std::span<double const> scen,
                        std::span<double const> t_grid) {
  if (base.empty() || scen.empty()) {
    throw error{errc::empty_support, "ECDF of an empty sample"};
  }
  auto sb = std::vector<double>(begin(base), end(base));
  auto ss = std::vector<double>(begin(scen), end(scen));
  std::sort(begin(sb), end(sb));
  std::sort(begin(ss), end(ss));
  auto const ecdf = [](std::vector<double> const& sorted, double const t) {
    auto const k = std::upper_bound(begin(sorted), end(sorted), t) - begin(sorted);
    return static_cast<double>(k) / static_cast<double>(sorted.size());
  };
  auto out = curve_series{};
  out.x.assign(begin(t_grid), end(t_grid));
  for (auto const t : t_grid) {
    out.y.push_back(100.0 * (ecdf(ss, t) - ecdf(sb, t)));
  }
  return out;
}

std::vector<double> default_t_grid(std::span<double const> base,
                                   std::span<double const> scen, double const step) {
  if (!(step > 0.0)) {
    throw error{errc::invalid_argument, "grid step must be positive"};
  }
  auto hi = 0.0;
  for (auto const x : base) {
    hi = std::max(hi, x);
  }
  for (auto const x : scen) {
    hi = std::max(hi, x);
  }
  auto out = std::vector<double>{};
  for (auto k = 0L;; ++k) {
    auto const t = static_cast<double>(k) * step;
    out.push_back(t);
    if (t >= hi) {
      break;
    }
  }
  return out;
}

namespace {

// Mean over finite off-diagonal entries of each row; NaN when none.
std::vector<std::pair<double, std::size_t>> outbound_means(od_matrix const& m) {
  auto const n = m.size();
  auto out = std::vector<std::pair<double, std::size_t>>(n, {panel::na, 0});
  for (auto i = std::size_t{0}; i != n; ++i) {
    auto sum = 0.0;
    auto k = std::size_t{0};
    for (auto j = std::size_t{0}; j != n; ++j) {
      if (i != j && !std::isnan(m(i, j))) {
        sum += m(i, j);
        ++k;
      }
    }
    if (k != 0) {
      out[i] = {sum / static_cast<double>(k), k};
    }
  }
  return out;
}

}  // namespace

origin_deltas per_origin_deltas(od_matrix const& base, od_matrix const& scen) {
  require_same_nodes(base, scen);
  auto const mb = outbound_means(base);
  auto const ms = outbound_means(scen);
  auto out = origin_deltas{};
  for (auto i = std::size_t{0}; i != base.size(); ++i) {
    if (ms[i].second == 0 || mb[i].second == 0) {
      ++out.omitted;
      continue;
    }
    out.origins.push_back(origin_delta{base.ids[i], ms[i].first - mb[i].first, ms[i].second});
  }
  return out;
}

origin_deltas per_origin_deltas(od_panel const& p, std::string_view const scenario,
                                std::string_view const baseline,
                                std::optional<std::string_view> const day) {
  return per_origin_deltas(panel::aggregate_over_instants(p, baseline, day),
                           panel::aggregate_over_instants(p, scenario, day));
}

std::vector<double> origin_sigma(od_panel const& p, std::string_view const scenario) {
  auto const n = p.size();
  auto by_day = std::map<std::string, std::vector<panel::partition const*>>{};
  for (auto const& part : p.partitions) {
    if (part.scenario == scenario) {
      by_day[part.day].push_back(&part);
    }
  }
  if (by_day.empty()) {
    throw error{errc::empty_support, fmt::format("no partitions for scenario {}", scenario)};
  }

  // V-bar: mean over days (where defined) of the mean over destinations of
  // the per-pair population variance across instants.
  auto v_sum = std::vector<double>(n, 0.0);
  auto v_days = std::vector<std::size_t>(n, 0);
  auto sample = std::vector<double>{};
  for (auto const& [day, parts] : by_day) {
    for (auto i = std::size_t{0}; i != n; ++i) {
      auto sum = 0.0;
      auto k = std::size_t{0};
      for (auto j = std::size_t{0}; j != n; ++j) {
        if (i == j) {
          continue;
        }
        sample.clear();
        for (auto const* part : parts) {
          auto const t = part->times[i * n + j];
          if (t == router::unreachable) {
            break;
          }
          sample.push_back(static_cast<double>(t));
        }
        if (sample.size() != parts.size()) {
          continue;
        }
        sum += stats::population_variance(sample);
        ++k;
      }
      if (k != 0) {
        v_sum[i] += sum / static_cast<double>(k);
        ++v_days[i];
      }
    }
  }

  auto sigma = std::vector<double>(n, panel::na);
  for (auto i = std::size_t{0}; i != n; ++i) {
    if (v_days[i] != 0) {
      sigma[i] = std::sqrt(v_sum[i] / static_cast<double>(v_days[i]));
    }
  }
  return sigma;
}

origin_sd_deltas per_origin_sd_delta(od_panel const& p, std::string_view const scenario,
                                     std::string_view const baseline) {
  auto const ss = origin_sigma(p, scenario);
  auto const sb = origin_sigma(p, baseline);
  auto out = origin_sd_deltas{};
  for (auto i = std::size_t{0}; i != p.size(); ++i) {
    if (std::isnan(ss[i]) || std::isnan(sb[i])) {
      ++out.omitted;
      continue;
    }
    out.origins.push_back(origin_sd{p.nodes[i].id, ss[i], sb[i], ss[i] - sb[i]});
  }
  if (out.origins.empty()) {
    throw error{errc::empty_support, "no origin with finite dispersion in both scenarios"};
  }
  return out;
}

double variance_fraction(double const di) { return di * di / (1.0 + di * di); }

directionality_report directionality(od_matrix const& a) {
  auto const n = a.size();
  auto r = directionality_report{};
  auto ss = 0.0;
  auto kk = 0.0;
  auto aa = 0.0;
  for (auto i = std::size_t{0}; i != n; ++i) {
    aa += std::isnan(a(i, i)) ? 0.0 : a(i, i) * a(i, i);
    ss += std::isnan(a(i, i)) ? 0.0 : a(i, i) * a(i, i);
    for (auto j = i + 1; j < n; ++j) {
      auto const x = a(i, j);
      auto const y = a(j, i);
      if (std::isnan(x) || std::isnan(y)) {
        ++r.excluded_pairs;
        continue;
      }
      auto const s = (x + y) / 2.0;
      auto const k = (x - y) / 2.0;
      ss += 2.0 * s * s;
      kk += 2.0 * k * k;
      aa += x * x + y * y;
    }
  }
  if (!(ss > 0.0)) {
    throw error{errc::zero_symmetric_norm, "symmetric part has zero norm"};
  }
  r.norm_a = std::sqrt(aa);
  r.norm_s = std::sqrt(ss);
  r.norm_k = std::sqrt(kk);
  r.di = r.norm_k / r.norm_s;
  r.variance_fraction = variance_fraction(r.di);
  return r;
}

// ---- exports ----

namespace {

std::string num(double const v) {
  return std::isnan(v) ? std::string{"NA"} : fmt::format("{}", v);
}

}  // namespace

std::string summary_csv_header() {
  return "comparison,mean_dt_s,median_dt_s,improved_pct,equal_1s_pct,better_5pct_pct,"
         "better_10pct_pct,improved_beyond_1s_pct,worsened_beyond_1s_pct,pairs,"
         "excluded_pairs\r\n";
}

std::string summary_csv_row(std::string_view const comparison, delta_summary const& s) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}\r\n", csv_escape(comparison),
                     num(s.mean), num(s.median), num(s.share_improved),
                     num(s.share_equal_1s), num(s.share_better_5pct),
                     num(s.share_better_10pct), num(s.share_improved_beyond_1s),
                     num(s.share_worsened_beyond_1s), s.pairs, s.excluded_pairs);
}

std::string percentile_csv_header() {
  auto h = std::string{"comparison"};
  for (auto k = 0; k <= 100; k += 10) {
    h += fmt::format(",p{}_dt_s", k);
  }
  return h + "\r\n";
}

std::string percentile_csv_row(std::string_view const comparison, delta_summary const& s) {
  auto row = csv_escape(comparison);
  for (auto const d : s.deciles) {
    row += "," + num(d);
  }
  return row + "\r\n";
}

std::string curve_csv(std::string_view const x_name, std::string_view const y_name,
                      curve_series const& c) {
  auto out = fmt::format("{},{}\r\n", csv_escape(x_name), csv_escape(y_name));
  for (auto k = std::size_t{0}; k != c.x.size(); ++k) {
    out += fmt::format("{},{}\r\n", num(c.x[k]), num(c.y[k]));
  }
  return out;
}

std::string directionality_csv_header() {
  return "scenario,norm_a_s,norm_s_s,norm_k_s,di,variance_fraction,excluded_pairs\r\n";
}

std::string directionality_csv_row(std::string_view const scenario,
                                   directionality_report const& r) {
  return fmt::format("{},{},{},{},{},{},{}\r\n", csv_escape(scenario), num(r.norm_a),
                     num(r.norm_s), num(r.norm_k), num(r.di), num(r.variance_fraction),
                     r.excluded_pairs);
}

std::string origin_geojson(grid::lattice const& l, std::span<std::size_t const> holes,
                           origin_deltas const& d, origin_sd_deltas const& sd) {
  using json = nlohmann::json;
  auto out_by_id = std::map<std::string, double>{};
  for (auto const& o : d.origins) {
    out_by_id[o.origin_id] = o.delta_out;
  }
  auto sd_by_id = std::map<std::string, double>{};
  for (auto const& o : sd.origins) {
    sd_by_id[o.origin_id] = o.delta_sd;
  }
  auto is_hole = std::vector<bool>(l.centroids.size(), false);
  for (auto const h : holes) {
    is_hole.at(h) = true;
  }

  auto features = json::array();
  for (auto const& c : l.centroids) {
    auto ring = json::array();
    for (auto const& v : grid::tile_corners(l, c)) {
      ring.push_back({v.lon, v.lat});
    }
    auto const id = std::to_string(c.id);
    auto props = json{{"id", c.id},
                      {"lon", c.pos.lon},
                      {"lat", c.pos.lat},
                      {"is_hole", static_cast<bool>(is_hole[c.id])},
                      {"delta_out_s", nullptr},
                      {"delta_sd_s", nullptr}};
    if (auto const it = out_by_id.find(id); it != end(out_by_id)) {
      props["delta_out_s"] = it->second;
    }
    if (auto const it = sd_by_id.find(id); it != end(sd_by_id)) {
      props["delta_sd_s"] = it->second;
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
                        {"properties", std::move(props)}});
  }
  return json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump(1) +
         "\n";
}

}  // namespace cfta::diagnostics
