#include "cfta/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "omp.h"
#include "fmt/format.h"

#include "cfta/csv.hpp"
#include "cfta/error.hpp"
#include "cfta/stats.hpp"

namespace cfta::reliability {

double rho_from_halflife(double const half_life_s) {
  if (!(half_life_s > 0.0)) {
    throw error{errc::invalid_argument, "half-life must be positive"};
  }
  return std::numbers::ln2 / half_life_s;
}

reliability_stats compute_stats(std::span<double const> times) {
  if (times.empty()) {
    throw error{errc::empty_sample, "reliability statistics of an empty sample"};
  }
  constexpr auto ps = std::array{0.25, 0.5, 0.75, 0.95};
  auto const q = stats::quantiles(times, ps);
  auto s = reliability_stats{};
  s.median = q[1];
  s.iqr = q[2] - q[0];
  s.rbi_abs = q[3] - q[1];
  s.rbi_rel = q[1] == 0.0 ? std::numeric_limits<double>::quiet_NaN() : q[3] / q[1] - 1.0;
  return s;
}

double certainty_equivalent(std::span<double const> times, double const rho,
                            std::span<double const> weights) {
  if (times.empty()) {
    throw error{errc::empty_sample, "certainty equivalent of an empty sample"};
  }
  if (!(rho > 0.0)) {
    throw error{errc::invalid_argument, "rho must be positive"};
  }
  if (!weights.empty() && weights.size() != times.size()) {
    throw error{errc::invalid_argument, "weights and times differ in length"};
  }
  auto const [lo_it, hi_it] = std::minmax_element(begin(times), end(times));
  auto const lo = *lo_it;
  auto const hi = *hi_it;

  // CE = lo - (1/rho) log(sum w exp(-rho (T - lo)) / sum w); each exponent is
  // <= 0, so nothing overflows and the largest term is exactly w * 1.
  // Written with expm1/log1p so small rho keeps full relative precision:
  // log(mean exp(x)) = log1p(mean expm1(x)).
  auto wsum = 0.0;
  auto acc = 0.0;
  for (auto k = std::size_t{0}; k != times.size(); ++k) {
    auto const w = weights.empty() ? 1.0 : weights[k];
    if (!(w > 0.0)) {
      throw error{errc::invalid_argument, "weights must be positive"};
    }
    wsum += w;
    acc += w * std::expm1(-rho * (times[k] - lo));
  }
  auto const ce = lo - std::log1p(acc / wsum) / rho;
  return std::clamp(ce, lo, hi);
}

namespace {

void fill_origin(panel::od_panel const& p,
                 std::vector<panel::partition const*> const& parts, std::size_t const i,
                 double const rho, metric_table& t) {
  auto const n = p.size();
  auto sample = std::vector<double>{};
  for (auto j = std::size_t{0}; j != n; ++j) {
    auto& cell = t.values[i * n + j];
    cell.fill(panel::na);
    if (i == j) {
      continue;
    }
    sample.clear();
    for (auto const* part : parts) {
      auto const v = part->times[i * n + j];
      if (v == router::unreachable) {
        break;
      }
      sample.push_back(static_cast<double>(v));
    }
    if (sample.size() != parts.size()) {
      continue;
    }
    auto const s = compute_stats(sample);
    cell[p50] = s.median;
    cell[iqr] = s.iqr;
    cell[rbi_abs] = s.rbi_abs;
    cell[rbi_rel] = s.rbi_rel;
    cell[ce] = certainty_equivalent(sample, rho);
  }
}

std::vector<panel::partition const*> select(panel::od_panel const& p,
                                            std::string_view const scenario,
                                            std::string_view const day) {
  auto parts = std::vector<panel::partition const*>{};
  for (auto const& part : p.partitions) {
    if (part.scenario == scenario && part.day == day) {
      parts.push_back(&part);
    }
  }
  if (parts.empty()) {
    throw error{errc::empty_support,
                fmt::format("no partitions for scenario {} on day {}", scenario, day)};
  }
  return parts;
}

metric_table empty_table(panel::od_panel const& p, std::string_view const scenario,
                         std::string_view const day) {
  auto t = metric_table{};
  t.scenario = std::string{scenario};
  t.day = std::string{day};
  for (auto const& nd : p.nodes) {
    t.ids.push_back(nd.id);
  }
  t.values.resize(p.size() * p.size());
  return t;
}

}  // namespace

metric_table metric_table_serial(panel::od_panel const& p, std::string_view const scenario,
                                 std::string_view const day, double const rho) {
  auto const parts = select(p, scenario, day);
  auto t = empty_table(p, scenario, day);
  for (auto i = std::size_t{0}; i != p.size(); ++i) {
    fill_origin(p, parts, i, rho, t);
  }
  return t;
}

metric_table metric_table_omp(panel::od_panel const& p, std::string_view const scenario,
                              std::string_view const day, double const rho,
                              int const threads) {
  if (!(rho > 0.0)) {
    throw error{errc::invalid_argument, "rho must be positive"};
  }
  auto const parts = select(p, scenario, day);
  auto t = empty_table(p, scenario, day);
  auto const n = static_cast<long>(p.size());
#pragma omp parallel for schedule(static) \
    num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (auto i = 0L; i < n; ++i) {
    fill_origin(p, parts, static_cast<std::size_t>(i), rho, t);
  }
  return t;
}

scenario_delta_report delta_report(std::span<metric_table const> scen,
                                   std::span<metric_table const> base, double const rho) {
  if (scen.size() != base.size() || scen.empty()) {
    throw error{errc::empty_support, "scenario and baseline days do not pair up"};
  }
  auto r = scenario_delta_report{};
  r.scenario = scen.front().scenario;
  r.rho = rho;
  r.delta.fill(0.0);

  for (auto d = std::size_t{0}; d != scen.size(); ++d) {
    auto const& ts = scen[d];
    auto const& tb = base[d];
    if (ts.ids != tb.ids || ts.day != tb.day) {
      throw error{errc::invalid_argument, "metric tables do not share nodes and day"};
    }
    auto sum_s = std::array<double, metric_count>{};
    auto sum_b = std::array<double, metric_count>{};
    auto count = std::array<std::size_t, metric_count>{};
    for (auto k = std::size_t{0}; k != ts.values.size(); ++k) {
      auto const& a = ts.values[k];
      auto const& b = tb.values[k];
      if (std::isnan(a[p50]) || std::isnan(b[p50])) {
        continue;
      }
      ++r.pairs;
      for (auto m = std::size_t{0}; m != metric_count; ++m) {
        if (std::isnan(a[m]) || std::isnan(b[m])) {
          continue;
        }
        sum_s[m] += a[m];
        sum_b[m] += b[m];
        ++count[m];
      }
    }
    if (count[p50] == 0) {
      throw error{errc::empty_support, fmt::format("no common OD support on day {}", ts.day)};
    }
    for (auto m = std::size_t{0}; m != metric_count; ++m) {
      auto const c = static_cast<double>(count[m]);
      r.delta[m] += count[m] == 0 ? panel::na : sum_s[m] / c - sum_b[m] / c;
    }
    r.days.push_back(ts.day);
  }
  for (auto& v : r.delta) {
    v /= static_cast<double>(scen.size());
  }
  return r;
}

scenario_delta_report delta_report(panel::od_panel const& p, std::string_view const scenario,
                                   std::string_view const baseline, double const rho,
                                   int const threads) {
  auto ts = std::vector<metric_table>{};
  auto tb = std::vector<metric_table>{};
  for (auto const& day : panel::days(p)) {
    ts.push_back(metric_table_omp(p, scenario, day, rho, threads));
    tb.push_back(metric_table_omp(p, baseline, day, rho, threads));
  }
  return delta_report(ts, tb, rho);
}

std::string reliability_csv_header() {
  return "scenario,\xCE\x94p50_s,\xCE\x94IQR_s,\xCE\x94RBI_abs_s,\xCE\x94RBI_rel,\xCE\x94"
         "CE_s\r\n";
}

std::string reliability_csv_row(scenario_delta_report const& r) {
  auto const num = [](double const v) {
    return std::isnan(v) ? std::string{"NA"} : fmt::format("{}", v);
  };
  return fmt::format("{},{},{},{},{},{}\r\n", csv_escape(r.scenario), num(r.delta[p50]),
                     num(r.delta[iqr]), num(r.delta[rbi_abs]), num(r.delta[rbi_rel]),
                     num(r.delta[ce]));
}

}  // namespace cfta::reliability
