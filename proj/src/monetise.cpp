#include "cfta/monetise.hpp"

#include <cmath>

#include "fmt/format.h"

#include "cfta/error.hpp"

namespace cfta::monetise {

double annual_benefit(double const mean_dt_s, double const trips_per_year,
                      double const vot_eur_per_h) {
  if (!(trips_per_year > 0.0) || vot_eur_per_h < 0.0) {
    throw error{errc::invalid_argument, "trips must be > 0 and VOT >= 0"};
  }
  return std::abs(mean_dt_s) * trips_per_year * vot_eur_per_h / 3600.0;
}

double crf(double const rate, int const years) {
  if (!(rate > 0.0) || years < 1) {
    throw error{errc::invalid_argument, "rate must be > 0 and years >= 1"};
  }
  return rate / (1.0 - std::pow(1.0 + rate, -years));
}

double breakeven_capex(double const benefit, double const om, double const crf) {
  if (!(crf > 0.0)) {
    throw error{errc::invalid_argument, "CRF must be positive"};
  }
  return (benefit - om) / crf;
}

result evaluate(input const& in) {
  if (in.om_eur_per_year < 0.0) {
    throw error{errc::invalid_argument, "O&M must be >= 0"};
  }
  auto r = result{};
  r.benefit_eur_per_year = annual_benefit(in.mean_dt_s, in.trips_per_year, in.vot_eur_per_h);
  r.crf = crf(in.rate, in.years);
  r.capex_star_eur = breakeven_capex(r.benefit_eur_per_year, in.om_eur_per_year, r.crf);
  r.benefit_below_om = r.benefit_eur_per_year < in.om_eur_per_year;
  return r;
}

std::string result_csv(input const& in, result const& r) {
  return fmt::format(
      "mean_dt_s,trips_per_year,vot_eur_per_h,rate,years,om_eur_per_year,"
      "benefit_eur_per_year,crf,capex_star_eur,flag\r\n"
      "{},{},{},{},{},{},{},{},{},{}\r\n",
      in.mean_dt_s, in.trips_per_year, in.vot_eur_per_h, in.rate, in.years,
      in.om_eur_per_year, r.benefit_eur_per_year, r.crf, r.capex_star_eur,
      r.benefit_below_om ? "benefit below O&M" : "");
}

sensitivity sensitivity_tables() {
  auto a = sensitivity{};
  for (auto const& [name, dt] : {std::pair{"Partial", 16.5}, std::pair{"Full", 36.1}}) {
    for (auto const q : {400.0, 500.0}) {
      for (auto const vot : {12.0, 15.0}) {
        a.benefits.push_back(
            {name, dt, q, vot, annual_benefit(dt, q * 1e6, vot) / 1e6});
      }
    }
  }
  for (auto const r : {0.03, 0.04, 0.05}) {
    for (auto const n : {30, 40, 50}) {
      a.crfs.push_back({r, n, crf(r, n)});
    }
  }
  // The capex table starts from the benefit values as printed (one decimal).
  for (auto const r : {0.03, 0.04, 0.05}) {
    for (auto const b : {60.2, 75.2}) {
      for (auto const om : {0.0, 40.0, 60.0}) {
        a.capex.push_back(
            {r, 40, b, om, breakeven_capex(b * 1e6, om * 1e6, crf(r, 40)) / 1e9});
      }
    }
  }
  return a;
}

std::string benefits_csv(sensitivity const& a) {
  auto out = std::string{"scenario,mean_dt_s,trips_million_per_year,vot_eur_per_h,"
                         "benefit_meur_per_year\r\n"};
  for (auto const& b : a.benefits) {
    out += fmt::format("{},{:.1f},{:.0f},{:.0f},{:.1f}\r\n", b.scenario, b.mean_dt_s,
                       b.trips_million, b.vot, b.benefit_million);
  }
  return out;
}

std::string crf_csv(sensitivity const& a) {
  auto out = std::string{"rate,n30,n40,n50\r\n"};
  for (auto i = std::size_t{0}; i < a.crfs.size(); i += 3) {
    out += fmt::format("{:.2f},{:.6f},{:.6f},{:.6f}\r\n", a.crfs[i].rate, a.crfs[i].value,
                       a.crfs[i + 1].value, a.crfs[i + 2].value);
  }
  return out;
}

std::string capex_csv(sensitivity const& a) {
  auto out = std::string{"rate,years,benefit_meur_per_year,om0_beur,om40_beur,om60_beur\r\n"};
  for (auto i = std::size_t{0}; i < a.capex.size(); i += 3) {
    auto const& c = a.capex[i];
    out += fmt::format("{:.2f},{},{:.1f},{:.3f},{:.3f},{:.3f}\r\n", c.rate, c.years,
                       c.benefit_million, c.capex_billion, a.capex[i + 1].capex_billion,
                       a.capex[i + 2].capex_billion);
  }
  return out;
}

}  // namespace cfta::monetise
