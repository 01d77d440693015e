#pragma once

#include <string>
#include <vector>

namespace cfta::monetise {

struct input {
  double mean_dt_s{0.0};  // sign ignored
  double trips_per_year{0.0};
  double vot_eur_per_h{0.0};
  double rate{0.04};
  int years{40};
  double om_eur_per_year{0.0};
};

struct result {
  double benefit_eur_per_year{0.0};
  double crf{0.0};
  double capex_star_eur{0.0};
  bool benefit_below_om{false};
};

double annual_benefit(double mean_dt_s, double trips_per_year, double vot_eur_per_h);
double crf(double rate, int years);
double breakeven_capex(double benefit, double om, double crf);

result evaluate(input const&);

std::string result_csv(input const&, result const&);

// Sensitivity grids. Cells hold full-precision values; the CSV export rounds to
// one decimal (m EUR), six (CRF) and three (bn EUR).
struct benefit_row {
  std::string scenario;
  double mean_dt_s;
  double trips_million;
  double vot;
  double benefit_million;
};

struct crf_cell {
  double rate;
  int years;
  double value;
};

struct capex_cell {
  double rate;
  int years;
  double benefit_million;
  double om_million;
  double capex_billion;
};

struct sensitivity {
  std::vector<benefit_row> benefits;  // 8 rows
  std::vector<crf_cell> crfs;         // 9 cells
  std::vector<capex_cell> capex;      // 18 cells
};

sensitivity sensitivity_tables();

std::string benefits_csv(sensitivity const&);
std::string crf_csv(sensitivity const&);
std::string capex_csv(sensitivity const&);

}  // namespace cfta::monetise
