#pragma once

// Brute-force cross-checks. Everything here works on plain grids in double
// precision and evaluates costs straight from the scenario description, so a
// bug in the exact engine cannot hide behind a shared helper.

#include "mchp/dual.hpp"

#include <stdexcept>
#include <vector>

namespace mchp::oracle {

struct GridError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PriceAxis {
  double lo = 0, hi = 0, step = 1;
};

struct GridSpec {
  double quantity_step = 1;
  std::vector<PriceAxis> prices;  // one axis per price index
  double max_points = 1e8;

  void check() const;
};

// Best grid dispatch; one player per scenario is left free to close the
// balance so that the grid never has to hit it exactly.
PrimalSolution<double> brute_primal(const Scenario& s, const GridSpec& grid);

struct ScanPoint {
  std::vector<double> price;
  double value = 0;
};

struct DualScan {
  double best_value = 0;
  std::vector<double> best_price;
  std::vector<ScanPoint> near;  // grid prices within `tolerance` of the best value
  double tolerance = 0;

  // True when some near point lies within `radius` (max norm) of p.
  bool covers(const std::vector<double>& p, double radius) const;
  // Per-coordinate extent of the near points.
  std::vector<std::pair<double, double>> extent() const;
};

// Dual objective over a price grid with every profit maximum found by
// sampling the pricing sets on the quantity grid.
DualScan grid_dual_scan(const Scenario& s, const PricingSets<double>& sets, const GridSpec& grid,
                        double tolerance);

// Dual objective at one price, same sampling.
double sampled_dual(const Scenario& s, const PricingSets<double>& sets, const std::vector<double>& price,
                    double quantity_step);

}  // namespace mchp::oracle
