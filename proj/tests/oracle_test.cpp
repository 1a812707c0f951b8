#include "support.hpp"

#include "mchp/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace mchp;
using namespace mchp::testing;

namespace {

using oracle::GridSpec;
using oracle::PriceAxis;

GridSpec prices(std::vector<PriceAxis> axes, double quantity_step = 1) {
  GridSpec g;
  g.quantity_step = quantity_step;
  g.prices = std::move(axes);
  return g;
}

struct Sets {
  Market<double> m;
  PricingSets<double> chp, mod;
};

Sets double_sets(const Scenario& s, const Epsilon<double>& eps = Epsilon<double>::plus_zero()) {
  auto m = Market<double>::from(s);
  auto opp = build_opportunity_sets(m);
  return {m, original_sets(m), modified_sets(m, opp, eps)};
}

}  // namespace

TEST_CASE("brute-force dispatch on the builtin examples") {
  auto b3 = oracle::brute_primal(builtin_example(3), {});
  CHECK(b3.value == doctest::Approx(-4815));
  CHECK(b3.optima.at(0).players[0].q[0] == 120);
  CHECK(b3.optima.at(0).players[1].q[0] == 80);
  CHECK(oracle::brute_primal(builtin_example(1), {}).value == 0);
  CHECK(oracle::brute_primal(builtin_example(5), {}).value == doctest::Approx(7200));

  for (int n : {1, 3, 4, 5, 6, 7, 8, 9}) {
    INFO("example " << n);
    double exact = solve_primal(builtin_example(n)).value.convert_to<double>();
    CHECK(oracle::brute_primal(builtin_example(n), {}).value == doctest::Approx(exact));
  }
}

TEST_CASE("grid limits are enforced") {
  GridSpec bad;
  bad.quantity_step = 0;
  CHECK_THROWS_AS(bad.check(), oracle::GridError);
  CHECK_THROWS_AS(prices({{5, 1, 1}}).check(), oracle::GridError);
  GridSpec tiny;
  tiny.quantity_step = 1e-4;
  tiny.max_points = 1e3;
  CHECK_THROWS_AS(oracle::brute_primal(builtin_example(3), tiny), oracle::GridError);
}

TEST_CASE("price scans locate the optimal sets") {
  auto e3 = double_sets(builtin_example(3));
  auto scan3 = oracle::grid_dual_scan(builtin_example(3), e3.chp, prices({{29, 31, 0.001}}), 1e-6);
  auto [lo3, hi3] = scan3.extent().at(0);
  CHECK(lo3 >= 30.09);
  CHECK(hi3 <= 30.095);
  CHECK(scan3.covers({30.09375}, 0.001));

  auto e1 = double_sets(builtin_example(1), Epsilon<double>::uniform(1e-3, 1));
  auto scan1 = oracle::grid_dual_scan(builtin_example(1), e1.mod, prices({{0, 36, 0.5}}), 1e-9);
  auto [lo1, hi1] = scan1.extent().at(0);
  CHECK(lo1 == 12);
  CHECK(hi1 == 36);

  auto e9 = double_sets(builtin_example(9));
  auto scan9 = oracle::grid_dual_scan(builtin_example(9), e9.mod, prices({{20, 40, 0.01}, {5, 15, 0.01}}), 1e-6);
  CHECK(scan9.best_value == doctest::Approx(-2160));
  CHECK(scan9.covers({32.67, 10}, 0.02));
  CHECK(scan9.covers({25.75, 10}, 0.02));
}

TEST_CASE("sampled dual matches the exact dual at the examples' optimal prices") {
  for (int n : {3, 4, 5, 6, 7, 8, 9}) {
    INFO("example " << n);
    auto s = builtin_example(n);
    auto m = Market<R>::from(s);
    auto exact_sets = original_sets(m);
    auto r = solve_dual(m, exact_sets);
    std::vector<double> p;
    for (auto& x : r.canonical) p.push_back(x.convert_to<double>());
    auto e = double_sets(s);
    CHECK(oracle::sampled_dual(s, e.chp, p, 1) == doctest::Approx(r.value.convert_to<double>()));
  }
}

TEST_CASE("oracle output is deterministic") {
  auto s = builtin_example(6);
  auto e = double_sets(s);
  auto g = prices({{40, 50, 0.01}});
  auto a = oracle::grid_dual_scan(s, e.chp, g, 1e-6), b = oracle::grid_dual_scan(s, e.chp, g, 1e-6);
  CHECK(a.best_value == b.best_value);
  CHECK(a.best_price == b.best_price);
  CHECK(a.near.size() == b.near.size());
  auto x = oracle::brute_primal(s, {}), y = oracle::brute_primal(s, {});
  CHECK(x.value == y.value);
  CHECK(x.optima.at(0).players[0].q == y.optima.at(0).players[0].q);
}
