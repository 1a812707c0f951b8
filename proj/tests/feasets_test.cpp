#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace mchp;
using namespace mchp::testing;

namespace {

using Point = StatePoint<R>;

Market<R> market(int n) { return Market<R>::from(builtin_example(n)); }

Point pt(std::uint32_t pattern, std::vector<R> q) { return Point{pattern, std::move(q)}; }

bool in_original(const Player<R>& p, const Point& x) { return original_set(p).contains(x); }

}  // namespace

TEST_CASE("fixed-point membership") {
  auto m3 = market(3);
  auto x = solve_primal(m3).optima.at(0);
  CHECK(opportunity_membership(m3, x).member);

  auto low = x;
  low.players[0].q = {160};
  low.players[1].q = {40};
  CHECK_FALSE(opportunity_membership(m3, low).member);

  auto m7 = market(7);
  auto y = solve_primal(m7).optima.at(0);
  y.players[0] = pt(1, {300});
  y.players[1] = pt(0, {100});
  y.players[2] = pt(1, {200});
  CHECK_FALSE(opportunity_membership(m7, y).member);
}

TEST_CASE("projections under a fixed load") {
  auto m3 = market(3);
  CHECK(omega_bar_fixed_load(m3, 0).str() == "pattern 1: [80, 120]");
  CHECK(omega_bar_fixed_load(m3, 1).str() == "pattern 1: [80, 120]");
  CHECK(omega_bar_fixed_load(market(4), 0).str() == "pattern 1: [40, 120]");

  Scenario idle;
  idle.units = {affine_unit("u", 0, 50, 10, 40)};
  idle.consumers = {load("c", 0)};
  CHECK(omega_bar_fixed_load(Market<R>::from(idle), 0).str() == "pattern 0: {0}");

  CHECK_THROWS_AS(omega_bar_fixed_load(market(5), 0), std::invalid_argument);
}

TEST_CASE("projections with price-sensitive demand") {
  auto p = default_params(2);
  auto m2 = Market<double>::from(builtin_example(2, p));
  auto set = omega_bar_price_sensitive(m2, 0);
  double a = p.a.convert_to<double>(), w = p.w.convert_to<double>(), d = p.d_max.convert_to<double>();
  double g_min = d * (1 - std::sqrt(1 - 4 * w / (a * d))) / 2;
  auto boxes = boxes_of(set);
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0].pattern == 0u);
  CHECK(boxes[0].hi[0] == 0);
  CHECK(boxes[1].pattern == 1u);
  CHECK(std::fabs(boxes[1].lo[0] - g_min) < 1e-9);
  CHECK(std::fabs(boxes[1].hi[0] - d / 2) < 1e-9);

  CHECK(omega_bar_price_sensitive(market(1), 0).str() == "pattern 0: {0}");

  Scenario dear;
  dear.units = {affine_unit("u", 0, 50, 30, 0)};
  dear.consumers = {bid("c", 20, 40)};
  auto m = Market<R>::from(dear);
  auto both = omega_bar_price_sensitive(m, 0);
  CHECK(both.contains(pt(0, {0})));
  CHECK(both.contains(pt(1, {0})));
  CHECK(boxes_of(both).size() == 2);

  CHECK_THROWS_AS(omega_bar_price_sensitive(market(3), 0), std::invalid_argument);
}

TEST_CASE("consumer projections") {
  auto m5 = market(5);
  CHECK(omega_bar_consumer(m5, 1).str() == "pattern 0: {0} U [260/17, 100]");
  // (a - b2) g_max + w over b1 - b2
  CHECK(R((20 - 15) * 250 + 50, 100 - 15) == R(260, 17));
  CHECK(omega_bar_consumer(market(7), 1).str() == "pattern 0: {0} U {50}");
  CHECK(omega_bar_consumer(market(6), 2).str() == "pattern 0: {0} U [51, 80]");
}

TEST_CASE("cap sweep") {
  auto m9 = market(9);
  auto s9 = cap_sweep(m9, 0, R(1));
  REQUIRE(boxes_of(s9).size() == 1);
  CHECK(s9.contains(pt(3, {80, 30})));

  auto m8 = market(8);
  auto s8 = cap_sweep(m8, 1, R(1));
  CHECK(s8.contains(pt(0, {0})));
  CHECK_FALSE(in_original(m8.players[1], pt(1, {0})));
  CHECK(boxes_of(s8).size() == 1);

  auto m3 = market(3);
  auto coarse = cap_sweep(m3, 0, R(10));
  auto exact = omega_bar_fixed_load(m3, 0);
  for (int g = 0; g <= 160; g += 10)
    for (std::uint32_t u : {0u, 1u}) {
      Point x = pt(u, {R(g)});
      if (in_original(m3.players[0], x)) CHECK(coarse.contains(x) == exact.contains(x));
    }
  CHECK_THROWS(cap_sweep(m3, 0, R(0)));
}

TEST_CASE("sunk-cost states") {
  auto m3 = market(3);
  CHECK(psi_set(m3, 1).str() == "pattern 0: {0}");
  // the first unit has no no-load cost but a positive minimum output, so
  // (1, 0) is outside its feasible set
  CHECK(psi_set(m3, 0).str() == "pattern 0: {0}");
  CHECK(psi_set(m3, 2).str() == "pattern 0: {200}");
  auto four = psi_set(market(4), 0);
  CHECK(four.contains(pt(0, {0})));
  CHECK(four.contains(pt(1, {0})));
}

TEST_CASE("modified sets") {
  auto m3 = market(3);
  auto opp3 = build_opportunity_sets(m3);
  auto x2 = opp3.modified(m3, 1, Epsilon<R>::uniform(R(1, 2), 1));
  CHECK(x2.str() == "pattern 1: [80, 241/2] ; pattern 0: {0}");

  auto m1 = market(1);
  auto x1 = build_opportunity_sets(m1).modified(m1, 0, Epsilon<R>::plus_zero());
  CHECK(x1.limit_closure);
  for (auto& b : boxes_of(x1)) CHECK(b.hi[0] == 0);

  auto m9 = market(9);
  auto y = build_opportunity_sets(m9).modified(m9, 1, Epsilon<R>::uniform(R(1), 2));
  CHECK(y.contains(pt(0, {80, 10})));
  CHECK(y.contains(pt(0, {80, 29})));
  CHECK(y.contains(pt(0, {80, 31})));
  CHECK_FALSE(y.contains(pt(0, {80, 20})));
  CHECK_FALSE(y.contains(pt(0, {79, 30})));
}

TEST_CASE("projections are made of fixed points") {
  for (int n : {1, 3, 4, 5, 6, 7}) {
    auto m = market(n);
    auto opp = build_opportunity_sets(m);
    for (int i = 0; i < static_cast<int>(m.players.size()); ++i)
      for (auto& v : box_samples(opp.omega_bar[i])) {
        INFO("example " << n << " player " << m.players[i].id << " q " << v.q[0]);
        CHECK(has_fixed_point_through(m, i, v));
      }
  }
}

TEST_CASE("containment chain and primal preservation") {
  std::mt19937 rng(31);
  for (int k = 0; k < 40; ++k) {
    auto m = Market<R>::from(feasible_market(rng));
    auto opp = build_opportunity_sets(m, R(5));
    auto primal = solve_primal(m);
    for (int i = 0; i < static_cast<int>(m.players.size()); ++i) {
      auto small = opp.modified(m, i, Epsilon<R>::uniform(R(1), 1));
      auto large = opp.modified(m, i, Epsilon<R>::uniform(R(3), 1));
      for (auto& x : box_samples(opp.psi[i])) CHECK(small.contains(x));
      for (auto& x : box_samples(small)) {
        CHECK(large.contains(x));
        CHECK(in_original(m.players[i], x));
      }
      for (auto& x : box_samples(large)) CHECK(in_original(m.players[i], x));
      for (auto& opt : primal.optima) CHECK(small.contains(opt.players[i]));
    }
  }
}

TEST_CASE("exact constructions agree with the sweep") {
  for (int n : {1, 3, 4, 6}) {
    auto m = market(n);
    auto opp = build_opportunity_sets(m);
    auto swept = cap_sweep_all(m, R(1));
    for (int i = 0; i < static_cast<int>(m.players.size()); ++i) {
      if (opp.method[i] == SetMethod::CapSweep) continue;
      auto& p = m.players[i];
      for (std::uint32_t u = 0; u < p.pattern_count(); ++u) {
        auto [lo, hi] = p.domain(u, 0);
        for (R g = lo; g <= hi; g += 1) {
          INFO("example " << n << " player " << p.id << " pattern " << u << " q " << g);
          CHECK(opp.omega_bar[i].contains(pt(u, {g})) == swept[i].contains(pt(u, {g})));
        }
      }
    }
  }
}
