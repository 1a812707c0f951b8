#include "support.hpp"

#include <doctest.h>

using namespace mchp;
using namespace mchp::testing;

namespace {

template <class T = R>
Player<T> player_of(const UnitSpec& u) {
  Scenario s;
  s.units = {u};
  return Market<T>::from(s).players[0];
}

UnitSpec quadratic_unit(R g_min, R g_max, R lin, R quad, R w) {
  UnitSpec u = affine_unit("q", g_min, g_max, 0, w);
  u.variable_cost.kind = CurveKind::Quadratic;
  u.variable_cost.linear = lin;
  u.variable_cost.quadratic = quad;
  return u;
}

UnitSpec piecewise_unit(R g_max, std::vector<std::pair<R, R>> pieces, R w) {
  UnitSpec u = affine_unit("pw", 0, g_max, 0, w);
  u.variable_cost.kind = CurveKind::Piecewise;
  u.variable_cost.pieces = std::move(pieces);
  return u;
}

// Lowest g on a fine grid with w + c(g) <= g * c'(g+), or g_max.
double scan_economic_min(double g_min, double g_max, double lin, double quad, double w) {
  for (double g = g_min; g < g_max; g += 1e-4)
    if (w + lin * g + quad * g * g <= g * (lin + 2 * quad * g) + 1e-9) return g;
  return g_max;
}

}  // namespace

TEST_CASE("interval unions stay sorted and merged") {
  IntervalUnion<R> u;
  u.add(Interval<R>::closed(5, 7));
  u.add(Interval<R>::point(0));
  u.add(Interval<R>::closed(6, 9));
  CHECK(u.size() == 2);
  CHECK(u.str() == "{0} U [5, 9]");
  CHECK(u.contains(R(8)));
  CHECK_FALSE(u.contains(R(3)));

  Interval<R> open{R(1), R(2)};
  open.lo_open = true;
  IntervalUnion<R> h{open};
  CHECK_FALSE(h.contains(R(1)));
  CHECK(h.has_open_end());
  CHECK(h.closure().contains(R(1)));

  Interval<R> ray{R(12), R(12)};
  ray.hi_inf = true;
  CHECK(IntervalUnion<R>{ray}.str() == "[12, +inf)");
  CHECK(IntervalUnion<R>::closed(0, 10).intersect(R(3), R(4)).str() == "[3, 4]");
}

TEST_CASE("economic minimum output") {
  CHECK(economic_min_output(affine_unit("u2", 80, 160, 30, 15)) == 160);
  CHECK(economic_min_output(affine_unit("c", 0, 100, 25, 0)) == 0);
  CHECK(economic_min_output(affine_unit("c", 30, 100, 25, 0)) == 30);
  // c(g) = g^2 on [0, 10] with w = 4
  auto quad = quadratic_unit(0, 10, 0, 1, 4);
  CHECK(economic_min_output(quad) == 2);
  CHECK(std::fabs(scan_economic_min(0, 10, 0, 1, 4) - 2.0) < 1e-3);
  // piecewise: slopes 10 then 30 from 20 MWh, w = 100
  auto pw = piecewise_unit(50, {{0, 10}, {20, 30}}, 100);
  // at g = 20 the right slope 30 gives 600 >= 100 + 200
  CHECK(economic_min_output(pw) == 20);
}

TEST_CASE("convex hull of cost") {
  auto h = convex_hull_cost(player_of(affine_unit("p", 250, 250, 20, 50)));
  CHECK(h.has_ray);
  CHECK(h.ray_slope == q("20.2"));
  CHECK(h.g_star == 250);
  CHECK(h.value(R(250)) == 5050);

  auto u2 = convex_hull_cost(player_of(affine_unit("u2", 80, 160, 30, 15)));
  CHECK(u2.ray_slope == R(963, 32));
  CHECK(u2.g_star == 160);
  CHECK(u2.value(R(160)) == 4815);

  auto convex = convex_hull_cost(player_of(affine_unit("c", 0, 100, 25, 0)));
  CHECK_FALSE(convex.has_ray);
  CHECK(convex.value(R(40)) == 1000);
}

TEST_CASE("supply correspondence around the average-cost threshold") {
  ExampleParams p = default_params(1);
  auto unit = player_of(affine_unit("p", 0, p.g_max, p.a, p.w));
  R threshold = p.a + p.w / p.g_max;
  CHECK(supply_correspondence(unit, threshold).str() == "{0} U {100}");
  CHECK(supply_correspondence(unit, threshold - q("0.01")).str() == "{0}");
  CHECK(supply_correspondence(unit, threshold + 1).str() == "{100}");
}

TEST_CASE("profit maximum over sets") {
  auto m = Market<R>::from(builtin_example(3));
  const auto& u1 = m.players[0];
  auto full = profit_max(u1, original_set(u1), {q("30.09")});
  CHECK(full.value == q("1614.40"));
  REQUIRE(full.extreme.size() == 1);
  CHECK(full.extreme[0].q[0] == 160);

  StatusOutputSet<R> reduced;
  reduced.add(Profile<R>{0, {IntervalUnion<R>::point(0)}, std::nullopt});
  reduced.add(Profile<R>{1, {IntervalUnion<R>::closed(80, 120)}, std::nullopt});
  auto mod = profit_max(u1, reduced, {q("30.13")});
  CHECK(mod.value == q("1215.60"));
  CHECK(mod.extreme[0].q[0] == 120);

  auto low = profit_max(u1, original_set(u1), {R(5)});
  CHECK(low.value == 0);
  CHECK(low.extreme[0].pattern == 0u);
}

TEST_CASE("convex minimisation in one dimension") {
  std::function<R(const R&)> v = [](const R& x) { return x < 3 ? R(3 - x) : R(x - 3); };
  auto r = minimize_convex_1d(v, {R(0), R(3), R(5)});
  CHECK(r.lo == 3);
  CHECK(r.hi == 3);
  std::function<R(const R&)> hinge = [](const R& x) { return x < 12 ? R(12 - x) : R(0); };
  auto ray = minimize_convex_1d(hinge, {R(12)});
  CHECK(ray.lo == 12);
  CHECK(ray.hi_inf);
  CHECK_FALSE(ray.lo_inf);
}

TEST_CASE("conjugacy of hull and profit over the original set") {
  std::mt19937 rng(11);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int k = 0; k < 200; ++k) {
    int g_min = pick(0, 40), g_max = g_min + pick(1, 60);
    auto unit = player_of(affine_unit("r", g_min, g_max, pick(1, 50), pick(0, 300)));
    auto hull = convex_hull_cost(unit);
    auto X = original_set(unit);
    for (int j = 0; j < 50; ++j) {
      R p(pick(0, 8000), 100);
      CHECK(profit_max(unit, X, {p}).value == hull.conjugate(p));
    }
  }
}

TEST_CASE("supply never falls strictly between zero and the economic minimum") {
  std::mt19937 rng(12);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int k = 0; k < 150; ++k) {
    UnitSpec spec;
    switch (k % 3) {
      case 0: spec = affine_unit("a", pick(0, 20), 0, pick(1, 40), pick(0, 200)); break;
      case 1: spec = piecewise_unit(0, {{0, pick(1, 20)}, {pick(5, 9), pick(21, 60)}}, pick(0, 200)); break;
      default: {
        int r = pick(0, 20);
        spec = quadratic_unit(0, 0, pick(0, 20), 1, R(r * r));
        break;
      }
    }
    spec.g_max = spec.g_min + pick(10, 80);
    auto unit = player_of(spec);
    R gec = economic_min_output(unit);
    std::optional<R> prev_lo, prev_hi;
    for (int j = 0; j <= 100; ++j) {
      R p(j, 1);
      auto g = supply_correspondence(unit, p);
      REQUIRE_FALSE(g.empty());
      for (auto& part : g.parts()) {
        bool inside = R(0) < part.hi && part.lo < gec;
        CHECK_FALSE(inside);
      }
      R lo = g.front().lo, hi = g.back().hi;
      if (prev_lo) {
        CHECK(*prev_lo <= lo);
        CHECK(*prev_hi <= hi);
      }
      prev_lo = lo;
      prev_hi = hi;
    }
  }
}

TEST_CASE("argmax selections match one-sided derivatives of profit") {
  auto unit = player_of<double>(quadratic_unit(0, 50, 2, q("0.5"), 30));
  auto X = original_set(unit);
  for (double p = 5; p < 60; p += 3.7) {
    double h = 1e-6;
    auto at = profit_max(unit, X, {p});
    double right = (profit_max(unit, X, {p + h}).value - at.value) / h;
    double left = (at.value - profit_max(unit, X, {p - h}).value) / h;
    double lo = 1e300, hi = -1e300;
    for (auto& e : at.extreme) {
      lo = std::min(lo, e.q[0]);
      hi = std::max(hi, e.q[0]);
    }
    CHECK(std::fabs(right - hi) < 1e-4);
    CHECK(std::fabs(left - lo) < 1e-4);
  }
}
