#pragma once

#include "mchp/dual.hpp"

#include <optional>
#include <random>
#include <string>

namespace mchp::testing {

using R = Rational;

inline R q(const char* s) { return parse_decimal(s); }

inline UnitSpec affine_unit(std::string id, R g_min, R g_max, R a, R w) {
  UnitSpec u;
  u.id = std::move(id);
  u.g_min = g_min;
  u.g_max = g_max;
  u.variable_cost = VariableCostCurve::affine(a);
  u.no_load_cost = w;
  return u;
}

inline ConsumerSpec bid(std::string id, R price, R qty, R fixed = 0) {
  ConsumerSpec c;
  c.id = std::move(id);
  c.fixed_load = {fixed};
  c.elastic = {{{price, qty}}};
  return c;
}

inline ConsumerSpec load(std::string id, R fixed) {
  ConsumerSpec c;
  c.id = std::move(id);
  c.fixed_load = {fixed};
  c.elastic = {{}};
  return c;
}

struct RandomShape {
  int max_units = 3, max_consumers = 3;
  bool convex = false;  // w = 0 and g_min = 0 everywhere
};

// Small single-period, one-node market with affine data. Integer data keeps
// every price and payment exact.
inline Scenario random_market(std::mt19937& rng, const RandomShape& shape = {}) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Scenario s;
  s.name = "random";
  s.rounding = RoundingPolicy::Exact;
  int nu = pick(1, shape.max_units), nc = pick(1, shape.max_consumers);
  for (int i = 0; i < nu; ++i) {
    int g_min = shape.convex ? 0 : pick(0, 2) * 5;
    int g_max = g_min + pick(2, 6) * 5;
    int w = shape.convex ? 0 : pick(0, 4) * 25;
    s.units.push_back(affine_unit("u" + std::to_string(i + 1), g_min, g_max, pick(5, 40), w));
  }
  for (int j = 0; j < nc; ++j) {
    if (j == 0 && pick(0, 2) == 0) {
      s.consumers.push_back(load("c" + std::to_string(j + 1), pick(0, 4) * 5));
    } else {
      s.consumers.push_back(bid("c" + std::to_string(j + 1), pick(10, 70), pick(1, 6) * 5));
    }
  }
  return s;
}

// Draws until the market has a feasible dispatch.
inline Scenario feasible_market(std::mt19937& rng, const RandomShape& shape = {}) {
  while (true) {
    Scenario s = random_market(rng, shape);
    try {
      solve_primal(s);
      return s;
    } catch (const InfeasibleError&) {
    } catch (const ScenarioError&) {
    }
  }
}

// Corners and centre of every box in a set.
inline std::vector<StatePoint<R>> box_samples(const StatusOutputSet<R>& s) {
  std::vector<StatePoint<R>> out;
  for (auto& b : boxes_of(s)) {
    out.push_back({b.pattern, b.lo});
    out.push_back({b.pattern, b.hi});
    std::vector<R> mid;
    for (std::size_t t = 0; t < b.lo.size(); ++t) mid.push_back((b.lo[t] + b.hi[t]) / 2);
    out.push_back({b.pattern, mid});
  }
  return out;
}

// Exhaustive search over joint grid points with player i at v. Gives up (false)
// when the grid exceeds the budget.
inline bool grid_fixed_point_through(const Market<R>& m, int i, const StatePoint<R>& v, const R& step,
                                     double budget = 2e6) {
  int n = static_cast<int>(m.players.size());
  std::vector<std::vector<StatePoint<R>>> options(n);
  double size = 1;
  for (int k = 0; k < n; ++k) {
    if (k == i) {
      options[k] = {v};
      continue;
    }
    auto& p = m.players[k];
    for (std::uint32_t u = 0; u < p.pattern_count(); ++u) {
      auto [lo, hi] = p.domain(u, 0);
      for (R g = lo; g < hi; g += step) options[k].push_back({u, {g}});
      options[k].push_back({u, {hi}});
    }
    size *= static_cast<double>(options[k].size());
  }
  if (size > budget) return false;
  DispatchPoint<R> x;
  x.players.resize(n);
  x.flow = {0};
  std::function<bool(int, R)> walk = [&](int k, R balance) {
    if (k == n) return balance == 0 && opportunity_membership(m, x).member;
    for (auto& o : options[k]) {
      x.players[k] = o;
      if (walk(k + 1, balance + m.players[k].sign * o.q[0])) return true;
    }
    return false;
  };
  return walk(0, R(0));
}

// Looks for a fixed point whose projection on player i is v. Player i is
// pinned at v while everyone else is dispatched optimally under caps; when the
// joined point is beaten under its own caps, the others are re-capped at the
// better dispatch and the search repeats. Caps only shrink, so it stops.
inline bool has_fixed_point_through(const Market<R>& m, int i, const StatePoint<R>& v) {
  if (m.periods != 1) throw std::invalid_argument("single period only");
  Market<R> pinned = m;
  auto& p = pinned.players[i];
  if (p.producer()) {
    p.g_min = p.g_max = v.q[0];
    if (v.pattern) p.no_load -= R(1000000);  // keeps the unit on
  } else {
    p.fixed_load[0] += v.q[0] - m.players[i].domain(v.pattern, 0).first;
    p.elastic_cap[0] = 0;
  }
  Caps<R> caps;
  for (auto& o : m.players) {
    caps.pattern_cap.push_back(o.pattern_count() - 1);
    caps.q_cap.push_back({o.domain(o.pattern_count() - 1, 0).second});
  }
  caps.pattern_cap[i] = v.pattern;
  caps.q_cap[i] = v.q;
  for (int step = 0; step < 64; ++step) {
    DispatchPoint<R> x;
    try {
      x = solve_primal<R>(pinned, caps).optima.at(0);
    } catch (const InfeasibleError&) {
      return false;
    }
    x.players[i] = v;
    if (opportunity_membership(m, x).member) return true;
    auto better = solve_primal<R>(m, Caps<R>::at(x)).optima.at(0);
    bool shrank = false;
    for (std::size_t k = 0; k < m.players.size(); ++k) {
      if (static_cast<int>(k) == i) continue;
      shrank = shrank || better.players[k] != x.players[k];
      caps.pattern_cap[k] = better.players[k].pattern;
      caps.q_cap[k] = better.players[k].q;
    }
    if (!shrank) return false;
  }
  return false;
}

}  // namespace mchp::testing
