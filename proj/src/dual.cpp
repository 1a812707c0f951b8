#include "mchp/dual.hpp"

#include "mchp/lp.hpp"

namespace mchp {

template <class T>
PricingSets<T> original_sets(const Market<T>& m) {
  PricingSets<T> s{"original", {}, {}};
  for (auto& p : m.players) s.sets.push_back(original_set(p));
  return s;
}

template <class T>
PricingSets<T> modified_sets(const Market<T>& m, const OpportunitySets<T>& opp, const Epsilon<T>& eps) {
  PricingSets<T> s{"modified(" + eps.str() + ")", {}, {}};
  for (int i = 0; i < static_cast<int>(m.players.size()); ++i) {
    s.sets.push_back(opp.modified(m, i, eps));
    if (eps.limit) s.inflatable.push_back(modified_set(m.players[i], opp.omega_bar[i], StatusOutputSet<T>{}, eps));
  }
  return s;
}

template <class T>
T dual_value(const Market<T>& m, const PricingSets<T>& s, const std::vector<T>& p) {
  T v{0};
  for (std::size_t i = 0; i < m.players.size(); ++i)
    v += profit_max(m.players[i], s.sets[i], m.player_prices(m.players[i], p)).value;
  if (m.nodes == 2)
    for (int t = 0; t < m.periods; ++t)
      v += m.line_capacity * Num<T>::abs(p[m.price_index(1, t)] - p[m.price_index(0, t)]);
  return v;
}

namespace {

// Single-period piece: the box's quantity window after any ramp from the start.
template <class T>
std::pair<T, T> window(const Box<T>& b) {
  T lo = b.lo[0], hi = b.hi[0];
  if (b.ramp) {
    if (lo < b.ramp->start - b.ramp->limit) lo = b.ramp->start - b.ramp->limit;
    if (hi > b.ramp->start + b.ramp->limit) hi = b.ramp->start + b.ramp->limit;
  }
  return {lo, hi};
}

template <class T>
T piece_value(const Player<T>& p, const Box<T>& b, const T& price) {
  auto [lo, hi] = window(b);
  T off = p.offset(b.pattern, 0);
  T lam = T(p.sign) * price;
  auto [x, y] = p.curve[0].best_response(lam, lo - off, hi - off);
  (void)y;
  return lam * x - p.curve[0].value(x) + lam * off - p.fixed_cost(b.pattern);
}

template <class T>
std::vector<T> piece_kinks(const Player<T>& p, const Box<T>& b) {
  auto [lo, hi] = window(b);
  T off = p.offset(b.pattern, 0);
  std::vector<T> out;
  for (auto& k : p.curve[0].response_kinks(lo - off, hi - off)) out.push_back(T(p.sign) * k);
  return out;
}

// Zeros of a function that is quadratic between the given knots and affine outside.
template <class T>
void roots_of(const std::function<T(const T&)>& g, std::vector<T> knots, std::vector<T>& out) {
  sort_unique(knots);
  if (knots.empty()) knots.push_back(T(0));
  auto linear_root = [&](const T& a, const T& b) -> std::optional<T> {
    T ga = g(a), gb = g(b);
    if (Num<T>::eq(ga, gb)) return std::nullopt;
    return a - ga * (b - a) / (gb - ga);
  };
  if (auto r = linear_root(knots.front() - 1, knots.front()); r && *r <= knots.front()) out.push_back(*r);
  if (auto r = linear_root(knots.back(), knots.back() + 1); r && *r >= knots.back()) out.push_back(*r);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    T a = knots[i], b = knots[i + 1];
    T ga = g(a), gb = g(b), gm = g((a + b) / 2);
    T A = 2 * (ga + gb - 2 * gm), B = gb - ga - A;
    std::vector<T> ts;
    if (Num<T>::is_zero(A)) {
      if (!Num<T>::is_zero(B)) ts.push_back(-ga / B);
    } else {
      T disc = B * B - 4 * A * ga;
      if (Num<T>::le(T(0), disc)) {
        if (disc < 0) disc = T(0);
        T s = *Num<T>::sqrt(disc);
        ts.push_back((-B - s) / (2 * A));
        ts.push_back((-B + s) / (2 * A));
      }
    }
    for (auto& t : ts)
      if (Num<T>::le(T(0), t) && Num<T>::le(t, T(1))) out.push_back(a + t * (b - a));
  }
}

// Growth rate of a player's profit maximum as its opportunity boxes are
// inflated by epsilon, at the given price.
template <class T>
T inflation_rate(const Player<T>& p, const StatusOutputSet<T>& boxes, const T& price, const T& best) {
  T rate{0};
  T lam = T(p.sign) * price;
  for (const Box<T>& b : boxes_of(boxes)) {
    if (!Num<T>::eq(piece_value(p, b, price), best)) continue;
    auto [lo, hi] = window(b);
    auto [dlo, dhi] = p.domain(b.pattern, 0);
    if (b.ramp) {
      dlo = std::max(dlo, b.ramp->start - b.ramp->limit);
      dhi = std::min(dhi, b.ramp->start + b.ramp->limit);
    }
    T off = p.offset(b.pattern, 0);
    auto [xa, xb] = p.curve[0].best_response(lam, lo - off, hi - off);
    T r{0};
    if (xb == hi - off && hi < dhi) r = std::max(r, lam - p.curve[0].right_slope(xb));
    if (xa == lo - off && dlo < lo) r = std::max(r, p.curve[0].left_slope(xa) - lam);
    rate = std::max(rate, r);
  }
  return rate;
}

// Among the optimal prices of the limit dual, keeps those where the dual
// grows slowest under inflation: the limit of the optimal sets as epsilon
// goes to +0.
template <class T>
IntervalUnion<T> limit_refine(const Market<T>& m, const PricingSets<T>& s, const Interval<T>& opt,
                              std::vector<T> cand) {
  auto rate = [&](const T& x) {
    T total{0};
    std::vector<T> price{x};
    for (std::size_t i = 0; i < m.players.size(); ++i) {
      const auto& p = m.players[i];
      T best = profit_max(p, s.sets[i], m.player_prices(p, price)).value;
      total += inflation_rate(p, s.inflatable[i], x, best);
    }
    return total;
  };
  for (std::size_t i = 0; i < m.players.size(); ++i) {
    const auto& p = m.players[i];
    for (std::uint32_t pat = 0; pat < p.pattern_count(); ++pat) {
      auto [dlo, dhi] = p.domain(pat, 0);
      Box<T> b{pat, {dlo}, {dhi}, std::nullopt};
      for (auto& k : piece_kinks(p, b)) cand.push_back(k);
    }
  }
  std::vector<T> pts;
  for (auto& c : cand)
    if (opt.contains(c)) pts.push_back(c);
  if (!opt.lo_inf) pts.push_back(opt.lo);
  if (!opt.hi_inf) pts.push_back(opt.hi);
  sort_unique(pts);
  if (pts.empty()) pts.push_back(T(0));
  // Rays are affine beyond the last candidate; two probes settle them.
  std::vector<T> probe = pts;
  if (opt.lo_inf) probe.insert(probe.begin(), {pts.front() - 2, pts.front() - 1});
  if (opt.hi_inf) {
    probe.push_back(pts.back() + 1);
    probe.push_back(pts.back() + 2);
  }
  std::vector<T> at;
  for (auto& x : probe) at.push_back(rate(x));
  std::vector<T> mid;
  for (std::size_t k = 0; k + 1 < probe.size(); ++k) mid.push_back(rate((probe[k] + probe[k + 1]) / 2));
  T lowest = *std::min_element(at.begin(), at.end());
  for (auto& v : mid) lowest = std::min(lowest, v);

  IntervalUnion<T> out;
  std::size_t first = opt.lo_inf ? 2 : 0, last = probe.size() - (opt.hi_inf ? 3 : 1);
  for (std::size_t k = first; k <= last; ++k) {
    bool here = Num<T>::eq(at[k], lowest);
    if (here) out.add(Interval<T>::point(probe[k]));
    if (k < last && Num<T>::eq(mid[k], lowest)) {
      Interval<T> seg{probe[k], probe[k + 1]};
      seg.lo_open = !here;
      seg.hi_open = !Num<T>::eq(at[k + 1], lowest);
      out.add(seg);
    }
  }
  if (opt.lo_inf && Num<T>::eq(at[0], lowest) && Num<T>::eq(at[1], lowest) && Num<T>::eq(mid[1], lowest)) {
    Interval<T> ray{probe[first], probe[first]};
    ray.lo_inf = true;
    ray.hi_open = !Num<T>::eq(at[first], lowest);
    out.add(ray);
  }
  if (opt.hi_inf && Num<T>::eq(at[last + 1], lowest) && Num<T>::eq(at[last + 2], lowest) &&
      Num<T>::eq(mid[last], lowest)) {
    Interval<T> ray{probe[last], probe[last]};
    ray.hi_inf = true;
    ray.lo_open = !Num<T>::eq(at[last], lowest);
    out.add(ray);
  }
  if (out.empty()) out.add(opt);  // minimum only approached at a discontinuity
  return out;
}

template <class T>
PriceSetReport<T> solve_dual_1d(const Market<T>& m, const PricingSets<T>& s) {
  std::vector<T> cand;
  for (std::size_t i = 0; i < m.players.size(); ++i) {
    const auto& p = m.players[i];
    auto boxes = boxes_of(s.sets[i]);
    std::vector<std::vector<T>> kinks;
    for (auto& b : boxes) {
      kinks.push_back(piece_kinks(p, b));
      for (auto& k : kinks.back()) cand.push_back(k);
    }
    for (std::size_t a = 0; a < boxes.size(); ++a) {
      for (std::size_t b = a + 1; b < boxes.size(); ++b) {
        auto knots = kinks[a];
        for (auto& k : kinks[b]) knots.push_back(k);
        roots_of<T>([&](const T& x) { return piece_value(p, boxes[a], x) - piece_value(p, boxes[b], x); }, knots,
                    cand);
      }
    }
  }
  auto r = minimize_convex_1d<T>([&](const T& x) { return dual_value(m, s, std::vector<T>{x}); }, cand);
  if (r.unbounded) throw std::runtime_error("dual objective is unbounded below");
  PriceSetReport<T> rep;
  rep.dim = 1;
  rep.value = r.value;
  Interval<T> iv{r.lo, r.hi};
  iv.lo_inf = r.lo_inf;
  iv.hi_inf = r.hi_inf;
  IntervalUnion<T> set{iv};
  if (!s.inflatable.empty()) set = limit_refine(m, s, iv, cand);
  rep.interval = set;
  Interval<T> hull = set.front();
  hull.hi = set.back().hi;
  hull.hi_inf = set.back().hi_inf;
  hull.hi_open = set.back().hi_open;
  rep.bounds = {hull};
  rep.canonical = {hull.lo_inf ? (hull.hi_inf ? T(0) : hull.hi) : hull.lo};
  return rep;
}

template <class T>
struct DualLp {
  LinearProgram<T> lp{0};
  std::vector<int> price_var;
  std::vector<int> z;
};

template <class T>
DualLp<T> build_dual_lp(const Market<T>& m, const PricingSets<T>& s) {
  DualLp<T> d;
  int dim = m.dim();
  for (int k = 0; k < dim; ++k) d.price_var.push_back(d.lp.add_var(true));
  for (std::size_t i = 0; i < m.players.size(); ++i) {
    const auto& p = m.players[i];
    int z = d.lp.add_var(true, T(1));
    d.z.push_back(z);
    for (auto& b : boxes_of(s.sets[i])) {
      for (auto& v : box_vertices(p, b)) {
        std::vector<std::pair<int, T>> row{{z, T(1)}};
        for (int t = 0; t < m.periods; ++t)
          if (!Num<T>::is_zero(v.point.q[t]))
            row.emplace_back(d.price_var[m.price_index(p.node, t)], T(-p.sign) * v.point.q[t]);
        d.lp.add_row(row, Sense::Ge, v.value);
      }
    }
  }
  if (m.nodes == 2) {
    for (int t = 0; t < m.periods; ++t) {
      int z = d.lp.add_var(true, T(1));
      d.z.push_back(z);
      int p1 = d.price_var[m.price_index(0, t)], p2 = d.price_var[m.price_index(1, t)];
      for (int sg : {1, -1})
        d.lp.add_row({{z, T(1)}, {p2, T(-sg) * m.line_capacity}, {p1, T(sg) * m.line_capacity}}, Sense::Ge, T(0));
    }
  }
  return d;
}

template <class T>
T slack_of(const T& v) {
  if constexpr (Num<T>::exact) {
    return T(0);
  } else {
    return 1e-9 * std::max(1.0, std::fabs(v));
  }
}

template <class T>
PriceSetReport<T> solve_dual_lp(const Market<T>& m, const PricingSets<T>& s) {
  auto d = build_dual_lp(m, s);
  auto main = solve_lp(d.lp);
  if (main.status == LpStatus::Unbounded) throw std::runtime_error("dual objective is unbounded below");
  if (main.status != LpStatus::Optimal) throw std::runtime_error("dual program is infeasible");
  int dim = m.dim();
  PriceSetReport<T> rep;
  rep.dim = dim;
  rep.value = main.value;

  auto optimal_face = [&]() {
    LinearProgram<T> lp = d.lp;
    std::fill(lp.cost.begin(), lp.cost.end(), T(0));
    std::vector<std::pair<int, T>> sum;
    for (int z : d.z) sum.emplace_back(z, T(1));
    lp.add_row(sum, Sense::Le, main.value + slack_of(main.value));
    return lp;
  };

  for (int k = 0; k < dim; ++k) {
    Interval<T> iv;
    for (int sg : {1, -1}) {
      auto lp = optimal_face();
      lp.cost[d.price_var[k]] = T(sg);
      auto r = solve_lp(lp);
      bool inf = r.status != LpStatus::Optimal;
      if (sg > 0) {
        iv.lo_inf = inf;
        if (!inf) iv.lo = r.x[d.price_var[k]];
      } else {
        iv.hi_inf = inf;
        if (!inf) iv.hi = r.x[d.price_var[k]];
      }
    }
    rep.bounds.push_back(iv);
  }

  auto lex = optimal_face();
  for (int k = 0; k < dim; ++k) {
    auto lp = lex;
    lp.cost[d.price_var[k]] = T(1);
    auto r = solve_lp(lp);
    T value;
    if (r.status == LpStatus::Optimal) {
      value = r.x[d.price_var[k]];
    } else {
      lp.cost[d.price_var[k]] = T(0);
      value = solve_lp(lp).x[d.price_var[k]];
    }
    rep.canonical.push_back(value);
    lex.add_row({{d.price_var[k], T(1)}}, Sense::Eq, value);
  }
  return rep;
}

}  // namespace

template <class T>
Certificate<T> price_membership(const Market<T>& m, const PricingSets<T>& s, const std::vector<T>& p) {
  LinearProgram<T> lp(0);
  std::vector<std::vector<std::pair<int, StatePoint<T>>>> terms(m.players.size());
  std::vector<std::vector<std::pair<int, T>>> balance(m.dim());
  for (std::size_t i = 0; i < m.players.size(); ++i) {
    const auto& pl = m.players[i];
    auto res = profit_max(pl, s.sets[i], m.player_prices(pl, p));
    std::vector<std::pair<int, T>> convex;
    for (auto& e : res.extreme) {
      int v = lp.add_var();
      convex.emplace_back(v, T(1));
      terms[i].emplace_back(v, e);
      for (int t = 0; t < m.periods; ++t) balance[m.price_index(pl.node, t)].emplace_back(v, T(pl.sign) * e.q[t]);
    }
    lp.add_row(convex, Sense::Eq, T(1));
  }
  std::vector<int> flow(m.periods, -1);
  if (m.nodes == 2) {
    for (int t = 0; t < m.periods; ++t) {
      flow[t] = lp.add_var(true);
      T dp = p[m.price_index(1, t)] - p[m.price_index(0, t)];
      if (Num<T>::is_zero(dp)) {
        lp.add_row({{flow[t], T(1)}}, Sense::Le, m.line_capacity);
        lp.add_row({{flow[t], T(1)}}, Sense::Ge, -m.line_capacity);
      } else {
        lp.add_row({{flow[t], T(1)}}, Sense::Eq, dp > 0 ? m.line_capacity : T(-m.line_capacity));
      }
      balance[m.price_index(0, t)].emplace_back(flow[t], T(-1));
      balance[m.price_index(1, t)].emplace_back(flow[t], T(1));
    }
  }
  for (auto& row : balance) lp.add_row(row, Sense::Eq, T(0));
  auto r = solve_lp(lp);
  Certificate<T> c;
  if (r.status != LpStatus::Optimal) return c;
  c.member = true;
  for (auto& player : terms) {
    c.mixture.emplace_back();
    for (auto& [v, pt] : player)
      if (!Num<T>::is_zero(r.x[v])) c.mixture.back().push_back({r.x[v], pt});
  }
  c.flow.assign(m.periods, T(0));
  for (int t = 0; t < m.periods; ++t)
    if (flow[t] >= 0) c.flow[t] = r.x[flow[t]];
  return c;
}

template <class T>
PriceSetReport<T> solve_dual(const Market<T>& m, const PricingSets<T>& s) {
  if (m.dim() > 4) throw std::invalid_argument("dual dimension above 4 is not supported");
  auto rep = m.dim() == 1 ? solve_dual_1d(m, s) : solve_dual_lp(m, s);
  rep.certificate = price_membership(m, s, rep.canonical);
  return rep;
}

namespace {

template <class T>
bool lex_less(const StatePoint<T>& a, const StatePoint<T>& b) {
  for (std::size_t t = 0; t < a.q.size(); ++t)
    if (a.q[t] != b.q[t]) return a.q[t] < b.q[t];
  return a.pattern < b.pattern;
}

}  // namespace

template <class T>
UpliftReport<T> uplift_report(const Market<T>& m, const PricingSets<T>& s, const std::vector<T>& p,
                              const PrimalSolution<T>& primal, RoundingPolicy rounding) {
  UpliftReport<T> rep;
  rep.price = p;
  rep.rounding = rounding;
  rep.paid_price = p;
  if (rounding == RoundingPolicy::Cent)
    for (auto& x : rep.paid_price) x = round_price(x);
  const DispatchPoint<T>& x = primal.optima.at(0);

  for (std::size_t i = 0; i < m.players.size(); ++i) {
    const auto& pl = m.players[i];
    auto exact = m.player_prices(pl, p);
    auto paid = m.player_prices(pl, rep.paid_price);
    auto res = profit_max(pl, s.sets[i], exact);
    UpliftRow<T> row{pl.id};
    row.pi_star = profit_at(pl, x.players[i], paid);
    if (Num<T>::eq(profit_at(pl, x.players[i], exact), res.value)) {
      row.pi_plus = row.pi_star;
    } else {
      auto best = *std::min_element(res.extreme.begin(), res.extreme.end(), lex_less<T>);
      row.pi_plus = profit_at(pl, best, paid);
    }
    if (!pl.producer()) {
      T shift{0};
      for (int t = 0; t < m.periods; ++t) shift += paid[t] * pl.fixed_load[t];
      row.pi_star += shift;
      row.pi_plus += shift;
    }
    row.uplift = row.pi_plus - row.pi_star;
    rep.rows.push_back(row);
  }
  if (m.nodes == 2) {
    UpliftRow<T> row{"FTR holders"};
    for (int t = 0; t < m.periods; ++t) {
      T dp = rep.paid_price[m.price_index(1, t)] - rep.paid_price[m.price_index(0, t)];
      T dp_exact = p[m.price_index(1, t)] - p[m.price_index(0, t)];
      T f = x.flow[t];
      row.pi_star += dp * f;
      bool at_max = Num<T>::eq(dp_exact * f, m.line_capacity * Num<T>::abs(dp_exact));
      if (at_max) {
        row.pi_plus += dp * f;
      } else {
        T best = Num<T>::is_zero(dp_exact) ? T(0) : (dp_exact > 0 ? m.line_capacity : T(-m.line_capacity));
        row.pi_plus += dp * best;
      }
    }
    row.uplift = row.pi_plus - row.pi_star;
    rep.rows.push_back(row);
  }
  for (auto& r : rep.rows) {
    rep.total_star += r.pi_star;
    rep.total_plus += r.pi_plus;
    rep.total_uplift += r.uplift;
  }
  rep.gap = dual_value(m, s, p) - primal.value;
  return rep;
}

template <class T>
GapSummary<T> gap_summary(const Market<T>& m, const OpportunitySets<T>& opp, const Epsilon<T>& eps) {
  GapSummary<T> g;
  g.welfare = solve_primal(m).value;
  g.chp_dual = solve_dual(m, original_sets(m)).value;
  g.modified_dual = solve_dual(m, modified_sets(m, opp, eps)).value;
  g.chp_gap = g.chp_dual - g.welfare;
  g.modified_gap = g.modified_dual - g.welfare;
  if (!Num<T>::le(T(0), g.modified_gap) || !Num<T>::le(g.modified_gap, g.chp_gap))
    throw ConsistencyError("gap sandwich violated: modified gap " + Num<T>::text(g.modified_gap) +
                           ", convex hull gap " + Num<T>::text(g.chp_gap));
  return g;
}

#define MCHP_DUAL(T)                                                                                        \
  template PricingSets<T> original_sets<T>(const Market<T>&);                                               \
  template PricingSets<T> modified_sets<T>(const Market<T>&, const OpportunitySets<T>&, const Epsilon<T>&); \
  template T dual_value<T>(const Market<T>&, const PricingSets<T>&, const std::vector<T>&);                 \
  template PriceSetReport<T> solve_dual<T>(const Market<T>&, const PricingSets<T>&);                        \
  template Certificate<T> price_membership<T>(const Market<T>&, const PricingSets<T>&, const std::vector<T>&); \
  template UpliftReport<T> uplift_report<T>(const Market<T>&, const PricingSets<T>&, const std::vector<T>&, \
                                            const PrimalSolution<T>&, RoundingPolicy);                      \
  template GapSummary<T> gap_summary<T>(const Market<T>&, const OpportunitySets<T>&, const Epsilon<T>&);

MCHP_DUAL(Rational)
MCHP_DUAL(double)

}  // namespace mchp
