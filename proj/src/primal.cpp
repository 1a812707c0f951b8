#include "mchp/primal.hpp"

#include "mchp/lp.hpp"

namespace mchp {

namespace {

template <class T>
struct Slot {
  int sign;
  const Curve<T>* curve;
  T off, lo, hi;  // quantity bounds
};

template <class T>
T slot_profit(const Slot<T>& s, const T& price) {
  T lam = T(s.sign) * price;
  auto [x, y] = s.curve->best_response(lam, s.lo - s.off, s.hi - s.off);
  (void)y;
  return lam * x - s.curve->value(x) + lam * s.off;
}

// Equal-marginal dispatch of one balanced period. Returns false if the
// quantity ranges cannot balance.
template <class T>
bool dispatch_period(const std::vector<Slot<T>>& slots, std::vector<T>& q, bool& flat) {
  T smin{0}, smax{0};
  for (auto& s : slots) {
    smin += s.sign > 0 ? s.lo : T(-s.hi);
    smax += s.sign > 0 ? s.hi : T(-s.lo);
  }
  if (Num<T>::lt(T(0), smin) || Num<T>::lt(smax, T(0))) return false;

  std::vector<T> cand;
  for (auto& s : slots)
    for (auto& k : s.curve->response_kinks(s.lo - s.off, s.hi - s.off)) cand.push_back(T(s.sign) * k);
  auto phi = [&](const T& p) {
    T v{0};
    for (auto& s : slots) v += slot_profit(s, p);
    return v;
  };
  auto r = minimize_convex_1d<T>(phi, cand);
  if (r.unbounded) return false;
  T price = !r.lo_inf ? r.lo : (!r.hi_inf ? r.hi : T(0));

  std::vector<T> a(slots.size()), b(slots.size());
  T excess{0};
  int loose = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& s = slots[i];
    auto [x, y] = s.curve->best_response(T(s.sign) * price, s.lo - s.off, s.hi - s.off);
    a[i] = x + s.off;
    b[i] = y + s.off;
    if (Num<T>::lt(a[i], b[i])) ++loose;
    excess += T(s.sign) * a[i];
  }
  q = a;
  for (std::size_t i = 0; i < slots.size() && !Num<T>::is_zero(excess); ++i) {
    const auto& s = slots[i];
    if ((excess < 0) != (s.sign > 0)) continue;
    T room = b[i] - a[i];
    T need = Num<T>::abs(excess);
    T step = room < need ? room : need;
    q[i] += step;
    excess += T(s.sign) * step;
  }
  flat = loose >= 2;
  return Num<T>::is_zero(excess);
}

template <class T>
void curve_lp_terms(const Curve<T>& c, const T& width, LinearProgram<T>& lp,
                                std::vector<std::pair<int, T>>& qterms) {
  if (c.curved()) throw std::invalid_argument("quadratic data with ramp or network coupling is not supported");
  if (c.kind != CurveKind::Piecewise) {
    qterms.emplace_back(lp.add_var(false, c.lin), T(1));
    return;
  }
  for (std::size_t k = 0; k < c.slopes.size(); ++k) {
    if (!(c.starts[k] < width) && k > 0) break;
    int v = lp.add_var(false, c.slopes[k]);
    qterms.emplace_back(v, T(1));
    if (k + 1 < c.slopes.size()) lp.add_row({{v, T(1)}}, Sense::Le, c.starts[k + 1] - c.starts[k]);
  }
}

template <class T>
struct Bounds {
  std::vector<std::vector<T>> lo, hi;  // [player][t]
};

template <class T>
std::optional<DispatchPoint<T>> solve_coupled(const Market<T>& m, const std::vector<std::uint32_t>& pat,
                                              const Bounds<T>& bd) {
  LinearProgram<T> lp(0);
  int n = static_cast<int>(m.players.size());
  std::vector<std::vector<std::vector<std::pair<int, T>>>> qt(n, std::vector<std::vector<std::pair<int, T>>>(m.periods));
  std::vector<std::vector<T>> off(n, std::vector<T>(m.periods));
  for (int i = 0; i < n; ++i) {
    const auto& p = m.players[i];
    for (int t = 0; t < m.periods; ++t) {
      off[i][t] = p.offset(pat[i], t);
      curve_lp_terms(p.curve[t], bd.hi[i][t] - off[i][t], lp, qt[i][t]);
      lp.add_row(qt[i][t], Sense::Ge, bd.lo[i][t] - off[i][t]);
      lp.add_row(qt[i][t], Sense::Le, bd.hi[i][t] - off[i][t]);
    }
    if (!p.ramp) continue;
    for (int t = 0; t < m.periods; ++t) {
      if (t == 0) {
        lp.add_row(qt[i][0], Sense::Le, p.initial_output + *p.ramp - off[i][0]);
        lp.add_row(qt[i][0], Sense::Ge, p.initial_output - *p.ramp - off[i][0]);
        continue;
      }
      auto diff = qt[i][t];
      for (auto [v, c] : qt[i][t - 1]) diff.emplace_back(v, -c);
      T shift = off[i][t] - off[i][t - 1];
      lp.add_row(diff, Sense::Le, *p.ramp - shift);
      lp.add_row(diff, Sense::Ge, -*p.ramp - shift);
    }
  }
  std::vector<int> flow(m.periods, -1);
  if (m.nodes == 2) {
    for (int t = 0; t < m.periods; ++t) {
      flow[t] = lp.add_var(true);
      lp.add_row({{flow[t], T(1)}}, Sense::Le, m.line_capacity);
      lp.add_row({{flow[t], T(1)}}, Sense::Ge, -m.line_capacity);
    }
  }
  for (int node = 0; node < m.nodes; ++node) {
    for (int t = 0; t < m.periods; ++t) {
      std::vector<std::pair<int, T>> row;
      T rhs{0};
      for (int i = 0; i < n; ++i) {
        if (m.players[i].node != node) continue;
        T s(m.players[i].sign);
        for (auto [v, c] : qt[i][t]) row.emplace_back(v, s * c);
        rhs -= s * off[i][t];
      }
      if (flow[t] >= 0) row.emplace_back(flow[t], node == 0 ? T(-1) : T(1));
      lp.add_row(row, Sense::Eq, rhs);
    }
  }
  auto res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) return std::nullopt;
  DispatchPoint<T> x;
  for (int i = 0; i < n; ++i) {
    StatePoint<T> sp{pat[i], std::vector<T>(m.periods)};
    for (int t = 0; t < m.periods; ++t) {
      T q = off[i][t];
      for (auto [v, c] : qt[i][t]) q += c * res.x[v];
      sp.q[t] = q;
    }
    x.players.push_back(std::move(sp));
  }
  x.flow.assign(m.periods, T(0));
  for (int t = 0; t < m.periods; ++t)
    if (flow[t] >= 0) x.flow[t] = res.x[flow[t]];
  x.flat.assign(m.periods, false);
  return x;
}

template <class T>
std::optional<DispatchPoint<T>> solve_uncoupled(const Market<T>& m, const std::vector<std::uint32_t>& pat,
                                                const Bounds<T>& bd) {
  int n = static_cast<int>(m.players.size());
  DispatchPoint<T> x;
  for (int i = 0; i < n; ++i) x.players.push_back({pat[i], std::vector<T>(m.periods)});
  x.flow.assign(m.periods, T(0));
  x.flat.assign(m.periods, false);
  for (int t = 0; t < m.periods; ++t) {
    std::vector<Slot<T>> slots;
    for (int i = 0; i < n; ++i) {
      const auto& p = m.players[i];
      slots.push_back({p.sign, &p.curve[t], p.offset(pat[i], t), bd.lo[i][t], bd.hi[i][t]});
    }
    std::vector<T> q;
    bool flat = false;
    if (!dispatch_period(slots, q, flat)) return std::nullopt;
    for (int i = 0; i < n; ++i) x.players[i].q[t] = q[i];
    x.flat[t] = flat;
  }
  return x;
}

template <class T>
void fill_residual(const Market<T>& m, DispatchPoint<T>& x) {
  x.residual.assign(m.dim(), T(0));
  for (std::size_t i = 0; i < m.players.size(); ++i) {
    const auto& p = m.players[i];
    for (int t = 0; t < m.periods; ++t) x.residual[m.price_index(p.node, t)] += T(p.sign) * x.players[i].q[t];
  }
  if (m.nodes == 2)
    for (int t = 0; t < m.periods; ++t) {
      x.residual[m.price_index(0, t)] -= x.flow[t];
      x.residual[m.price_index(1, t)] += x.flow[t];
    }
}

}  // namespace

template <class T>
PrimalSolution<T> solve_primal(const Market<T>& m, const std::optional<Caps<T>>& caps) {
  int n = static_cast<int>(m.players.size());
  std::uint64_t total = 1;
  for (auto& p : m.players) {
    total *= p.pattern_count();
    if (total > kMaxPatterns) throw std::length_error("more than 2^20 discrete patterns");
  }
  // Allowed patterns per player, descending.
  std::vector<std::vector<std::uint32_t>> allowed(n);
  for (int i = 0; i < n; ++i) {
    const auto& p = m.players[i];
    for (std::uint32_t pat = p.pattern_count(); pat-- > 0;) {
      if (caps && (pat & ~caps->pattern_cap[i])) continue;
      bool ok = true;
      for (int t = 0; t < m.periods && ok; ++t) {
        auto [lo, hi] = p.domain(pat, t);
        if (caps && Num<T>::lt(caps->q_cap[i][t], lo)) ok = false;
      }
      if (ok) allowed[i].push_back(pat);
    }
    if (allowed[i].empty()) throw InfeasibleError("player " + p.id + " has no pattern within its caps");
  }
  bool coupled = m.nodes > 1 || m.has_ramp();

  PrimalSolution<T> sol;
  bool any = false;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    std::vector<std::uint32_t> pat(n);
    Bounds<T> bd;
    bd.lo.assign(n, std::vector<T>(m.periods));
    bd.hi.assign(n, std::vector<T>(m.periods));
    for (int i = 0; i < n; ++i) {
      pat[i] = allowed[i][idx[i]];
      for (int t = 0; t < m.periods; ++t) {
        auto [lo, hi] = m.players[i].domain(pat[i], t);
        if (caps && caps->q_cap[i][t] < hi) hi = caps->q_cap[i][t];
        bd.lo[i][t] = lo;
        bd.hi[i][t] = hi < lo ? lo : hi;
      }
    }
    auto x = coupled ? solve_coupled(m, pat, bd) : solve_uncoupled(m, pat, bd);
    if (x) {
      fill_residual(m, *x);
      x->objective = T(0);
      for (int i = 0; i < n; ++i) x->objective += m.players[i].value(pat[i], x->players[i].q);
      if (!any || Num<T>::lt(sol.value, x->objective)) {
        sol.value = x->objective;
        sol.optima.clear();
        sol.optima.push_back(std::move(*x));
        any = true;
      } else if (Num<T>::eq(sol.value, x->objective)) {
        sol.optima.push_back(std::move(*x));
      }
    }
    int i = n - 1;
    while (i >= 0 && ++idx[i] == allowed[i].size()) idx[i--] = 0;
    if (i < 0) break;
  }
  if (!any) throw InfeasibleError("no commitment pattern admits a balanced dispatch (fixed load unservable)");
  return sol;
}

PrimalSolution<Rational> solve_primal(const Scenario& s) { return solve_primal(Market<Rational>::from(s)); }

template <class T>
T welfare_at(const Market<T>& m, const DispatchPoint<T>& x) {
  if (x.players.size() != m.players.size()) throw InfeasibleError("point has the wrong number of players");
  T v{0};
  for (std::size_t i = 0; i < m.players.size(); ++i) {
    const auto& p = m.players[i];
    const auto& s = x.players[i];
    if (s.pattern >= p.pattern_count()) throw InfeasibleError(p.id + ": pattern out of range");
    for (int t = 0; t < m.periods; ++t) {
      auto [lo, hi] = p.domain(s.pattern, t);
      if (Num<T>::lt(s.q[t], lo) || Num<T>::lt(hi, s.q[t])) throw InfeasibleError(p.id + ": quantity outside its range");
    }
    if (p.ramp && !ramp_ok(RampChain<T>{p.initial_output, *p.ramp}, s.q))
      throw InfeasibleError(p.id + ": ramp limit violated");
    v += p.value(s.pattern, s.q);
  }
  DispatchPoint<T> y = x;
  if (y.flow.size() != static_cast<std::size_t>(m.periods)) y.flow.assign(m.periods, T(0));
  for (int t = 0; t < m.periods; ++t)
    if (Num<T>::lt(m.line_capacity, Num<T>::abs(y.flow[t])) && m.nodes == 2)
      throw InfeasibleError("line flow exceeds capacity");
  fill_residual(m, y);
  for (auto& r : y.residual)
    if (!Num<T>::is_zero(r)) throw InfeasibleError("power balance violated");
  return v;
}

template PrimalSolution<Rational> solve_primal<Rational>(const Market<Rational>&, const std::optional<Caps<Rational>>&);
template PrimalSolution<double> solve_primal<double>(const Market<double>&, const std::optional<Caps<double>>&);
template Rational welfare_at<Rational>(const Market<Rational>&, const DispatchPoint<Rational>&);
template double welfare_at<double>(const Market<double>&, const DispatchPoint<double>&);

}  // namespace mchp
