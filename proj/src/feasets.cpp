#include "mchp/feasets.hpp"

#include <map>

namespace mchp {

std::string method_name(SetMethod m) {
  switch (m) {
    case SetMethod::ExactFixedLoad: return "exact-fixed-load";
    case SetMethod::ExactPriceSensitive: return "exact-price-sensitive";
    case SetMethod::ConsumerMirror: return "consumer-mirror";
    case SetMethod::CapSweep: return "cap-sweep";
  }
  return "?";
}

namespace {

template <class T>
bool pure_fixed(const Player<T>& p) {
  if (p.producer() || !p.blocks.empty()) return false;
  for (auto& c : p.elastic_cap)
    if (c != 0) return false;
  return true;
}

template <class T>
bool single_period_uninode(const Market<T>& m) {
  return m.periods == 1 && m.nodes == 1 && !m.has_ramp();
}

template <class T>
bool fixed_load_market(const Market<T>& m) {
  if (!single_period_uninode(m)) return false;
  for (auto& p : m.players)
    if (!p.producer() && !pure_fixed(p)) return false;
  return true;
}

template <class T>
bool price_sensitive_market(const Market<T>& m) {
  if (!single_period_uninode(m)) return false;
  for (auto& p : m.players) {
    if (p.producer() && p.g_min != 0) return false;
    if (!p.producer() && !p.blocks.empty()) return false;
  }
  return true;
}

template <class T>
std::optional<Interval<T>> meet(const Interval<T>& a, const Interval<T>& b) {
  Interval<T> r;
  if (a.lo < b.lo || (a.lo == b.lo && b.lo_open)) {
    r.lo = b.lo;
    r.lo_open = b.lo_open || (a.lo == b.lo && a.lo_open);
  } else {
    r.lo = a.lo;
    r.lo_open = a.lo_open;
  }
  if (b.hi < a.hi || (a.hi == b.hi && b.hi_open)) {
    r.hi = b.hi;
    r.hi_open = b.hi_open || (a.hi == b.hi && a.hi_open);
  } else {
    r.hi = a.hi;
    r.hi_open = a.hi_open;
  }
  if (r.hi < r.lo || (r.lo == r.hi && (r.lo_open || r.hi_open))) return std::nullopt;
  return r;
}

template <class T>
T total_fixed_load(const Market<T>& m, int t) {
  T d{0};
  for (auto& p : m.players)
    if (!p.producer()) d += p.fixed_load[t];
  return d;
}

// Minimum of a convex function, piecewise quadratic between breakpoints, on [lo, hi].
template <class T>
struct Scan {
  T value{0}, lo{0}, hi{0};
};

template <class T>
std::vector<T> grid_between(const T& lo, const T& hi, const std::vector<T>& bps) {
  std::vector<T> xs{lo, hi};
  for (auto& b : bps)
    if (lo < b && b < hi) xs.push_back(b);
  sort_unique(xs);
  return xs;
}

template <class T>
Scan<T> minimize_on(const std::function<T(const T&)>& h, const T& lo, const T& hi, const std::vector<T>& bps) {
  auto xs = grid_between(lo, hi, bps);
  std::vector<std::pair<T, T>> pts;
  for (auto& x : xs) pts.emplace_back(x, h(x));
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    T a = xs[i], b = xs[i + 1], m = (a + b) / 2;
    T fa = h(a), fb = h(b), fm = h(m);
    T A = 2 * (fa + fb - 2 * fm), B = fb - fa - A;
    if (Num<T>::lt(T(0), A)) {
      T ts = -B / (2 * A);
      if (T(0) < ts && ts < T(1)) {
        T x = a + ts * (b - a);
        pts.emplace_back(x, h(x));
      }
    }
  }
  Scan<T> s;
  s.value = pts[0].second;
  for (auto& [x, v] : pts)
    if (v < s.value) s.value = v;
  bool first = true;
  for (auto& [x, v] : pts) {
    if (!Num<T>::eq(v, s.value)) continue;
    if (first || x < s.lo) s.lo = x;
    if (first || x > s.hi) s.hi = x;
    first = false;
  }
  return s;
}

// Lowest x in [lo, hi] with h(x) <= 0, given h(lo) > 0 >= h(hi) and h convex.
template <class T>
T first_root(const std::function<T(const T&)>& h, const T& lo, const T& hi, const std::vector<T>& bps) {
  auto xs = grid_between(lo, hi, bps);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    T a = xs[i], b = xs[i + 1];
    T fa = h(a), fb = h(b);
    if (Num<T>::le(fa, T(0))) return a;
    if (Num<T>::lt(T(0), fb)) continue;
    T fm = h((a + b) / 2);
    T A = 2 * (fa + fb - 2 * fm), B = fb - fa - A;
    T t;
    if (Num<T>::is_zero(A)) {
      t = -fa / B;
    } else {
      T disc = B * B - 4 * A * fa;
      if (disc < 0) disc = T(0);
      T s = *Num<T>::sqrt(disc);
      T t1 = (-B - s) / (2 * A), t2 = (-B + s) / (2 * A);
      if (t2 < t1) std::swap(t1, t2);
      t = (Num<T>::le(T(0), t1) && Num<T>::le(t1, T(1))) ? t1 : t2;
    }
    if (t < 0) t = T(0);
    if (t > 1) t = T(1);
    return a + t * (b - a);
  }
  return hi;
}

// Aggregate elastic benefit of all consumers, as a convex cost-orientation curve.
template <class T>
std::optional<std::pair<Curve<T>, T>> aggregate_elastic(const Market<T>& m) {
  std::vector<std::pair<T, T>> segs;  // price, length
  const Player<T>* curved = nullptr;
  int elastic_players = 0;
  for (auto& p : m.players) {
    if (p.producer() || p.elastic_cap[0] == 0) continue;
    ++elastic_players;
    const Curve<T>& c = p.curve[0];
    if (c.curved()) {
      curved = &p;
      continue;
    }
    if (c.kind == CurveKind::Piecewise) {
      for (std::size_t k = 0; k < c.slopes.size(); ++k) {
        T end = k + 1 < c.slopes.size() ? c.starts[k + 1] : p.elastic_cap[0];
        segs.emplace_back(-c.slopes[k], end - c.starts[k]);
      }
    } else {
      segs.emplace_back(-c.lin, p.elastic_cap[0]);
    }
  }
  if (curved) {
    if (elastic_players != 1) return std::nullopt;
    return std::pair{curved->curve[0], curved->elastic_cap[0]};
  }
  std::sort(segs.begin(), segs.end(), [](auto& a, auto& b) { return a.first > b.first; });
  Curve<T> w;
  T cap{0};
  if (segs.empty()) return std::pair{w, cap};
  w.kind = CurveKind::Piecewise;
  for (auto& [price, len] : segs) {
    w.starts.push_back(cap);
    w.slopes.push_back(-price);
    cap += len;
  }
  return std::pair{w, cap};
}

template <class T>
std::vector<T> curve_breaks(const Curve<T>& c, const T& shift, const T& lo, const T& hi) {
  std::vector<T> out;
  for (auto& k : c.kinks_in(lo - shift, hi - shift)) out.push_back(k + shift);
  return out;
}

template <class T>
Profile<T> single(std::uint32_t pattern, IntervalUnion<T> q) {
  Profile<T> p;
  p.pattern = pattern;
  p.q = {std::move(q)};
  return p;
}

template <class T>
StatusOutputSet<T> fixed_consumer_set(const Player<T>& p) {
  StatusOutputSet<T> s;
  Profile<T> pr;
  for (auto& d : p.fixed_load) pr.q.push_back(IntervalUnion<T>::point(d));
  s.add(pr);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

template <class T>
Membership opportunity_membership(const Market<T>& m, const DispatchPoint<T>& x) {
  T w;
  try {
    w = welfare_at(m, x);
  } catch (const InfeasibleError& e) {
    return {false, e.what()};
  }
  PrimalSolution<T> sol;
  try {
    sol = solve_primal(m, std::optional<Caps<T>>(Caps<T>::at(x)));
  } catch (const InfeasibleError& e) {
    return {false, e.what()};
  }
  if (Num<T>::eq(sol.value, w)) return {true, {}};
  return {false, "capped optimum exceeds the point's welfare by " + Num<T>::text(sol.value - w)};
}

template <class T>
StatusOutputSet<T> omega_bar_fixed_load(const Market<T>& m, int i) {
  if (!fixed_load_market(m))
    throw std::invalid_argument("fixed-load construction needs one node, one period and pure fixed loads; use cap_sweep");
  const Player<T>& p = m.players[i];
  if (!p.producer()) return fixed_consumer_set(p);

  T d = total_fixed_load(m, 0);
  std::vector<int> others;
  for (int j = 0; j < m.unit_count; ++j)
    if (j != i) others.push_back(j);
  auto open_low = [](const Player<T>& u) { return u.g_min == 0 && u.fixed_cost(1u) != 0; };

  IntervalUnion<T> reach;
  for (std::uint32_t mask = 0; mask < (1u << others.size()); ++mask) {
    Interval<T> iv;
    for (std::size_t k = 0; k < others.size(); ++k) {
      if (!(mask >> k & 1u)) continue;
      const auto& u = m.players[others[k]];
      iv.lo += u.g_min;
      iv.hi += u.g_max;
      iv.lo_open = iv.lo_open || open_low(u);
    }
    reach.add(iv);
  }

  StatusOutputSet<T> s;
  if (reach.contains(d)) s.add(single<T>(0, IntervalUnion<T>::point(T(0))));
  Interval<T> dom{p.g_min, p.g_max, open_low(p), false};
  IntervalUnion<T> on;
  for (auto& r : reach.parts()) {
    Interval<T> need{d - r.hi, d - r.lo, r.hi_open, r.lo_open};
    if (auto x = meet(need, dom)) on.add(*x);
  }
  if (!on.empty()) s.add(single<T>(1, on));
  return s;
}

template <class T>
StatusOutputSet<T> omega_bar_price_sensitive(const Market<T>& m, int i) {
  if (!price_sensitive_market(m))
    throw std::invalid_argument("price-sensitive construction needs one node, one period and zero minimum outputs; use cap_sweep");
  const Player<T>& u = m.players[i];
  if (!u.producer()) throw std::invalid_argument("price-sensitive construction applies to producers");
  auto agg = aggregate_elastic(m);
  if (!agg) throw std::invalid_argument("aggregate benefit has no closed form; use cap_sweep");
  const auto& [cw, ecap] = *agg;

  T dmin = total_fixed_load(m, 0);
  T w = u.fixed_cost(1u);
  const Curve<T>& c = u.curve[0];
  auto h = [&](const T& g) { return c.value(g) + cw.value(g - dmin); };

  T gbar_max;
  if (!(dmin < u.g_max)) {
    gbar_max = u.g_max;
  } else {
    T lo = dmin, hi = u.g_max < dmin + ecap ? u.g_max : dmin + ecap;
    auto bps = curve_breaks(c, T(0), lo, hi);
    for (auto& b : curve_breaks(cw, dmin, lo, hi)) bps.push_back(b);
    auto r = minimize_on<T>(h, lo, hi, bps);
    T on_value = -r.value - w;
    gbar_max = (dmin > 0 || Num<T>::le(T(0), on_value)) ? r.hi : T(0);
  }

  StatusOutputSet<T> s;
  s.add(single<T>(0, IntervalUnion<T>::point(T(0))));
  if (dmin == 0) {
    if (gbar_max > 0) {
      T gbar_min{0};
      if (w != 0) {
        auto bps = curve_breaks(c, T(0), T(0), gbar_max);
        for (auto& b : curve_breaks(cw, T(0), T(0), gbar_max)) bps.push_back(b);
        gbar_min = first_root<T>([&](const T& g) { return h(g) + w; }, T(0), gbar_max, bps);
      }
      s.add(single<T>(1, IntervalUnion<T>::closed(gbar_min, gbar_max)));
    } else if (w == 0) {
      s.add(single<T>(1, IntervalUnion<T>::point(T(0))));
    }
    return s;
  }
  T others{0};
  for (int j = 0; j < m.unit_count; ++j)
    if (j != i) others += m.players[j].g_max;
  T gbar_min = dmin - others;
  if (gbar_min < 0) gbar_min = T(0);
  if (gbar_max < gbar_min) throw std::invalid_argument("inconsistent output bounds; use cap_sweep");
  if (gbar_min > 0) {
    s.profiles.clear();
    s.add(single<T>(1, IntervalUnion<T>::closed(gbar_min, gbar_max)));
    return s;
  }
  Interval<T> on{T(0), gbar_max, w != 0, false};
  if (on.lo_open && gbar_max == 0) return s;
  s.add(single<T>(1, IntervalUnion<T>{on}));
  return s;
}

template <class T>
StatusOutputSet<T> omega_bar_consumer(const Market<T>& m, int j, const T& resolution) {
  const Player<T>& p = m.players[j];
  if (pure_fixed(p)) return fixed_consumer_set(p);
  if (price_sensitive_market(m) && m.unit_count == 1 && m.players.size() == 2) {
    if (aggregate_elastic(m)) {
      auto prod = omega_bar_price_sensitive(m, 0);
      IntervalUnion<T> q;
      for (auto& pr : prod.profiles) q.unite(pr.q[0]);
      Interval<T> dom{p.fixed_load[0], p.fixed_load[0] + p.elastic_cap[0]};
      IntervalUnion<T> out;
      for (auto& iv : q.parts())
        if (auto x = meet(iv, dom)) out.add(*x);
      StatusOutputSet<T> s;
      s.add(single<T>(0, out));
      return s;
    }
  }
  return cap_sweep(m, j, resolution);
}

// ---------------------------------------------------------------------------
// Cap sweep

namespace {

template <class T>
std::vector<T> grid_values(const T& lo, const T& hi, const T& step) {
  std::vector<T> v;
  for (T x = lo; Num<T>::lt(x, hi); x += step) v.push_back(x);
  v.push_back(hi);
  sort_unique(v);
  return v;
}

template <class T>
struct Witness {
  T q;
  std::size_t point;
};

template <class T>
struct Run {
  T lo, hi;
  std::size_t lo_point, hi_point;
};

template <class T>
std::vector<Run<T>> merge_runs(std::vector<Witness<T>> w, const T& res) {
  std::sort(w.begin(), w.end(), [](auto& a, auto& b) { return a.q < b.q; });
  std::vector<Run<T>> out;
  for (auto& x : w) {
    if (!out.empty() && Num<T>::le(x.q - out.back().hi, res)) {
      if (out.back().hi < x.q) {
        out.back().hi = x.q;
        out.back().hi_point = x.point;
      }
      continue;
    }
    out.push_back({x.q, x.q, x.point, x.point});
  }
  return out;
}

template <class T>
IntervalUnion<T> runs_union(const std::vector<Run<T>>& runs) {
  IntervalUnion<T> u;
  for (auto& r : runs) u.add(Interval<T>::closed(r.lo, r.hi));
  return u;
}

template <class T>
StatusOutputSet<T> project(const Market<T>& m, int i, const std::vector<DispatchPoint<T>>& pts, const T& res) {
  const Player<T>& p = m.players[i];
  std::optional<RampChain<T>> chain;
  if (p.ramp) chain = RampChain<T>{p.initial_output, *p.ramp};
  StatusOutputSet<T> s;
  std::map<std::uint32_t, std::vector<std::size_t>> by_pattern;
  for (std::size_t k = 0; k < pts.size(); ++k) by_pattern[pts[k].players[i].pattern].push_back(k);
  for (auto& [pat, idx] : by_pattern) {
    if (m.periods == 1) {
      std::vector<Witness<T>> w;
      for (auto k : idx) w.push_back({pts[k].players[i].q[0], k});
      Profile<T> pr = single<T>(pat, runs_union(merge_runs(w, res)));
      pr.ramp = chain;
      s.add(pr);
      continue;
    }
    if (m.periods == 2) {
      std::vector<T> firsts;
      for (auto k : idx) firsts.push_back(pts[k].players[i].q[0]);
      sort_unique(firsts);
      std::vector<std::pair<T, IntervalUnion<T>>> cols;
      for (auto& a : firsts) {
        std::vector<Witness<T>> w;
        for (auto k : idx)
          if (Num<T>::eq(pts[k].players[i].q[0], a)) w.push_back({pts[k].players[i].q[1], k});
        cols.emplace_back(a, runs_union(merge_runs(w, res)));
      }
      std::size_t k = 0;
      while (k < cols.size()) {
        std::size_t e = k;
        while (e + 1 < cols.size() && cols[e + 1].second == cols[k].second &&
               Num<T>::le(cols[e + 1].first - cols[e].first, res))
          ++e;
        Profile<T> pr;
        pr.pattern = pat;
        pr.q = {IntervalUnion<T>::closed(cols[k].first, cols[e].first), cols[k].second};
        pr.ramp = chain;
        s.add(pr);
        k = e + 1;
      }
      continue;
    }
    for (auto k : idx) {
      Profile<T> pr;
      pr.pattern = pat;
      for (auto& q : pts[k].players[i].q) pr.q.push_back(IntervalUnion<T>::point(q));
      pr.ramp = chain;
      s.add(pr);
    }
  }
  return s;
}

template <class T>
bool in_domain(const Player<T>& p, const StatePoint<T>& x) {
  for (int t = 0; t < p.periods; ++t) {
    auto [lo, hi] = p.domain(x.pattern, t);
    if (Num<T>::lt(x.q[t], lo) || Num<T>::lt(hi, x.q[t])) return false;
  }
  return true;
}

// Capped optimum minus the point's own welfare; zero exactly for members.
template <class T>
std::optional<T> excess(const Market<T>& m, const DispatchPoint<T>& x) {
  try {
    T w = welfare_at(m, x);
    return solve_primal(m, std::optional<Caps<T>>(Caps<T>::at(x))).value - w;
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

// Moves one endpoint of a single-period projection outward to the exact
// fixed-point boundary when the excess is affine just beyond the grid.
template <class T>
std::optional<DispatchPoint<T>> refine_end(const Market<T>& m, const DispatchPoint<T>& x, int i, int dir,
                                           int residual, const T& res) {
  const auto& pi = m.players[i];
  auto shifted = [&](int k, const T& delta) {
    DispatchPoint<T> y = x;
    y.players[i].q[0] += T(dir) * delta;
    y.players[k].q[0] -= T(pi.sign * m.players[k].sign * dir) * delta;
    return y;
  };
  auto valid = [&](int k, const DispatchPoint<T>& y) {
    return in_domain(pi, y.players[i]) && in_domain(m.players[k], y.players[k]);
  };
  int partner = -1;
  for (int k = -1; k < static_cast<int>(m.players.size()); ++k) {
    int cand = k < 0 ? residual : k;
    if (cand == i || cand < 0) continue;
    if (valid(cand, shifted(cand, res))) {
      partner = cand;
      break;
    }
  }
  if (partner < 0) return std::nullopt;
  // Two non-member points beyond the grid end; the excess line through them
  // crosses zero at the boundary.
  T d1 = res;
  auto f1 = excess(m, shifted(partner, d1));
  if (!f1 || !Num<T>::lt(T(0), *f1)) return std::nullopt;
  std::optional<T> f2;
  T d2;
  for (T k : {T(2), T(3) / 2}) {
    d2 = k * res;
    auto y = shifted(partner, d2);
    if (!valid(partner, y)) continue;
    f2 = excess(m, y);
    if (f2) break;
  }
  if (!f2 || !Num<T>::lt(*f1, *f2)) return std::nullopt;
  T d0 = d1 - *f1 * (d2 - d1) / (*f2 - *f1);
  if (!Num<T>::lt(T(0), d0) || !Num<T>::lt(d0, d1)) return std::nullopt;
  auto y = shifted(partner, d0);
  if (!opportunity_membership(m, y).member) return std::nullopt;
  return y;
}

}  // namespace

// Under caps equal to the point itself every player can only move down, so a
// producer whose marginal cost exceeds a consumer's marginal benefit can shed
// output together with that consumer and gain welfare.
template <class T>
bool shrink_improves(const Market<T>& m, const DispatchPoint<T>& x) {
  if (m.nodes != 1 || m.has_ramp()) return false;
  for (int t = 0; t < m.periods; ++t) {
    std::optional<T> cost, benefit;
    for (std::size_t i = 0; i < m.players.size(); ++i) {
      const auto& p = m.players[i];
      const auto& pt = x.players[i];
      T e = pt.q[t] - p.offset(pt.pattern, t);
      if (p.producer()) {
        if (!((pt.pattern >> t & 1u) && p.g_min < pt.q[t])) continue;
        T c = p.curve[t].left_slope(e);
        if (!cost || *cost < c) cost = c;
      } else if (T(0) < e) {
        T b = -p.curve[t].left_slope(e);
        if (!benefit || b < *benefit) benefit = b;
      }
    }
    if (cost && benefit && Num<T>::lt(*benefit, *cost)) return true;
  }
  return false;
}

template <class T>
std::vector<StatusOutputSet<T>> cap_sweep_all(const Market<T>& m, const T& res, const SweepOptions& opt) {
  if (!Num<T>::lt(T(0), res)) throw std::invalid_argument("resolution must be positive");
  int n = static_cast<int>(m.players.size());
  int T_ = m.periods;

  std::vector<int> residual(T_, -1);
  for (int t = 0; t < T_; ++t) {
    T best{-1};
    for (int i = 0; i < n; ++i) {
      const auto& p = m.players[i];
      if (p.node != 0) continue;
      for (std::uint32_t pat = 0; pat < p.pattern_count(); ++pat) {
        auto [lo, hi] = p.domain(pat, t);
        if (hi - lo > best) {
          best = hi - lo;
          residual[t] = i;
        }
      }
    }
  }

  std::uint64_t combos = 1;
  for (auto& p : m.players) {
    combos *= p.pattern_count();
    if (combos > kMaxPatterns) throw std::length_error("more than 2^20 discrete patterns");
  }

  std::vector<DispatchPoint<T>> members;
  std::size_t visited = 0;
  std::vector<std::uint32_t> pat(n, 0);
  for (std::uint64_t c = 0; c < combos; ++c) {
    std::uint64_t rest = c;
    for (int i = 0; i < n; ++i) {
      pat[i] = static_cast<std::uint32_t>(rest % m.players[i].pattern_count());
      rest /= m.players[i].pattern_count();
    }
    // Grid lists for every (player, period) not solved from the balance.
    std::vector<std::vector<T>> lists;
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < T_; ++t) {
        if (residual[t] == i) continue;
        auto [lo, hi] = m.players[i].domain(pat[i], t);
        lists.push_back(grid_values(lo, hi, res));
        slots.emplace_back(i, t);
      }
    }
    std::vector<std::size_t> idx(lists.size(), 0);
    while (true) {
      if (++visited > opt.max_points) throw std::length_error("cap sweep grid exceeds its point budget");
      DispatchPoint<T> x;
      for (int i = 0; i < n; ++i) x.players.push_back({pat[i], std::vector<T>(T_, T(0))});
      for (std::size_t k = 0; k < lists.size(); ++k) x.players[slots[k].first].q[slots[k].second] = lists[k][idx[k]];
      x.flow.assign(T_, T(0));
      bool ok = true;
      for (int t = 0; t < T_ && ok; ++t) {
        if (m.nodes == 2) {
          T s1{0};
          for (int i = 0; i < n; ++i)
            if (m.players[i].node == 1) s1 += T(m.players[i].sign) * x.players[i].q[t];
          x.flow[t] = -s1;
          if (Num<T>::lt(m.line_capacity, Num<T>::abs(x.flow[t]))) ok = false;
        }
        int r = residual[t];
        T s0 = -x.flow[t];
        for (int i = 0; i < n; ++i)
          if (i != r && m.players[i].node == 0) s0 += T(m.players[i].sign) * x.players[i].q[t];
        x.players[r].q[t] = T(-m.players[r].sign) * s0;
        auto [lo, hi] = m.players[r].domain(pat[r], t);
        if (Num<T>::lt(x.players[r].q[t], lo) || Num<T>::lt(hi, x.players[r].q[t])) ok = false;
      }
      if (ok && !shrink_improves(m, x) && opportunity_membership(m, x).member) members.push_back(std::move(x));
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == lists[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  for (auto& x : solve_primal(m).optima) members.push_back(x);

  if (opt.refine && T_ == 1 && m.nodes == 1 && !m.has_ramp()) {
    std::vector<DispatchPoint<T>> extra;
    for (int i = 0; i < n; ++i) {
      std::map<std::uint32_t, std::vector<Witness<T>>> by_pattern;
      for (std::size_t k = 0; k < members.size(); ++k)
        by_pattern[members[k].players[i].pattern].push_back({members[k].players[i].q[0], k});
      for (auto& [p, w] : by_pattern) {
        for (auto& run : merge_runs(w, res)) {
          if (auto y = refine_end(m, members[run.lo_point], i, -1, residual[0], res)) extra.push_back(*y);
          if (auto y = refine_end(m, members[run.hi_point], i, +1, residual[0], res)) extra.push_back(*y);
        }
      }
    }
    for (auto& y : extra) members.push_back(std::move(y));
  }

  std::vector<StatusOutputSet<T>> out;
  for (int i = 0; i < n; ++i) out.push_back(project(m, i, members, res));
  return out;
}

template <class T>
StatusOutputSet<T> cap_sweep(const Market<T>& m, int player, const T& resolution) {
  return cap_sweep_all(m, resolution)[player];
}

template <class T>
StatusOutputSet<T> psi_set(const Market<T>& m, int i) {
  const Player<T>& p = m.players[i];
  if (!p.producer()) return fixed_consumer_set(p);
  return profit_max(p, original_set(p), std::vector<T>(m.periods, T(0))).argmax;
}

template <class T>
StatusOutputSet<T> modified_set(const Player<T>& p, const StatusOutputSet<T>& omega_bar, const StatusOutputSet<T>& psi,
                                const Epsilon<T>& eps) {
  StatusOutputSet<T> out;
  std::optional<RampChain<T>> chain;
  if (p.ramp) chain = RampChain<T>{p.initial_output, *p.ramp};
  for (const Box<T>& b : boxes_of(omega_bar.closure())) {
    for (std::uint32_t pat = 0; pat < p.pattern_count(); ++pat) {
      Profile<T> pr;
      pr.pattern = pat;
      pr.ramp = chain;
      Box<T> nb{pat, {}, {}, chain};
      bool empty = false;
      for (int t = 0; t < p.periods && !empty; ++t) {
        T lo = b.lo[t], hi = b.hi[t];
        if (!eps.limit) {
          lo -= eps.value[t];
          hi += eps.value[t];
        }
        auto [dlo, dhi] = p.domain(pat, t);
        if (lo < dlo) lo = dlo;
        if (hi > dhi) hi = dhi;
        if (hi < lo) empty = true;
        pr.q.push_back(IntervalUnion<T>::closed(lo, hi));
        nb.lo.push_back(lo);
        nb.hi.push_back(hi);
      }
      if (empty || !box_feasible(p, nb)) continue;
      out.add(pr);
    }
  }
  out.unite(psi);
  out.limit_closure = eps.limit;
  return out;
}

template <class T>
StatusOutputSet<T> OpportunitySets<T>::modified(const Market<T>& m, int player, const Epsilon<T>& eps) const {
  return modified_set(m.players[player], omega_bar[player], psi[player], eps);
}

template <class T>
OpportunitySets<T> build_opportunity_sets(const Market<T>& m, const T& resolution, bool force_sweep) {
  int n = static_cast<int>(m.players.size());
  OpportunitySets<T> s;
  s.resolution = resolution;
  s.omega_bar.resize(n);
  s.method.assign(n, SetMethod::CapSweep);
  std::vector<bool> done(n, false);
  if (!force_sweep && fixed_load_market(m)) {
    for (int i = 0; i < n; ++i) {
      s.omega_bar[i] = omega_bar_fixed_load(m, i);
      s.method[i] = SetMethod::ExactFixedLoad;
      done[i] = true;
    }
  } else if (!force_sweep) {
    for (int i = 0; i < n; ++i) {
      const auto& p = m.players[i];
      if (pure_fixed(p)) {
        s.omega_bar[i] = fixed_consumer_set(p);
        s.method[i] = SetMethod::ExactFixedLoad;
        done[i] = true;
      } else if (price_sensitive_market(m) && aggregate_elastic(m)) {
        if (p.producer()) {
          s.omega_bar[i] = omega_bar_price_sensitive(m, i);
          s.method[i] = SetMethod::ExactPriceSensitive;
          done[i] = true;
        } else if (m.unit_count == 1 && n == 2) {
          s.omega_bar[i] = omega_bar_consumer(m, i, resolution);
          s.method[i] = SetMethod::ConsumerMirror;
          done[i] = true;
        }
      }
    }
  }
  if (std::find(done.begin(), done.end(), false) != done.end()) {
    auto sweep = cap_sweep_all(m, resolution);
    for (int i = 0; i < n; ++i)
      if (!done[i]) s.omega_bar[i] = sweep[i];
  }
  for (int i = 0; i < n; ++i) s.psi.push_back(psi_set(m, i));
  return s;
}

#define MCHP_FEASETS(T)                                                                                       \
  template struct OpportunitySets<T>;                                                                         \
  template Membership opportunity_membership<T>(const Market<T>&, const DispatchPoint<T>&);                   \
  template StatusOutputSet<T> omega_bar_fixed_load<T>(const Market<T>&, int);                                 \
  template StatusOutputSet<T> omega_bar_price_sensitive<T>(const Market<T>&, int);                            \
  template StatusOutputSet<T> omega_bar_consumer<T>(const Market<T>&, int, const T&);                         \
  template std::vector<StatusOutputSet<T>> cap_sweep_all<T>(const Market<T>&, const T&, const SweepOptions&); \
  template StatusOutputSet<T> cap_sweep<T>(const Market<T>&, int, const T&);                                  \
  template StatusOutputSet<T> psi_set<T>(const Market<T>&, int);                                              \
  template StatusOutputSet<T> modified_set<T>(const Player<T>&, const StatusOutputSet<T>&,                    \
                                              const StatusOutputSet<T>&, const Epsilon<T>&);                  \
  template OpportunitySets<T> build_opportunity_sets<T>(const Market<T>&, const T&, bool);

MCHP_FEASETS(Rational)
MCHP_FEASETS(double)

}  // namespace mchp
