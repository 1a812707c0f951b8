#include "mchp/curvelib.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace mchp {

template <class T>
bool StatusOutputSet<T>::contains(const StatePoint<T>& x) const {
  for (const auto& pr : profiles) {
    if (pr.pattern != x.pattern) continue;
    bool ok = true;
    for (std::size_t t = 0; t < pr.q.size() && ok; ++t) {
      const auto& u = limit_closure ? pr.q[t].closure() : pr.q[t];
      ok = u.contains(x.q[t]);
    }
    if (ok && pr.ramp) ok = ramp_ok(*pr.ramp, x.q);
    if (ok) return true;
  }
  return false;
}

template <class T>
StatusOutputSet<T> StatusOutputSet<T>::closure() const {
  StatusOutputSet out;
  out.limit_closure = limit_closure;
  for (auto pr : profiles) {
    for (auto& u : pr.q) u = u.closure();
    out.add(pr);
  }
  return out;
}

template <class T>
void StatusOutputSet<T>::add(Profile<T> p) {
  for (auto& u : p.q)
    if (u.empty()) return;
  for (auto& e : profiles)
    if (e == p) return;
  // Single-period profiles with the same pattern merge into one union.
  if (p.q.size() == 1) {
    for (auto& e : profiles) {
      if (e.pattern == p.pattern && e.ramp == p.ramp) {
        e.q[0].unite(p.q[0]);
        return;
      }
    }
  }
  profiles.push_back(std::move(p));
}

template <class T>
void StatusOutputSet<T>::unite(const StatusOutputSet& o) {
  for (auto& p : o.profiles) add(p);
}

template <class T>
std::string StatusOutputSet<T>::str() const {
  std::string s;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (i) s += " ; ";
    const auto& pr = profiles[i];
    s += "pattern " + std::to_string(pr.pattern) + ": ";
    for (std::size_t t = 0; t < pr.q.size(); ++t) {
      if (t) s += " x ";
      s += pr.q[t].str();
    }
    if (pr.ramp) s += " (ramp)";
  }
  return s.empty() ? "{}" : s;
}

template <class T>
bool ramp_ok(const RampChain<T>& r, const std::vector<T>& q) {
  T prev = r.start;
  for (const T& x : q) {
    T d = x - prev;
    if (Num<T>::lt(r.limit, Num<T>::abs(d))) return false;
    prev = x;
  }
  return true;
}

bool ramp_ok_double(double start, double limit, const std::vector<double>& q) {
  return ramp_ok(RampChain<double>{start, limit}, q);
}

template <class T>
std::vector<Box<T>> boxes_of(const StatusOutputSet<T>& s) {
  std::vector<Box<T>> out;
  for (const auto& pr : s.profiles) {
    std::size_t n = pr.q.size();
    std::vector<std::size_t> idx(n, 0);
    bool empty = false;
    for (auto& u : pr.q) empty = empty || u.empty();
    if (empty) continue;
    while (true) {
      Box<T> b;
      b.pattern = pr.pattern;
      b.ramp = pr.ramp;
      for (std::size_t t = 0; t < n; ++t) {
        const auto& iv = pr.q[t].parts()[idx[t]];
        if (iv.lo_inf || iv.hi_inf) throw std::invalid_argument("unbounded quantity range");
        b.lo.push_back(iv.lo);
        b.hi.push_back(iv.hi);
      }
      out.push_back(std::move(b));
      std::size_t t = 0;
      while (t < n && ++idx[t] == pr.q[t].size()) idx[t++] = 0;
      if (t == n) break;
    }
  }
  return out;
}

namespace {

// Period-1 window after the ramp from the initial output.
template <class T>
std::pair<T, T> first_window(const Box<T>& b) {
  T lo = b.lo[0], hi = b.hi[0];
  if (b.ramp) {
    T a = b.ramp->start - b.ramp->limit, c = b.ramp->start + b.ramp->limit;
    if (lo < a) lo = a;
    if (hi > c) hi = c;
  }
  return {lo, hi};
}

template <class T>
bool coupled(const Box<T>& b) {
  return b.ramp && b.lo.size() >= 2;
}

template <class T>
std::vector<StatePoint<T>> ramp_polygon_vertices(const Player<T>& p, const Box<T>& b) {
  if (b.lo.size() != 2) throw std::invalid_argument("ramp coupling is supported for two periods");
  auto [alo, ahi] = first_window(b);
  std::vector<StatePoint<T>> out;
  if (Num<T>::lt(ahi, alo)) return out;
  if (ahi < alo) ahi = alo;
  const T& blo = b.lo[1];
  const T& bhi = b.hi[1];
  const T& r = b.ramp->limit;
  std::vector<T> xs{alo, ahi}, ys{blo, bhi};
  T o0 = p.offset(b.pattern, 0), o1 = p.offset(b.pattern, 1);
  for (auto& k : p.curve[0].kinks_in(alo - o0, ahi - o0)) xs.push_back(k + o0);
  for (auto& k : p.curve[1].kinks_in(blo - o1, bhi - o1)) ys.push_back(k + o1);
  std::vector<std::pair<T, T>> cand;
  for (auto& x : xs) {
    for (auto& y : ys) cand.emplace_back(x, y);
    cand.emplace_back(x, x + r);
    cand.emplace_back(x, x - r);
  }
  for (auto& y : ys) {
    cand.emplace_back(y - r, y);
    cand.emplace_back(y + r, y);
  }
  for (auto& [x, y] : cand) {
    if (Num<T>::lt(x, alo) || Num<T>::lt(ahi, x) || Num<T>::lt(y, blo) || Num<T>::lt(bhi, y)) continue;
    if (Num<T>::lt(r, Num<T>::abs(y - x))) continue;
    StatePoint<T> s{b.pattern, {x, y}};
    bool dup = false;
    for (auto& e : out)
      dup = dup || (Num<T>::eq(e.q[0], x) && Num<T>::eq(e.q[1], y));
    if (!dup) out.push_back(s);
  }
  return out;
}

}  // namespace

template <class T>
bool box_feasible(const Player<T>& p, const Box<T>& b) {
  for (std::size_t t = 0; t < b.lo.size(); ++t)
    if (Num<T>::lt(b.hi[t], b.lo[t])) return false;
  if (!b.ramp) return true;
  if (b.lo.size() == 1) {
    auto [lo, hi] = first_window(b);
    return Num<T>::le(lo, hi);
  }
  return !ramp_polygon_vertices(p, b).empty();
}

template <class T>
std::vector<ValuedPoint<T>> box_vertices(const Player<T>& p, const Box<T>& b) {
  std::vector<ValuedPoint<T>> out;
  std::size_t n = b.lo.size();
  for (std::size_t t = 0; t < n; ++t)
    if (p.curve[t].curved()) throw std::invalid_argument("vertex enumeration needs piecewise-affine data");
  std::vector<StatePoint<T>> pts;
  if (coupled(b)) {
    pts = ramp_polygon_vertices(p, b);
  } else {
    std::vector<std::vector<T>> per(n);
    for (std::size_t t = 0; t < n; ++t) {
      T lo = b.lo[t], hi = b.hi[t];
      if (t == 0 && b.ramp) std::tie(lo, hi) = first_window(b);
      if (Num<T>::lt(hi, lo)) return out;
      T off = p.offset(b.pattern, static_cast<int>(t));
      per[t] = {lo};
      if (hi != lo) per[t].push_back(hi);
      for (auto& k : p.curve[t].kinks_in(lo - off, hi - off)) per[t].push_back(k + off);
    }
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      StatePoint<T> s{b.pattern, std::vector<T>(n)};
      for (std::size_t t = 0; t < n; ++t) s.q[t] = per[t][idx[t]];
      pts.push_back(std::move(s));
      std::size_t t = 0;
      while (t < n && ++idx[t] == per[t].size()) idx[t++] = 0;
      if (t == n) break;
    }
  }
  for (auto& s : pts) out.push_back({s, p.value(s.pattern, s.q)});
  return out;
}

template <class T>
StatusOutputSet<T> original_set(const Player<T>& p) {
  StatusOutputSet<T> s;
  for (std::uint32_t pat = 0; pat < p.pattern_count(); ++pat) {
    Profile<T> pr;
    pr.pattern = pat;
    Box<T> b;
    b.pattern = pat;
    for (int t = 0; t < p.periods; ++t) {
      auto [lo, hi] = p.domain(pat, t);
      pr.q.push_back(IntervalUnion<T>::closed(lo, hi));
      b.lo.push_back(lo);
      b.hi.push_back(hi);
    }
    if (p.ramp) {
      pr.ramp = RampChain<T>{p.initial_output, *p.ramp};
      b.ramp = pr.ramp;
    }
    if (!box_feasible(p, b)) continue;
    s.profiles.push_back(std::move(pr));
  }
  return s;
}

template <class T>
T profit_at(const Player<T>& p, const StatePoint<T>& x, const std::vector<T>& prices) {
  T v = p.value(x.pattern, x.q);
  for (int t = 0; t < p.periods; ++t) v += T(p.sign) * prices[t] * x.q[t];
  return v;
}

template <class T>
ProfitResult<T> profit_max(const Player<T>& p, const StatusOutputSet<T>& set, const std::vector<T>& prices) {
  auto boxes = boxes_of(set);
  ProfitResult<T> res;
  bool any = false;
  auto offer = [&](const T& v, Profile<T> arg, std::vector<StatePoint<T>> ext) {
    if (!any || Num<T>::lt(res.value, v)) {
      res = ProfitResult<T>{};
      res.value = v;
      any = true;
    } else if (!Num<T>::eq(res.value, v)) {
      return;
    }
    res.argmax.add(std::move(arg));
    for (auto& e : ext) {
      bool dup = false;
      for (auto& f : res.extreme) dup = dup || f == e;
      if (!dup) res.extreme.push_back(std::move(e));
    }
  };
  for (const Box<T>& b : boxes) {
    std::size_t n = b.lo.size();
    if (coupled(b)) {
      auto verts = box_vertices(p, b);
      if (verts.empty()) continue;
      T best{0};
      bool have = false;
      std::vector<T> vals;
      for (auto& vp : verts) {
        T v = profit_at(p, vp.point, prices);
        vals.push_back(v);
        if (!have || v > best) best = v;
        have = true;
      }
      for (std::size_t k = 0; k < verts.size(); ++k) {
        if (!Num<T>::eq(vals[k], best)) continue;
        Profile<T> pr;
        pr.pattern = b.pattern;
        pr.ramp = b.ramp;
        for (auto& x : verts[k].point.q) pr.q.push_back(IntervalUnion<T>::point(x));
        offer(vals[k], pr, {verts[k].point});
      }
      continue;
    }
    T v = -p.fixed_cost(b.pattern);
    Profile<T> pr;
    pr.pattern = b.pattern;
    std::vector<std::pair<T, T>> arg(n);
    bool feasible = true;
    for (std::size_t t = 0; t < n; ++t) {
      T lo = b.lo[t], hi = b.hi[t];
      if (t == 0 && b.ramp) std::tie(lo, hi) = first_window(b);
      if (Num<T>::lt(hi, lo)) {
        feasible = false;
        break;
      }
      if (hi < lo) hi = lo;
      T off = p.offset(b.pattern, static_cast<int>(t));
      T lam = T(p.sign) * prices[t];
      auto [a, c] = p.curve[t].best_response(lam, lo - off, hi - off);
      v += lam * a - p.curve[t].value(a) + lam * off;
      arg[t] = {a + off, c + off};
      pr.q.push_back(IntervalUnion<T>::closed(a + off, c + off));
    }
    if (!feasible) continue;
    std::vector<StatePoint<T>> ext;
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      StatePoint<T> s{b.pattern, std::vector<T>(n)};
      for (std::size_t t = 0; t < n; ++t) s.q[t] = idx[t] ? arg[t].second : arg[t].first;
      bool dup = false;
      for (auto& e : ext) dup = dup || e == s;
      if (!dup) ext.push_back(std::move(s));
      std::size_t t = 0;
      while (t < n && ++idx[t] == 2) idx[t++] = 0;
      if (t == n) break;
    }
    offer(v, pr, ext);
  }
  if (!any) throw std::invalid_argument("profit_max over an empty set");
  return res;
}

template <class T>
T economic_min_output(const Player<T>& u) {
  T w = u.fixed_cost(1u);
  if (w == 0) return u.g_min;
  const Curve<T>& c = u.curve[0];
  switch (c.kind) {
    case CurveKind::Affine:
      return u.g_max;
    case CurveKind::Quadratic: {
      if (c.quad == 0) return u.g_max;
      auto root = Num<T>::sqrt(w / c.quad);
      T g = *root;
      if (g < u.g_min) g = u.g_min;
      return g < u.g_max ? g : u.g_max;
    }
    case CurveKind::Piecewise:
      for (std::size_t k = 0; k < c.slopes.size(); ++k) {
        T seg_lo = c.starts[k];
        bool last = k + 1 == c.slopes.size();
        if (!last && c.starts[k + 1] <= u.g_min) continue;
        T g = seg_lo < u.g_min ? u.g_min : seg_lo;
        if (!(g < u.g_max)) break;
        T h = c.slopes[k] * g - c.value(g) - w;
        if (h >= 0) return g;
      }
      return u.g_max;
  }
  return u.g_max;
}

Rational economic_min_output(const UnitSpec& unit) {
  Scenario s;
  s.units = {unit};
  s.units[0].node = 1;
  return economic_min_output(Market<Rational>::from(s).players[0]);
}

template <class T>
IntervalUnion<T> supply_correspondence(const Player<T>& unit, const T& price) {
  auto res = profit_max(unit, original_set(unit), std::vector<T>{price});
  IntervalUnion<T> out;
  for (auto& pr : res.argmax.profiles) out.unite(pr.q[0]);
  return out;
}

template <class T>
T ConvexHullCost<T>::value(const T& g) const {
  if (has_ray && g <= g_star) return ray_slope * g;
  return tail.value(g) + fixed;
}

template <class T>
std::pair<T, T> ConvexHullCost<T>::subgradient(const T& g) const {
  if (has_ray && g < g_star) return {g == 0 ? T(-1000000000) : ray_slope, ray_slope};
  T right = g < g_max ? tail.right_slope(g) : T(1000000000);
  T left = (has_ray && g == g_star) ? ray_slope : tail.left_slope(g);
  if (!has_ray && g == 0) left = T(-1000000000);
  return {left, right};
}

template <class T>
T ConvexHullCost<T>::conjugate(const T& p) const {
  T best{0};
  if (has_ray) {
    T v = (p - ray_slope) * g_star;
    if (v > best) best = v;
  }
  T lo = has_ray ? g_star : T(0);
  auto [a, c] = tail.best_response(p, lo, g_max);
  (void)c;
  T v = p * a - tail.value(a) - fixed;
  if (v > best) best = v;
  return best;
}

template <class T>
ConvexHullCost<T> convex_hull_cost(const Player<T>& unit) {
  ConvexHullCost<T> h;
  h.g_max = unit.g_max;
  h.fixed = unit.fixed_cost(1u);
  h.tail = unit.curve[0];
  if (h.fixed == 0 && unit.g_min == 0) return h;
  h.g_star = economic_min_output(unit);
  if (h.g_star == 0) return h;
  h.has_ray = true;
  h.ray_slope = (unit.curve[0].value(h.g_star) + h.fixed) / h.g_star;
  return h;
}

template <class T>
ConvexMin1D<T> minimize_convex_1d(const std::function<T(const T&)>& f, std::vector<T> cand) {
  sort_unique(cand);
  if (cand.empty()) cand.push_back(T(0));
  std::size_t n = cand.size();
  std::vector<T> val(n);
  for (std::size_t i = 0; i < n; ++i) val[i] = f(cand[i]);

  struct Pt {
    T x, v;
  };
  std::vector<Pt> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({cand[i], val[i]});
  std::vector<std::pair<std::size_t, bool>> flat_gaps;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    T a = cand[i], b = cand[i + 1];
    T m = (a + b) / 2;
    T fm = f(m);
    T A = 2 * (val[i] + val[i + 1] - 2 * fm);
    T B = val[i + 1] - val[i] - A;
    if (Num<T>::lt(T(0), A)) {
      T ts = -B / (2 * A);
      if (T(0) < ts && ts < T(1)) pts.push_back({a + ts * (b - a), val[i] + B * ts + A * ts * ts});
    }
    pts.push_back({m, fm});
  }
  ConvexMin1D<T> r;
  T right_slope = f(cand[n - 1] + 1) - val[n - 1];
  T left_slope = val[0] - f(cand[0] - 1);
  if (Num<T>::lt(right_slope, T(0)) || Num<T>::lt(T(0), left_slope)) {
    r.unbounded = true;
    return r;
  }
  r.value = pts[0].v;
  for (auto& p : pts)
    if (p.v < r.value) r.value = p.v;
  bool first = true;
  for (auto& p : pts) {
    if (!Num<T>::eq(p.v, r.value)) continue;
    if (first || p.x < r.lo) r.lo = p.x;
    if (first || p.x > r.hi) r.hi = p.x;
    first = false;
  }
  if (Num<T>::eq(val[n - 1], r.value) && Num<T>::is_zero(right_slope)) r.hi_inf = true;
  if (Num<T>::eq(val[0], r.value) && Num<T>::is_zero(left_slope)) r.lo_inf = true;
  return r;
}

#define MCHP_CURVELIB(T)                                                                          \
  template struct StatusOutputSet<T>;                                                             \
  template bool ramp_ok<T>(const RampChain<T>&, const std::vector<T>&);                           \
  template std::vector<Box<T>> boxes_of<T>(const StatusOutputSet<T>&);                            \
  template bool box_feasible<T>(const Player<T>&, const Box<T>&);                                 \
  template std::vector<ValuedPoint<T>> box_vertices<T>(const Player<T>&, const Box<T>&);          \
  template StatusOutputSet<T> original_set<T>(const Player<T>&);                                  \
  template T profit_at<T>(const Player<T>&, const StatePoint<T>&, const std::vector<T>&);         \
  template ProfitResult<T> profit_max<T>(const Player<T>&, const StatusOutputSet<T>&,             \
                                         const std::vector<T>&);                                  \
  template T economic_min_output<T>(const Player<T>&);                                            \
  template IntervalUnion<T> supply_correspondence<T>(const Player<T>&, const T&);                 \
  template struct ConvexHullCost<T>;                                                              \
  template ConvexHullCost<T> convex_hull_cost<T>(const Player<T>&);                               \
  template ConvexMin1D<T> minimize_convex_1d<T>(const std::function<T(const T&)>&, std::vector<T>);

MCHP_CURVELIB(Rational)
MCHP_CURVELIB(double)

}  // namespace mchp
