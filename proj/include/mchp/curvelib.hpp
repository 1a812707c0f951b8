#pragma once

#include "mchp/model.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mchp {

template <class T>
struct Interval {
  T lo{0}, hi{0};
  bool lo_open = false, hi_open = false;
  bool lo_inf = false, hi_inf = false;

  static Interval closed(T a, T b) { return Interval{std::move(a), std::move(b)}; }
  static Interval point(const T& a) { return Interval{a, a}; }
  bool contains(const T& x) const {
    if (!lo_inf && (lo_open ? !(lo < x) : Num<T>::lt(x, lo))) return false;
    if (!hi_inf && (hi_open ? !(x < hi) : Num<T>::lt(hi, x))) return false;
    return true;
  }
  bool degenerate() const { return !lo_inf && !hi_inf && lo == hi; }
  bool operator==(const Interval&) const = default;
};

// Sorted union of disjoint intervals; either end may be unbounded.
template <class T>
class IntervalUnion {
 public:
  IntervalUnion() = default;
  IntervalUnion(std::initializer_list<Interval<T>> parts) {
    for (auto& p : parts) add(p);
  }
  static IntervalUnion point(const T& x) { return IntervalUnion{Interval<T>::point(x)}; }
  static IntervalUnion closed(const T& a, const T& b) { return IntervalUnion{Interval<T>::closed(a, b)}; }

  void add(Interval<T> iv) {
    parts_.push_back(std::move(iv));
    normalize();
  }
  void unite(const IntervalUnion& o) {
    for (auto& p : o.parts_) parts_.push_back(p);
    normalize();
  }
  const std::vector<Interval<T>>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  std::size_t size() const { return parts_.size(); }
  bool contains(const T& x) const {
    for (auto& p : parts_)
      if (p.contains(x)) return true;
    return false;
  }
  IntervalUnion closure() const {
    IntervalUnion c;
    for (auto p : parts_) {
      p.lo_open = p.hi_open = false;
      c.parts_.push_back(p);
    }
    c.normalize();
    return c;
  }
  IntervalUnion intersect(const T& a, const T& b) const {
    IntervalUnion r;
    for (auto p : parts_) {
      if (p.lo_inf || p.lo < a) { p.lo = a; p.lo_inf = false; p.lo_open = false; }
      if (p.hi_inf || b < p.hi) { p.hi = b; p.hi_inf = false; p.hi_open = false; }
      if (p.lo < p.hi || (p.lo == p.hi && !p.lo_open && !p.hi_open)) r.parts_.push_back(p);
    }
    r.normalize();
    return r;
  }
  bool has_open_end() const {
    for (auto& p : parts_)
      if (p.lo_open || p.hi_open) return true;
    return false;
  }
  const Interval<T>& front() const { return parts_.front(); }
  const Interval<T>& back() const { return parts_.back(); }
  bool operator==(const IntervalUnion&) const = default;

  std::string str() const {
    if (parts_.empty()) return "{}";
    std::string s;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      const auto& p = parts_[i];
      if (i) s += " U ";
      if (p.degenerate()) {
        s += "{" + Num<T>::text(p.lo) + "}";
        continue;
      }
      s += p.lo_inf ? "(-inf" : (p.lo_open ? "(" : "[") + Num<T>::text(p.lo);
      s += ", ";
      s += p.hi_inf ? "+inf)" : Num<T>::text(p.hi) + (p.hi_open ? ")" : "]");
    }
    return s;
  }

 private:
  static bool lo_less(const Interval<T>& a, const Interval<T>& b) {
    if (a.lo_inf != b.lo_inf) return a.lo_inf;
    if (a.lo_inf) return false;
    if (a.lo != b.lo) return a.lo < b.lo;
    return !a.lo_open && b.lo_open;
  }
  void normalize() {
    std::sort(parts_.begin(), parts_.end(), lo_less);
    std::vector<Interval<T>> out;
    for (auto& p : parts_) {
      if (!out.empty()) {
        Interval<T>& q = out.back();
        bool touches = q.hi_inf || (!p.lo_inf && (p.lo < q.hi || (p.lo == q.hi && !(p.lo_open && q.hi_open))));
        if (touches) {
          if (!q.hi_inf && (p.hi_inf || q.hi < p.hi || (q.hi == p.hi && q.hi_open && !p.hi_open))) {
            q.hi = p.hi;
            q.hi_inf = p.hi_inf;
            q.hi_open = p.hi_open;
          }
          continue;
        }
      }
      out.push_back(p);
    }
    parts_ = std::move(out);
  }
  std::vector<Interval<T>> parts_;
};

template <class T>
struct RampChain {
  T start{0}, limit{0};
  bool operator==(const RampChain&) const = default;
};

// One commitment (or block) pattern with per-period quantity ranges.
template <class T>
struct Profile {
  std::uint32_t pattern = 0;
  std::vector<IntervalUnion<T>> q;
  std::optional<RampChain<T>> ramp;
  bool operator==(const Profile&) const = default;
};

template <class T>
struct StatePoint {
  std::uint32_t pattern = 0;
  std::vector<T> q;
  bool operator==(const StatePoint&) const = default;
};

template <class T>
struct StatusOutputSet {
  std::vector<Profile<T>> profiles;
  bool limit_closure = false;  // evaluated as the epsilon -> +0 limit

  bool empty() const { return profiles.empty(); }
  bool contains(const StatePoint<T>& x) const;
  StatusOutputSet closure() const;
  void add(Profile<T> p);
  void unite(const StatusOutputSet& o);
  std::string str() const;
};

// A single closed box of a profile: one interval per period.
template <class T>
struct Box {
  std::uint32_t pattern = 0;
  std::vector<T> lo, hi;
  std::optional<RampChain<T>> ramp;
};

template <class T>
std::vector<Box<T>> boxes_of(const StatusOutputSet<T>& s);

template <class T>
StatusOutputSet<T> original_set(const Player<T>& p);

// Candidate extreme points of a box, with the player's value at each.
// Requires piecewise-affine data.
template <class T>
struct ValuedPoint {
  StatePoint<T> point;
  T value;
};
template <class T>
std::vector<ValuedPoint<T>> box_vertices(const Player<T>& p, const Box<T>& b);

template <class T>
bool box_feasible(const Player<T>& p, const Box<T>& b);

bool ramp_ok_double(double start, double limit, const std::vector<double>& q);
template <class T>
bool ramp_ok(const RampChain<T>& r, const std::vector<T>& q);

template <class T>
struct ProfitResult {
  T value{0};
  StatusOutputSet<T> argmax;
  std::vector<StatePoint<T>> extreme;  // extreme points of the argmax set
};

// Profit s*p.q + V(x) maximised over a closed set; prices are the player's
// own per-period prices.
template <class T>
ProfitResult<T> profit_max(const Player<T>& p, const StatusOutputSet<T>& set, const std::vector<T>& prices);

template <class T>
T profit_at(const Player<T>& p, const StatePoint<T>& x, const std::vector<T>& prices);

template <class T>
T economic_min_output(const Player<T>& unit);
Rational economic_min_output(const UnitSpec& unit);

template <class T>
IntervalUnion<T> supply_correspondence(const Player<T>& unit, const T& price);

template <class T>
struct ConvexHullCost {
  T g_star{0};      // end of the ray from the origin
  T ray_slope{0};   // average cost at g_star
  T g_max{0};
  T fixed{0};
  Curve<T> tail;    // c on [g_star, g_max], plus fixed
  bool has_ray = false;

  T value(const T& g) const;
  std::pair<T, T> subgradient(const T& g) const;
  // max over [0, g_max] of p*g - f_h(g)
  T conjugate(const T& p) const;
};

template <class T>
ConvexHullCost<T> convex_hull_cost(const Player<T>& unit);

template <class T>
struct ConvexMin1D {
  T value{0};
  T lo{0}, hi{0};
  bool lo_inf = false, hi_inf = false;
  bool unbounded = false;
};

// Minimises a convex function that is quadratic between consecutive
// candidates and affine outside their range.
template <class T>
ConvexMin1D<T> minimize_convex_1d(const std::function<T(const T&)>& f, std::vector<T> candidates);

template <class T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  std::vector<T> out;
  for (auto& x : v)
    if (out.empty() || !Num<T>::eq(out.back(), x)) out.push_back(x);
  v = std::move(out);
}

}  // namespace mchp
