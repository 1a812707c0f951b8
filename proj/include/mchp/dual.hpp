#pragma once

#include "mchp/feasets.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace mchp {

struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

// Individual sets entering the dual, one per player.
template <class T>
struct PricingSets {
  std::string label;
  std::vector<StatusOutputSet<T>> sets;
  // At the +0 limit: the opportunity boxes that would be inflated for small
  // epsilon. Used to pick the limit of the optimal price sets.
  std::vector<StatusOutputSet<T>> inflatable;
};

template <class T>
PricingSets<T> original_sets(const Market<T>& m);

template <class T>
PricingSets<T> modified_sets(const Market<T>& m, const OpportunitySets<T>& opp, const Epsilon<T>& eps);

template <class T>
struct MixtureTerm {
  T weight;
  StatePoint<T> point;
};

// Zero excess supply written as a convex combination of argmax points.
template <class T>
struct Certificate {
  bool member = false;
  std::vector<std::vector<MixtureTerm<T>>> mixture;  // per player
  std::vector<T> flow;                               // per period
};

template <class T>
struct PriceSetReport {
  int dim = 1;
  std::vector<T> canonical;  // lexicographically smallest optimal price
  T value{0};
  std::optional<IntervalUnion<T>> interval;  // whole optimal set when dim == 1
  std::vector<Interval<T>> bounds;           // per-coordinate range over the optimal set
  Certificate<T> certificate;
};

template <class T>
T dual_value(const Market<T>& m, const PricingSets<T>& s, const std::vector<T>& p);

template <class T>
PriceSetReport<T> solve_dual(const Market<T>& m, const PricingSets<T>& s);

template <class T>
Certificate<T> price_membership(const Market<T>& m, const PricingSets<T>& s, const std::vector<T>& p);

template <class T>
struct UpliftRow {
  std::string id;
  T pi_star{0}, pi_plus{0}, uplift{0};
};

template <class T>
struct UpliftReport {
  std::vector<T> price;       // optimal price as computed
  std::vector<T> paid_price;  // after the rounding policy
  RoundingPolicy rounding = RoundingPolicy::Exact;
  std::vector<UpliftRow<T>> rows;  // players, then "FTR holders" for two nodes
  T total_star{0}, total_plus{0}, total_uplift{0};
  T gap{0};  // dual value at the unrounded price minus welfare
};

template <class T>
UpliftReport<T> uplift_report(const Market<T>& m, const PricingSets<T>& s, const std::vector<T>& p,
                              const PrimalSolution<T>& primal, RoundingPolicy rounding);

template <class T>
struct GapSummary {
  T welfare{0};
  T chp_dual{0}, modified_dual{0};
  T chp_gap{0}, modified_gap{0};
};

// Checks 0 <= modified gap <= convex hull gap; throws ConsistencyError otherwise.
template <class T>
GapSummary<T> gap_summary(const Market<T>& m, const OpportunitySets<T>& opp,
                          const Epsilon<T>& eps = Epsilon<T>::plus_zero());

}  // namespace mchp
