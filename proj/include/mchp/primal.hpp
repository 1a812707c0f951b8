#pragma once

#include "mchp/curvelib.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mchp {

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T>
struct DispatchPoint {
  std::vector<StatePoint<T>> players;  // market order: units, then consumers
  std::vector<T> flow;                 // per period, node 1 -> node 2
  T objective{0};                      // welfare
  std::vector<T> residual;             // per price index
  std::vector<bool> flat;              // per period: slack along equal marginal cost
};

template <class T>
struct PrimalSolution {
  T value{0};
  std::vector<DispatchPoint<T>> optima;  // descending pattern order
};

// Upper bounds: a player's pattern must be a bit-subset of pattern_cap and its
// quantities may not exceed q_cap.
template <class T>
struct Caps {
  std::vector<std::uint32_t> pattern_cap;
  std::vector<std::vector<T>> q_cap;

  static Caps at(const DispatchPoint<T>& x) {
    Caps c;
    for (auto& s : x.players) {
      c.pattern_cap.push_back(s.pattern);
      c.q_cap.push_back(s.q);
    }
    return c;
  }
};

inline constexpr std::uint64_t kMaxPatterns = 1ull << 20;

template <class T>
PrimalSolution<T> solve_primal(const Market<T>& m, const std::optional<Caps<T>>& caps = std::nullopt);

PrimalSolution<Rational> solve_primal(const Scenario& s);

template <class T>
T welfare_at(const Market<T>& m, const DispatchPoint<T>& x);

}  // namespace mchp
