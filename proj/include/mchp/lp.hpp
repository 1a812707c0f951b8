#pragma once

#include "mchp/numeric.hpp"

#include <vector>

namespace mchp {

enum class Sense { Le, Ge, Eq };
enum class LpStatus { Optimal, Infeasible, Unbounded };

// minimize c.x subject to rows, x_j >= 0 unless marked free.
template <class T>
struct LinearProgram {
  struct Row {
    std::vector<std::pair<int, T>> terms;
    Sense sense = Sense::Le;
    T rhs{0};
  };

  explicit LinearProgram(int vars) : cost(vars, T(0)), free(vars, false) {}

  int add_var(bool is_free = false, T c = T(0)) {
    cost.push_back(std::move(c));
    free.push_back(is_free);
    return static_cast<int>(cost.size()) - 1;
  }
  void add_row(std::vector<std::pair<int, T>> terms, Sense s, T rhs) {
    rows.push_back(Row{std::move(terms), s, std::move(rhs)});
  }
  int vars() const { return static_cast<int>(cost.size()); }

  std::vector<T> cost;
  std::vector<bool> free;
  std::vector<Row> rows;
};

template <class T>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  T value{0};
  std::vector<T> x;
};

// Two-phase dense simplex with Bland's rule.
template <class T>
LpResult<T> solve_lp(const LinearProgram<T>& lp);

}  // namespace mchp
