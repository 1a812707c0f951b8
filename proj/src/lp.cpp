#include "mchp/lp.hpp"

#include <stdexcept>

namespace mchp {

namespace {

template <class T>
class Tableau {
 public:
  Tableau(int m, int n) : m_(m), n_(n), a_(m + 1, std::vector<T>(n + 1, T(0))), basis_(m, -1) {}

  T& at(int i, int j) { return a_[i][j]; }
  T& rhs(int i) { return a_[i][n_]; }
  T& obj(int j) { return a_[m_][j]; }
  std::vector<int>& basis() { return basis_; }

  void pivot(int r, int c) {
    T p = a_[r][c];
    for (auto& v : a_[r]) v /= p;
    for (int i = 0; i <= m_; ++i) {
      if (i == r || Num<T>::is_zero(a_[i][c])) continue;
      T f = a_[i][c];
      for (int j = 0; j <= n_; ++j)
        if (!Num<T>::is_zero(a_[r][j])) a_[i][j] -= f * a_[r][j];
      a_[i][c] = T(0);
    }
    basis_[r] = c;
  }

  // Objective row holds reduced costs of a minimisation; returns false when unbounded.
  bool run(const std::vector<bool>& allowed) {
    while (true) {
      int enter = -1;
      for (int j = 0; j < n_; ++j) {
        if (allowed[j] && Num<T>::lt(a_[m_][j], T(0))) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      T best{0};
      for (int i = 0; i < m_; ++i) {
        if (!Num<T>::lt(T(0), a_[i][enter])) continue;
        T ratio = a_[i][n_] / a_[i][enter];
        if (leave < 0 || Num<T>::lt(ratio, best) ||
            (Num<T>::eq(ratio, best) && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

 private:
  int m_, n_;
  std::vector<std::vector<T>> a_;
  std::vector<int> basis_;
};

}  // namespace

template <class T>
LpResult<T> solve_lp(const LinearProgram<T>& lp) {
  int nv = lp.vars();
  // Column map: each variable gets a positive column, free ones also a negative.
  std::vector<int> pos(nv), neg(nv, -1);
  int cols = 0;
  for (int j = 0; j < nv; ++j) {
    pos[j] = cols++;
    if (lp.free[j]) neg[j] = cols++;
  }
  int m = static_cast<int>(lp.rows.size());
  int slack0 = cols;
  int nslack = 0;
  for (auto& r : lp.rows)
    if (r.sense != Sense::Eq) ++nslack;
  int art0 = slack0 + nslack;
  int n = art0 + m;
  Tableau<T> tab(m, n);

  int s = slack0;
  for (int i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    bool flip = Num<T>::lt(row.rhs, T(0));
    T sg = flip ? T(-1) : T(1);
    for (auto& [j, v] : row.terms) {
      tab.at(i, pos[j]) += sg * v;
      if (neg[j] >= 0) tab.at(i, neg[j]) -= sg * v;
    }
    if (row.sense == Sense::Le) tab.at(i, s++) = sg;
    if (row.sense == Sense::Ge) tab.at(i, s++) = -sg;
    tab.rhs(i) = sg * row.rhs;
    tab.at(i, art0 + i) = T(1);
    tab.basis()[i] = art0 + i;
  }

  // Phase one: minimise the sum of artificials.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= n; ++j)
      if (j < art0 || j == n) tab.obj(j) -= tab.at(i, j);
  std::vector<bool> allowed(n, true);
  tab.run(allowed);
  LpResult<T> res;
  if (Num<T>::lt(T(0), -tab.obj(n))) return res;

  // Drive remaining artificials out of the basis.
  for (int i = 0; i < m; ++i) {
    if (tab.basis()[i] < art0) continue;
    for (int j = 0; j < art0; ++j) {
      if (!Num<T>::is_zero(tab.at(i, j))) {
        tab.pivot(i, j);
        break;
      }
    }
  }
  for (int j = art0; j < n; ++j) allowed[j] = false;

  for (int j = 0; j <= n; ++j) tab.obj(j) = T(0);
  for (int j = 0; j < nv; ++j) {
    tab.obj(pos[j]) = lp.cost[j];
    if (neg[j] >= 0) tab.obj(neg[j]) = -lp.cost[j];
  }
  for (int i = 0; i < m; ++i) {
    int b = tab.basis()[i];
    if (b >= n) continue;
    T f = tab.obj(b);
    if (Num<T>::is_zero(f)) continue;
    for (int j = 0; j <= n; ++j) tab.obj(j) -= f * tab.at(i, j);
  }
  if (!tab.run(allowed)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  std::vector<T> col(n, T(0));
  for (int i = 0; i < m; ++i)
    if (tab.basis()[i] < n) col[tab.basis()[i]] = tab.rhs(i);
  res.x.assign(nv, T(0));
  res.value = T(0);
  for (int j = 0; j < nv; ++j) {
    res.x[j] = col[pos[j]] - (neg[j] >= 0 ? col[neg[j]] : T(0));
    res.value += lp.cost[j] * res.x[j];
  }
  res.status = LpStatus::Optimal;
  return res;
}

template LpResult<Rational> solve_lp<Rational>(const LinearProgram<Rational>&);
template LpResult<double> solve_lp<double>(const LinearProgram<double>&);

}  // namespace mchp
