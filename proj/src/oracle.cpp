#include "mchp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mchp::oracle {

namespace {

constexpr double kTol = 1e-9;

double d(const Rational& r) { return r.convert_to<double>(); }

double variable_cost(const VariableCostCurve& c, double x) {
  switch (c.kind) {
    case CurveKind::Affine: return d(c.slope) * x;
    case CurveKind::Quadratic: return d(c.linear) * x + d(c.quadratic) * x * x;
    case CurveKind::Piecewise: {
      double total = 0;
      for (std::size_t k = 0; k < c.pieces.size(); ++k) {
        double a = d(c.pieces[k].first);
        double b = k + 1 < c.pieces.size() ? d(c.pieces[k + 1].first) : std::numeric_limits<double>::infinity();
        if (x > a) total += d(c.pieces[k].second) * (std::min(x, b) - a);
      }
      return total;
    }
  }
  return 0;
}

// A market participant seen only through its scenario data.
struct Agent {
  const UnitSpec* unit = nullptr;
  const ConsumerSpec* cons = nullptr;
  int node = 0, sign = 1, periods = 1;

  int bits() const { return unit ? periods : static_cast<int>(cons->discrete_blocks.size()); }

  double offset(unsigned pat, int t) const {
    if (unit) return 0;
    double off = d(cons->fixed_load[t]);
    for (std::size_t k = 0; k < cons->discrete_blocks.size(); ++k)
      if (pat >> k & 1u) off += d(cons->discrete_blocks[k].quantity[t]);
    return off;
  }

  double elastic_cap(int t) const {
    if (cons->quadratic_benefit) return d(cons->quadratic_benefit->d_max);
    double cap = 0;
    for (auto& seg : cons->elastic[t]) cap += d(seg.quantity);
    return cap;
  }

  std::pair<double, double> range(unsigned pat, int t) const {
    if (unit) return (pat >> t & 1u) ? std::pair{d(unit->g_min), d(unit->g_max)} : std::pair{0.0, 0.0};
    double off = offset(pat, t);
    return {off, off + elastic_cap(t)};
  }

  double benefit(int t, double e) const {
    if (cons->quadratic_benefit)
      return d(cons->quadratic_benefit->linear) * e - d(cons->quadratic_benefit->quadratic) * e * e;
    double total = 0, left = e;
    for (auto& seg : cons->elastic[t]) {
      double take = std::min(left, d(seg.quantity));
      if (take <= 0) break;
      total += take * d(seg.price);
      left -= take;
    }
    return total;
  }

  double value(unsigned pat, const std::vector<double>& q) const {
    double v = 0;
    if (unit) {
      bool prev = unit->initial_on;
      for (int t = 0; t < periods; ++t) {
        bool on = pat >> t & 1u;
        if (on) v -= d(unit->no_load_cost) + variable_cost(unit->variable_cost, q[t]);
        if (on && !prev) v -= d(unit->startup_cost);
        prev = on;
      }
      return v;
    }
    for (int t = 0; t < periods; ++t) v += benefit(t, q[t] - offset(pat, t));
    for (std::size_t k = 0; k < cons->discrete_blocks.size(); ++k)
      if (pat >> k & 1u)
        for (auto& x : cons->discrete_blocks[k].quantity) v += d(cons->discrete_blocks[k].price) * d(x);
    return v;
  }

  bool ramp_fits(const std::vector<double>& q) const {
    if (!unit || !unit->ramp_limit) return true;
    double prev = d(unit->initial_output), lim = d(*unit->ramp_limit);
    for (double x : q) {
      if (std::fabs(x - prev) > lim + kTol) return false;
      prev = x;
    }
    return true;
  }
};

std::vector<Agent> agents_of(const Scenario& s) {
  std::vector<Agent> out;
  for (auto& u : s.units) out.push_back(Agent{&u, nullptr, u.node - 1, 1, s.periods});
  for (auto& c : s.consumers) out.push_back(Agent{nullptr, &c, c.node - 1, -1, s.periods});
  return out;
}

std::vector<double> grid_points(double lo, double hi, double step) {
  std::vector<double> pts;
  for (long k = 0;; ++k) {
    double x = lo + static_cast<double>(k) * step;
    if (x >= hi - kTol) break;
    pts.push_back(x);
  }
  pts.push_back(hi);
  return pts;
}

struct Sample {
  unsigned pattern = 0;
  std::vector<double> q;
  double value = 0;
};

// Cartesian product of per-period grids, filtered by the ramp chain.
template <class RampFn>
void product(const std::vector<std::vector<double>>& axes, unsigned pat, const Agent& a, RampFn ramp_fits,
             std::vector<Sample>& out) {
  std::vector<std::size_t> idx(axes.size(), 0);
  for (auto& ax : axes)
    if (ax.empty()) return;
  while (true) {
    std::vector<double> q(axes.size());
    for (std::size_t t = 0; t < axes.size(); ++t) q[t] = axes[t][idx[t]];
    if (ramp_fits(q)) out.push_back({pat, q, a.value(pat, q)});
    std::size_t t = 0;
    while (t < axes.size() && ++idx[t] == axes[t].size()) idx[t++] = 0;
    if (t == axes.size()) return;
  }
}

std::vector<Sample> states(const Agent& a, double step) {
  std::vector<Sample> out;
  for (unsigned pat = 0; pat < (1u << a.bits()); ++pat) {
    std::vector<std::vector<double>> axes;
    for (int t = 0; t < a.periods; ++t) {
      auto [lo, hi] = a.range(pat, t);
      axes.push_back(grid_points(lo, hi, step));
    }
    product(axes, pat, a, [&](const std::vector<double>& q) { return a.ramp_fits(q); }, out);
  }
  return out;
}

double width(const Agent& a) {
  double w = 0;
  for (unsigned pat = 0; pat < (1u << a.bits()); ++pat)
    for (int t = 0; t < a.periods; ++t) {
      auto [lo, hi] = a.range(pat, t);
      w = std::max(w, hi - lo);
    }
  return w;
}

}  // namespace

void GridSpec::check() const {
  if (!(quantity_step > 0)) throw GridError("quantity step must be positive");
  for (auto& ax : prices)
    if (!(ax.step > 0) || !(ax.hi > ax.lo)) throw GridError("price axis needs step > 0 and hi > lo");
}

PrimalSolution<double> brute_primal(const Scenario& s, const GridSpec& grid) {
  grid.check();
  auto agents = agents_of(s);
  int n = static_cast<int>(agents.size()), T = s.periods;
  int nodes = s.network.node_count();
  double cap = d(s.network.line_capacity);

  int res = 0;
  for (int i = 1; i < n; ++i)
    if (width(agents[i]) > width(agents[res])) res = i;

  std::vector<std::vector<Sample>> table(n);
  double count = static_cast<double>(1u << agents[res].bits());
  for (int i = 0; i < n; ++i) {
    if (i == res) continue;
    table[i] = states(agents[i], grid.quantity_step);
    count *= static_cast<double>(table[i].size());
    if (count > grid.max_points) throw GridError("primal grid exceeds the point budget");
  }

  const Agent& r = agents[res];
  PrimalSolution<double> best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<int> pick(n, -1);
  std::vector<double> net(nodes * T, 0.0);

  auto leaf = [&](double partial) {
    std::vector<double> flow(T, 0.0);
    std::vector<double> need(T);
    for (int t = 0; t < T; ++t) {
      double own = net[r.node * T + t];
      double target = 0;
      if (nodes == 2) {
        double other = net[(1 - r.node) * T + t];
        flow[t] = r.node == 0 ? -other : other;
        if (std::fabs(flow[t]) > cap + kTol) return;
        target = r.node == 0 ? flow[t] : -flow[t];
      }
      need[t] = (target - own) / r.sign;
    }
    for (unsigned pat = 0; pat < (1u << r.bits()); ++pat) {
      bool ok = r.ramp_fits(need);
      for (int t = 0; t < T && ok; ++t) {
        auto [lo, hi] = r.range(pat, t);
        ok = need[t] >= lo - kTol && need[t] <= hi + kTol;
      }
      if (!ok) continue;
      double total = partial + r.value(pat, need);
      if (total > best.value + kTol) {
        best.value = total;
        DispatchPoint<double> x;
        for (int i = 0; i < n; ++i) {
          if (i == res) x.players.push_back({pat, need});
          else x.players.push_back({table[i][pick[i]].pattern, table[i][pick[i]].q});
        }
        x.flow = flow;
        x.objective = total;
        best.optima = {x};
      }
    }
  };

  auto walk = [&](auto&& self, int i, double partial) -> void {
    if (i == n) return leaf(partial);
    if (i == res) return self(self, i + 1, partial);
    const Agent& a = agents[i];
    for (std::size_t k = 0; k < table[i].size(); ++k) {
      const Sample& smp = table[i][k];
      pick[i] = static_cast<int>(k);
      for (int t = 0; t < T; ++t) net[a.node * T + t] += a.sign * smp.q[t];
      self(self, i + 1, partial + smp.value);
      for (int t = 0; t < T; ++t) net[a.node * T + t] -= a.sign * smp.q[t];
    }
  };
  walk(walk, 0, 0.0);
  if (best.optima.empty()) throw InfeasibleError("no grid dispatch balances the market");
  return best;
}

namespace {

// Profit of each sampled point is affine in the prices: coef . p + value.
struct Affine {
  std::vector<std::pair<int, double>> coef;
  double value = 0;
};

std::vector<std::vector<Affine>> sample_sets(const Scenario& s, const PricingSets<double>& sets, double step) {
  auto agents = agents_of(s);
  std::vector<std::vector<Affine>> out(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Agent& a = agents[i];
    std::vector<Sample> pts;
    for (const auto& pr : sets.sets[i].profiles) {
      std::vector<std::vector<double>> axes;
      for (const auto& u : pr.q) {
        std::vector<double> ax;
        const auto closed = u.closure();
        for (const auto& part : closed.parts())
          for (double x : grid_points(part.lo, part.hi, step)) ax.push_back(x);
        axes.push_back(ax);
      }
      auto fits = [&](const std::vector<double>& q) {
        if (!pr.ramp) return true;
        double prev = pr.ramp->start;
        for (double x : q) {
          if (std::fabs(x - prev) > pr.ramp->limit + kTol) return false;
          prev = x;
        }
        return true;
      };
      product(axes, pr.pattern, a, fits, pts);
    }
    for (auto& p : pts) {
      Affine f;
      for (int t = 0; t < a.periods; ++t) f.coef.emplace_back(a.node * a.periods + t, a.sign * p.q[t]);
      f.value = p.value;
      out[i].push_back(std::move(f));
    }
  }
  return out;
}

double evaluate(const Scenario& s, const std::vector<std::vector<Affine>>& samples, const std::vector<double>& p) {
  double total = 0;
  for (const auto& player : samples) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Affine& f : player) {
      double v = f.value;
      for (auto& [k, c] : f.coef) v += c * p[k];
      best = std::max(best, v);
    }
    total += best;
  }
  if (s.network.node_count() == 2)
    for (int t = 0; t < s.periods; ++t) total += d(s.network.line_capacity) * std::fabs(p[s.periods + t] - p[t]);
  return total;
}

}  // namespace

double sampled_dual(const Scenario& s, const PricingSets<double>& sets, const std::vector<double>& price,
                    double quantity_step) {
  if (!(quantity_step > 0)) throw GridError("quantity step must be positive");
  return evaluate(s, sample_sets(s, sets, quantity_step), price);
}

DualScan grid_dual_scan(const Scenario& s, const PricingSets<double>& sets, const GridSpec& grid, double tolerance) {
  grid.check();
  int dim = s.network.node_count() * s.periods;
  if (static_cast<int>(grid.prices.size()) != dim) throw GridError("one price axis per node and period");
  std::vector<std::vector<double>> axes;
  double count = 1;
  for (auto& ax : grid.prices) {
    axes.push_back(grid_points(ax.lo, ax.hi, ax.step));
    count *= static_cast<double>(axes.back().size());
  }
  if (count > grid.max_points) throw GridError("price grid exceeds the point budget");
  auto samples = sample_sets(s, sets, grid.quantity_step);

  auto price_at = [&](std::size_t flat) {
    std::vector<double> p(dim);
    for (int k = 0; k < dim; ++k) {
      p[k] = axes[k][flat % axes[k].size()];
      flat /= axes[k].size();
    }
    return p;
  };
  std::vector<double> values(static_cast<std::size_t>(count));
  for (std::size_t f = 0; f < values.size(); ++f) values[f] = evaluate(s, samples, price_at(f));
  std::size_t arg = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  DualScan scan;
  scan.tolerance = tolerance;
  scan.best_value = values[arg];
  scan.best_price = price_at(arg);
  for (std::size_t f = 0; f < values.size(); ++f)
    if (values[f] <= scan.best_value + tolerance) scan.near.push_back({price_at(f), values[f]});
  return scan;
}

bool DualScan::covers(const std::vector<double>& p, double radius) const {
  for (auto& sp : near) {
    double dist = 0;
    for (std::size_t k = 0; k < p.size(); ++k) dist = std::max(dist, std::fabs(sp.price[k] - p[k]));
    if (dist <= radius + kTol) return true;
  }
  return false;
}

std::vector<std::pair<double, double>> DualScan::extent() const {
  std::vector<std::pair<double, double>> out;
  if (near.empty()) return out;
  for (std::size_t k = 0; k < near.front().price.size(); ++k) {
    double lo = near.front().price[k], hi = lo;
    for (auto& sp : near) {
      lo = std::min(lo, sp.price[k]);
      hi = std::max(hi, sp.price[k]);
    }
    out.emplace_back(lo, hi);
  }
  return out;
}

}  // namespace mchp::oracle
