// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "properties.hpp"

#include "mchp/oracle.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

using namespace mchp;
using namespace mchp::testing;

namespace {

constexpr double kPriceTol = 0.005;
constexpr double kPennyTol = 0.01;
constexpr double kFloatTol = 1e-9;
constexpr double kGridTol = 0.02;
constexpr int kParamDraws = 20;

struct Criterion {
  std::string name;
  std::vector<std::string> failed;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

template <class T>
struct Priced {
  Market<T> m;
  OpportunitySets<T> opp;
  PricingSets<T> chp, mod;
  PrimalSolution<T> primal;

  explicit Priced(const Scenario& s)
      : m(Market<T>::from(s)),
        opp(build_opportunity_sets(m)),
        chp(original_sets(m)),
        mod(modified_sets(m, opp, Epsilon<T>::plus_zero())),
        primal(solve_primal(m)) {}

  UpliftReport<T> pay(const PricingSets<T>& sets, RoundingPolicy r) const {
    return uplift_report(m, sets, solve_dual(m, sets).canonical, primal, r);
  }
};

template <class T>
T uplift_of(const UpliftReport<T>& u, const std::string& id) {
  for (auto& r : u.rows)
    if (r.id == id) return r.uplift;
  throw std::out_of_range("no row " + id);
}

std::string money(const R& x) { return format_fixed(x); }
bool near(const R& x, const char* target, double tol) {
  return std::fabs((x - q(target)).convert_to<double>()) <= tol;
}

Criterion fixed_load_pair() {
  Criterion c{"fixed-load pair, both units committed"};
  Priced<R> e(builtin_example(3));
  auto chp = e.pay(e.chp, RoundingPolicy::Cent);
  auto mod = e.pay(e.mod, RoundingPolicy::Cent);
  c.expect(near(chp.price[0], "30.09", kPriceTol), "CHP price " + exact_text(chp.price[0]));
  c.expect(chp.paid_price[0] == q("30.09"), "CHP reported price");
  c.expect(uplift_of(chp, "unit1") == q("403.60"), "CHP unit1 " + money(uplift_of(chp, "unit1")));
  c.expect(uplift_of(chp, "unit2") == q("7.80"), "CHP unit2 " + money(uplift_of(chp, "unit2")));
  c.expect(chp.total_uplift == q("411.40"), "CHP total " + money(chp.total_uplift));
  c.expect(near(mod.price[0], "30.13", kPriceTol), "modified price " + exact_text(mod.price[0]));
  c.expect(mod.paid_price[0] == q("30.13"), "modified reported price");
  c.expect(uplift_of(mod, "unit1") == 0, "modified unit1");
  c.expect(uplift_of(mod, "unit2") == q("4.60"), "modified unit2 " + money(uplift_of(mod, "unit2")));
  c.expect(mod.total_uplift == q("4.60"), "modified total " + money(mod.total_uplift));
  return c;
}

Criterion flexible_first_unit() {
  Criterion c{"fixed-load pair, first unit without minimum output"};
  Priced<R> e(builtin_example(4));
  auto mod = e.pay(e.mod, RoundingPolicy::Cent);
  c.expect(mod.paid_price[0] == q("30.09"), "modified reported price " + money(mod.paid_price[0]));
  c.expect(mod.total_uplift == q("7.80"), "modified total " + money(mod.total_uplift));

  auto swapped = e.mod;
  swapped.sets[0] = original_set(e.m.players[0]);
  swapped.inflatable[0] = {};
  auto u = uplift_report(e.m, swapped, solve_dual(e.m, e.mod).canonical, e.primal, RoundingPolicy::Cent);
  R unit1 = uplift_of(u, "unit1");
  c.expect(unit1 == q("1203.60"), "unit1 uplift with its original set is " + money(unit1) + ", expected 1203.60");
  c.note("(p - a1)(g1_max - g1*) = (30.09 - 20)(160 - 120) = 403.60");
  return c;
}

Criterion two_bids() {
  Criterion c{"two price-sensitive bids and their aggregate"};
  Priced<R> e(builtin_example(5));
  for (auto* sets : {&e.chp, &e.mod}) {
    auto u = e.pay(*sets, RoundingPolicy::Cent);
    c.expect(u.price[0] == q("20.20"), sets->label + " price " + exact_text(u.price[0]));
    c.expect(uplift_of(u, "producer") == 0, sets->label + " producer");
    c.expect(uplift_of(u, "consumer1") == 0, sets->label + " consumer1");
    c.expect(uplift_of(u, "consumer2") == 780, sets->label + " consumer2 " + money(uplift_of(u, "consumer2")));
  }
  Priced<R> agg(aggregated_example5());
  auto chp = agg.pay(agg.chp, RoundingPolicy::Cent);
  auto mod = agg.pay(agg.mod, RoundingPolicy::Cent);
  c.expect(chp.total_uplift == 780, "aggregate CHP total " + money(chp.total_uplift));
  c.expect(mod.total_uplift == 0, "aggregate modified total " + money(mod.total_uplift));
  return c;
}

Criterion twin_units() {
  Criterion c{"twin units, one bid"};
  Priced<R> e(builtin_example(6));
  auto chp = e.pay(e.chp, RoundingPolicy::Cent);
  auto mod = e.pay(e.mod, RoundingPolicy::Cent);
  c.expect(chp.paid_price[0] == q("46.38"), "CHP reported price " + money(chp.paid_price[0]));
  c.expect(uplift_of(chp, "consumer") == q("72.40"), "CHP consumer " + money(uplift_of(chp, "consumer")));
  c.expect(mod.paid_price[0] == q("46.38"), "modified reported price");
  c.expect(mod.total_uplift == 0, "modified total " + money(mod.total_uplift));

  auto swapped = e.mod;
  swapped.sets[2] = original_set(e.m.players[2]);
  swapped.inflatable[2] = {};
  auto before = solve_dual(e.m, e.mod), after = solve_dual(e.m, swapped);
  c.expect(before.interval == after.interval, "price set changed with the original consumer set");
  auto u = uplift_report(e.m, swapped, after.canonical, e.primal, RoundingPolicy::Cent);
  c.expect(uplift_of(u, "consumer") == q("72.40"), "consumer uplift with its original set " +
                                                       money(uplift_of(u, "consumer")));
  return c;
}

Criterion block_bid() {
  Criterion c{"one unit, elastic bid and block bid"};
  Priced<R> e(builtin_example(7));
  auto chp = e.pay(e.chp, RoundingPolicy::Cent);
  auto mod = e.pay(e.mod, RoundingPolicy::Cent);
  c.expect(chp.price[0] == 80, "CHP price " + exact_text(chp.price[0]));
  c.expect(mod.price[0] == 80, "modified price " + exact_text(mod.price[0]));
  c.expect(chp.total_uplift == 1000, "CHP total " + money(chp.total_uplift));
  c.expect(mod.total_uplift == 0, "modified total " + money(mod.total_uplift));
  return c;
}

Criterion two_nodes() {
  Criterion c{"two nodes with a congested line"};
  Priced<R> e(builtin_example(8));
  auto chp = e.pay(e.chp, RoundingPolicy::Cent);
  c.expect(near(chp.price[0], "15.10", kPriceTol) && near(chp.price[1], "10", kPriceTol),
           "CHP prices " + exact_text(chp.price[0]) + ", " + exact_text(chp.price[1]));
  c.expect(uplift_of(chp, "producer1") == 5, "CHP producer1");
  c.expect(uplift_of(chp, "producer2") == 0, "CHP producer2");
  c.expect(uplift_of(chp, "FTR holders") == 510, "CHP congestion row " + money(uplift_of(chp, "FTR holders")));
  c.expect(chp.total_uplift == 515, "CHP total " + money(chp.total_uplift));

  auto mod = e.pay(e.mod, RoundingPolicy::Exact);
  c.expect(mod.price[0] == mod.price[1], "modified prices differ across nodes");
  R rent = 0;
  for (auto& r : mod.rows)
    if (r.id == "FTR holders") rent = r.pi_star;
  c.expect(rent == 0, "modified congestion rent " + money(rent));
  c.expect(mod.total_uplift == 0, "modified total " + money(mod.total_uplift));
  return c;
}

Criterion ramped_unit() {
  Criterion c{"two periods with a ramp limit"};
  auto s = builtin_example(9);
  Priced<R> e(s);
  auto chp = e.pay(e.chp, RoundingPolicy::Cent);
  c.expect(chp.price == std::vector<R>{q("31.60"), R(10)},
           "CHP canonical " + exact_text(chp.price[0]) + ", " + exact_text(chp.price[1]));
  auto& row = chp.rows.at(0);
  c.expect(row.pi_star == 468 && row.pi_plus == 500 && row.uplift == 32,
           "CHP producer " + money(row.pi_star) + " / " + money(row.pi_plus) + " / " + money(row.uplift));

  auto g = gap_summary(e.m, e.opp);
  c.expect(g.modified_gap == 0, "modified gap " + exact_text(g.modified_gap));
  std::vector<R> listed{q("32.67"), R(10)};
  c.expect(price_membership(e.m, e.mod, listed).member, "(32.67, 10) is not an optimal modified price");
  auto at = uplift_report(e.m, e.mod, listed, e.primal, RoundingPolicy::Exact);
  auto& prod = at.rows.at(0);
  c.expect(near(prod.pi_star, "553.33", kPennyTol) && near(prod.pi_plus, "553.33", kPennyTol),
           "producer profit at (32.67, 10) is " + money(prod.pi_star) + " / " + money(prod.pi_plus) +
               ", expected 553.33");
  auto third = uplift_report(e.m, e.mod, {R(98, 3), R(10)}, e.primal, RoundingPolicy::Exact);
  c.note("at (98/3, 10) the producer profit is " + money(third.rows.at(0).pi_star));

  auto canonical = solve_dual(e.m, e.mod).canonical;
  auto md = Market<double>::from(s);
  auto sets = modified_sets(md, build_opportunity_sets(md), Epsilon<double>::plus_zero());
  oracle::GridSpec grid;
  grid.prices = {{20, 40, 0.01}, {5, 15, 0.01}};
  auto scan = oracle::grid_dual_scan(s, sets, grid, 1e-6);
  c.expect(scan.covers({32.67, 10}, kGridTol), "grid scan misses (32.67, 10)");
  c.expect(scan.covers({canonical[0].convert_to<double>(), canonical[1].convert_to<double>()}, kGridTol),
           "grid scan misses the canonical price");
  c.note("canonical modified price (" + exact_text(canonical[0]) + ", " + exact_text(canonical[1]) + ")");
  return c;
}

Criterion startup_only(std::mt19937& rng) {
  Criterion c{"single unit with no-load cost, " + std::to_string(kParamDraws) + " parameter draws"};
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int drawn = 0;
  while (drawn < kParamDraws) {
    ExampleParams p;
    p.a = pick(1, 30);
    p.b = p.a + pick(1, 30);
    p.w = pick(1, 2000);
    p.g_max = pick(10, 300);
    p.d_max = pick(1, 100);
    Scenario s;
    try {
      s = builtin_example(1, p);
    } catch (const ScenarioError&) {
      continue;
    }
    ++drawn;
    std::string tag = " (a=" + exact_text(p.a) + " b=" + exact_text(p.b) + " w=" + exact_text(p.w) +
                      " g_max=" + exact_text(p.g_max) + " d_max=" + exact_text(p.d_max) + ")";
    Priced<R> e(s);
    bool zero = e.primal.value == 0;
    for (auto& x : e.primal.optima)
      for (auto& pl : x.players) zero = zero && pl.q[0] == 0;
    c.expect(zero, "dispatch not all zero" + tag);
    auto chp = e.pay(e.chp, RoundingPolicy::Exact);
    R threshold = p.a + p.w / p.g_max;
    c.expect(chp.price[0] == threshold, "CHP price " + exact_text(chp.price[0]) + tag);
    c.expect(uplift_of(chp, "consumer") == (p.b - threshold) * p.d_max, "consumer uplift" + tag);
    auto r = solve_dual(e.m, e.mod);
    Interval<R> ray = Interval<R>::point(p.b);
    ray.hi_inf = true;
    c.expect(r.interval == IntervalUnion<R>{ray}, "modified price set " + r.interval->str() + tag);
    c.expect(e.pay(e.mod, RoundingPolicy::Exact).total_uplift == 0, "modified total" + tag);
  }
  return c;
}

Criterion sloped_demand(std::mt19937& rng) {
  Criterion c{"single unit against sloped demand, " + std::to_string(kParamDraws) + " parameter draws"};
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int drawn = 0;
  while (drawn < kParamDraws) {
    ExampleParams p = default_params(2);
    p.a = pick(1, 20);
    p.w = pick(1, 60);
    p.d_max = pick(1, 200);
    p.g_max = p.d_max + pick(1, 100);
    Scenario s;
    try {
      s = builtin_example(2, p);
    } catch (const ScenarioError&) {
      continue;
    }
    ++drawn;
    std::string tag = " (a=" + exact_text(p.a) + " w=" + exact_text(p.w) + " d_max=" + exact_text(p.d_max) +
                      " g_max=" + exact_text(p.g_max) + ")";
    R two_g = 2 * p.g_max;
    R closed = p.w * (1 - p.d_max / two_g + p.w * p.d_max / (p.a * two_g * two_g));
    // the convex hull side stays rational; only the modified sets need a root
    auto m = Market<R>::from(s);
    auto chp = original_sets(m);
    R chp_total = uplift_report(m, chp, solve_dual(m, chp).canonical, solve_primal(m), RoundingPolicy::Exact).total_uplift;
    c.expect(chp_total == closed, "CHP total " + exact_text(chp_total) + " vs " + exact_text(closed) + tag);
    c.expect(closed > p.w / 2, "CHP total not above w/2" + tag);

    Priced<double> approx(s);
    double mod_total = approx.pay(approx.mod, RoundingPolicy::Exact).total_uplift;
    double a = p.a.convert_to<double>(), w = p.w.convert_to<double>(), d = p.d_max.convert_to<double>();
    c.expect(std::fabs(mod_total - w * w / (a * d)) <= kFloatTol,
             "modified total " + std::to_string(mod_total) + tag);
    c.expect(mod_total <= w / 6 + kFloatTol, "modified total above w/6" + tag);
  }
  return c;
}

Criterion random_markets() {
  Criterion c{"properties on random single-period markets"};
  PropertyRun run;
  auto t = run_properties(run);
  for (auto& f : t.failures) c.expect(false, f);
  for (auto& [name, n] : t.counts) c.note(name + " " + std::to_string(n.first) + "/" + std::to_string(n.second));
  return c;
}

}  // namespace

int main() {
  std::mt19937 rng(20240615);
  std::vector<std::function<Criterion()>> criteria{
      fixed_load_pair, flexible_first_unit, two_bids, twin_units, block_bid, two_nodes, ramped_unit,
      [&] { return startup_only(rng); }, [&] { return sloped_demand(rng); }, random_markets};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Criterion c;
    try {
      c = criteria[i]();
    } catch (const std::exception& e) {
      c.name = "criterion threw";
      c.failed.push_back(e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ok = c.failed.empty();
    failed += !ok;
    std::ostringstream head;
    head << (ok ? "PASS" : "FAIL") << "  " << (i + 1) << "  " << c.name << "  (" << std::fixed
         << std::setprecision(2) << secs << " s)";
    std::cout << head.str() << "\n";
    for (auto& f : c.failed) std::cout << "        - " << f << "\n";
    for (auto& n : c.notes) std::cout << "        . " << n << "\n";
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
