#include "mchp/report.hpp"

#include "mchp/oracle.hpp"

#include <json.hpp>

#include <chrono>
#include <functional>
#include <iomanip>
#include <sstream>

namespace mchp {

using nlohmann::ordered_json;

namespace {

Money money(const Rational& x) { return {x.convert_to<double>(), format_fixed(x, 2), exact_text(x)}; }
Money money(double x) { return {x, format_fixed(x, 2), ""}; }

template <class T>
std::vector<Money> monies(const std::vector<T>& xs) {
  std::vector<Money> out;
  for (auto& x : xs) out.push_back(money(x));
  return out;
}

// Prices are shown the way they are paid: rounded half up to the cent.
template <class T>
std::vector<Money> prices(const std::vector<T>& xs) {
  auto out = monies(xs);
  for (std::size_t k = 0; k < xs.size(); ++k) out[k].shown = format_fixed(round_to_cents(xs[k]), 2);
  return out;
}

template <class T>
PaymentLine payment(const UpliftRow<T>& r) {
  return {r.id, money(r.pi_star), money(r.pi_plus), money(r.uplift)};
}

template <class T>
std::string price_set_text(const PriceSetReport<T>& d) {
  if (d.interval) return d.interval->str();
  std::string s;
  for (std::size_t k = 0; k < d.bounds.size(); ++k) {
    if (k) s += " x ";
    s += IntervalUnion<T>{d.bounds[k]}.str();
  }
  return s;
}

template <class T>
struct Priced {
  PricingSets<T> sets;
  PriceSetReport<T> dual;
  UpliftReport<T> uplift;
};

template <class T>
Priced<T> price_with(const Market<T>& m, const PrimalSolution<T>& primal, PricingSets<T> sets) {
  auto dual = solve_dual(m, sets);
  auto up = uplift_report(m, sets, dual.canonical, primal, m.rounding);
  return {std::move(sets), std::move(dual), std::move(up)};
}

template <class T>
Epsilon<T> epsilon_of(const RunOptions& o, int periods) {
  if (!o.epsilon) return Epsilon<T>::plus_zero();
  return Epsilon<T>::uniform(Num<T>::from(*o.epsilon), periods);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

template <class T>
MethodReport method_report(const Market<T>& m, const PrimalSolution<T>& primal, bool modified, const RunOptions& o,
                           const OpportunitySets<T>* opp) {
  auto sets = modified ? modified_sets(m, *opp, epsilon_of<T>(o, m.periods)) : original_sets(m);
  auto p = price_with(m, primal, std::move(sets));
  MethodReport r;
  r.method = modified ? "mchp" : "chp";
  r.sets_label = p.sets.label;
  r.arithmetic = Num<T>::name;
  r.price_set = price_set_text(p.dual);
  r.price = prices(p.uplift.price);
  r.paid_price = prices(p.uplift.paid_price);
  r.dual_value = money(p.dual.value);
  r.gap = money(p.uplift.gap);
  r.certified = p.dual.certificate.member;
  for (auto& s : p.sets.sets) r.player_sets.push_back(s.str());
  if (modified)
    for (auto mth : opp->method) r.set_methods.push_back(method_name(mth));
  for (auto& row : p.uplift.rows) r.rows.push_back(payment(row));
  r.total = {"Total", money(p.uplift.total_star), money(p.uplift.total_plus), money(p.uplift.total_uplift)};
  return r;
}

template <class T>
void fill_dispatch(RunReport& rep, const Market<T>& m, const PrimalSolution<T>& primal) {
  rep.welfare = money(primal.value);
  const auto& x = primal.optima.at(0);
  for (std::size_t i = 0; i < m.players.size(); ++i)
    rep.dispatch.push_back({m.players[i].id, m.players[i].pattern_text(x.players[i].pattern), monies(x.players[i].q)});
  if (m.nodes == 2) rep.flow = monies(x.flow);
}

// Runs one method in exact arithmetic, falling back to floating point when an
// irrational quantity shows up.
MethodReport run_method(const Scenario& s, bool modified, const RunOptions& o) {
  try {
    auto m = Market<Rational>::from(s);
    auto primal = solve_primal(m);
    std::optional<OpportunitySets<Rational>> opp;
    if (modified) opp = build_opportunity_sets(m, o.resolution);
    return method_report(m, primal, modified, o, opp ? &*opp : nullptr);
  } catch (const InexactError&) {
    auto m = Market<double>::from(s);
    auto primal = solve_primal(m);
    std::optional<OpportunitySets<double>> opp;
    if (modified) opp = build_opportunity_sets(m, o.resolution.convert_to<double>());
    return method_report(m, primal, modified, o, opp ? &*opp : nullptr);
  }
}

void oracle_checks(RunReport& rep, const Scenario& s, const RunOptions& o) {
  constexpr double kSlack = 1e-6;
  double step = o.resolution.convert_to<double>();
  oracle::GridSpec grid;
  grid.quantity_step = step;
  try {
    auto brute = oracle::brute_primal(s, grid);
    // Grid points are feasible, so the grid can only fall short of the optimum.
    rep.oracle.push_back({"welfare", rep.welfare.value, brute.value, brute.value <= rep.welfare.value + kSlack});
  } catch (const oracle::GridError& e) {
    rep.oracle.push_back({std::string("welfare skipped: ") + e.what(), rep.welfare.value, 0, true});
  }
  auto m = Market<double>::from(s);
  std::optional<OpportunitySets<double>> opp;
  for (auto& mr : rep.methods) {
    PricingSets<double> sets;
    if (mr.method == "chp") {
      sets = original_sets(m);
    } else {
      if (!opp) opp = build_opportunity_sets(m, step);
      sets = modified_sets(m, *opp, epsilon_of<double>(o, m.periods));
    }
    std::vector<double> p;
    for (auto& x : mr.price) p.push_back(x.value);
    double sampled = oracle::sampled_dual(s, sets, p, step);
    // Sampling sees a subset of each pricing set, so it cannot exceed the dual.
    rep.oracle.push_back({mr.method + " dual at price", mr.dual_value.value, sampled,
                          sampled <= mr.dual_value.value + kSlack * std::max(1.0, std::fabs(sampled))});
  }
}

}  // namespace

std::string scenario_digest(const Scenario& s) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << std::hash<std::string>{}(serialize_scenario(s));
  return os.str();
}

RunReport run_price(const Scenario& input, const RunOptions& o) {
  Scenario s = input;
  if (o.rounding) s.rounding = *o.rounding;
  validate(s);
  RunReport rep;
  rep.scenario = s.name;
  rep.digest = scenario_digest(s);

  auto t0 = std::chrono::steady_clock::now();
  try {
    auto m = Market<Rational>::from(s);
    fill_dispatch(rep, m, solve_primal(m));
  } catch (const InexactError&) {
    auto m = Market<double>::from(s);
    fill_dispatch(rep, m, solve_primal(m));
  }
  rep.timings_ms.emplace_back("primal", elapsed_ms(t0));

  if (o.method != Method::Mchp) {
    t0 = std::chrono::steady_clock::now();
    rep.methods.push_back(run_method(s, false, o));
    rep.timings_ms.emplace_back("chp", elapsed_ms(t0));
  }
  if (o.method != Method::Chp) {
    t0 = std::chrono::steady_clock::now();
    rep.methods.push_back(run_method(s, true, o));
    rep.timings_ms.emplace_back("mchp", elapsed_ms(t0));
  }
  if (o.method == Method::Both) {
    const auto& chp = rep.methods[0];
    const auto& mod = rep.methods[1];
    if (mod.gap.value < -1e-9 || mod.gap.value > chp.gap.value + 1e-9)
      throw ConsistencyError("gap sandwich violated: modified gap " + mod.gap.shown + ", convex hull gap " +
                             chp.gap.shown);
  }
  if (o.oracle) {
    t0 = std::chrono::steady_clock::now();
    oracle_checks(rep, s, o);
    rep.timings_ms.emplace_back("oracle", elapsed_ms(t0));
    for (auto& line : rep.oracle)
      if (!line.ok) throw ConsistencyError("oracle disagrees on " + line.what);
  }
  if (!o.timings) rep.timings_ms.clear();
  return rep;
}

namespace {

std::string with_exact(const Money& m) {
  if (m.exact.empty() || m.exact == m.shown) return m.shown;
  return m.shown + " (" + m.exact + ")";
}

std::string joined(const std::vector<Money>& xs, bool exact) {
  std::string s;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) s += ", ";
    s += exact ? with_exact(xs[k]) : xs[k].shown;
  }
  return xs.size() > 1 ? "(" + s + ")" : s;
}

std::string title(const MethodReport& m) {
  return m.method == "chp" ? "Convex hull pricing" : "Modified convex hull pricing";
}

ordered_json to_json(const Money& m) {
  ordered_json j{{"display", m.shown}, {"value", m.value}};
  if (!m.exact.empty()) j["exact"] = m.exact;
  return j;
}

ordered_json to_json(const std::vector<Money>& xs) {
  ordered_json a = ordered_json::array();
  for (auto& x : xs) a.push_back(to_json(x));
  return a;
}

ordered_json to_json(const PaymentLine& p) {
  return {{"id", p.id}, {"pi_star", to_json(p.pi_star)}, {"pi_plus", to_json(p.pi_plus)},
          {"uplift", to_json(p.uplift)}};
}

}  // namespace

std::string render_text(const RunReport& r) {
  std::ostringstream os;
  os << "scenario " << r.scenario << "  digest " << r.digest << "\n";
  os << "welfare  " << with_exact(r.welfare) << "\n";
  os << "dispatch\n";
  for (auto& d : r.dispatch) os << "  " << std::left << std::setw(12) << d.id << " pattern " << std::setw(6)
                                << d.pattern << " q " << joined(d.q, true) << "\n";
  if (!r.flow.empty()) os << "  line flow " << joined(r.flow, true) << "\n";

  for (auto& m : r.methods) {
    os << "\n" << title(m) << "  [sets " << m.sets_label << ", " << m.arithmetic << "]\n";
    os << "  price set   " << m.price_set << "\n";
    os << "  price       " << joined(m.price, true) << "   paid " << joined(m.paid_price, false) << "\n";
    os << "  dual value  " << with_exact(m.dual_value) << "   gap " << with_exact(m.gap) << "\n";
    os << "  certified   " << (m.certified ? "yes" : "no") << "\n";
    for (std::size_t i = 0; i < m.player_sets.size(); ++i) {
      os << "  set " << std::left << std::setw(12) << r.dispatch.at(i).id << m.player_sets[i];
      if (!m.set_methods.empty()) os << "   [" << m.set_methods[i] << "]";
      os << "\n";
    }
  }

  if (!r.methods.empty()) {
    os << "\n" << std::left << std::setw(14) << "";
    for (auto& m : r.methods) os << std::left << std::setw(36) << title(m);
    os << "\n" << std::setw(14) << "player";
    for (std::size_t k = 0; k < r.methods.size(); ++k)
      os << std::right << std::setw(11) << "pi*" << std::setw(11) << "pi+" << std::setw(11) << "uplift" << "   ";
    os << "\n";
    std::size_t rows = r.methods[0].rows.size();
    for (std::size_t i = 0; i <= rows; ++i) {
      const std::string& id = i < rows ? r.methods[0].rows[i].id : "Total";
      os << std::left << std::setw(14) << id;
      for (auto& m : r.methods) {
        const PaymentLine& p = i < rows ? m.rows[i] : m.total;
        os << std::right << std::setw(11) << p.pi_star.shown << std::setw(11) << p.pi_plus.shown << std::setw(11)
           << p.uplift.shown << "   ";
      }
      os << "\n";
    }
  }
  if (!r.oracle.empty()) {
    os << "\noracle\n";
    for (auto& l : r.oracle)
      os << "  " << std::left << std::setw(28) << l.what << " exact " << l.exact << "  grid " << l.oracle
         << (l.ok ? "  ok" : "  MISMATCH") << "\n";
  }
  if (!r.timings_ms.empty()) {
    os << "\ntimings\n";
    for (auto& [k, v] : r.timings_ms) os << "  " << std::left << std::setw(8) << k << std::fixed
                                         << std::setprecision(1) << v << " ms\n";
  }
  return os.str();
}

std::string render_structured(const RunReport& r) {
  ordered_json j;
  j["scenario"] = r.scenario;
  j["digest"] = r.digest;
  j["primal"]["welfare"] = to_json(r.welfare);
  for (auto& d : r.dispatch)
    j["primal"]["dispatch"].push_back({{"id", d.id}, {"pattern", d.pattern}, {"q", to_json(d.q)}});
  if (!r.flow.empty()) j["primal"]["flow"] = to_json(r.flow);
  j["methods"] = ordered_json::array();
  for (auto& m : r.methods) {
    ordered_json mj{{"method", m.method},
                    {"sets", m.sets_label},
                    {"arithmetic", m.arithmetic},
                    {"price_set", m.price_set},
                    {"price", to_json(m.price)},
                    {"paid_price", to_json(m.paid_price)},
                    {"dual_value", to_json(m.dual_value)},
                    {"gap", to_json(m.gap)},
                    {"certified", m.certified},
                    {"player_sets", m.player_sets}};
    if (!m.set_methods.empty()) mj["set_methods"] = m.set_methods;
    mj["rows"] = ordered_json::array();
    for (auto& p : m.rows) mj["rows"].push_back(to_json(p));
    mj["total"] = to_json(m.total);
    j["methods"].push_back(mj);
  }
  if (r.methods.size() == 2) {
    ordered_json cmp = ordered_json::array();
    for (std::size_t i = 0; i < r.methods[0].rows.size(); ++i)
      cmp.push_back({{"id", r.methods[0].rows[i].id},
                     {"chp_uplift", r.methods[0].rows[i].uplift.shown},
                     {"mchp_uplift", r.methods[1].rows[i].uplift.shown}});
    j["comparison"] = cmp;
  }
  for (auto& l : r.oracle) j["oracle"].push_back({{"what", l.what}, {"exact", l.exact}, {"grid", l.oracle}, {"ok", l.ok}});
  for (auto& [k, v] : r.timings_ms) j["timings_ms"][k] = v;
  return j.dump(2) + "\n";
}

namespace {

template <class T>
VerifyReport verify_with(const Scenario& s, Method method, const std::vector<Rational>& price, const RunOptions& o) {
  auto m = Market<T>::from(s);
  if (static_cast<int>(price.size()) != m.dim())
    throw ScenarioError("price", "expected " + std::to_string(m.dim()) + " values");
  PricingSets<T> sets;
  if (method == Method::Chp) {
    sets = original_sets(m);
  } else {
    auto opp = build_opportunity_sets(m, Num<T>::from(o.resolution));
    sets = modified_sets(m, opp, epsilon_of<T>(o, m.periods));
  }
  std::vector<T> p;
  for (auto& x : price) p.push_back(Num<T>::from(x));
  auto c = price_membership(m, sets, p);
  VerifyReport v;
  v.member = c.member;
  v.method = method == Method::Chp ? "chp" : "mchp";
  v.arithmetic = Num<T>::name;
  for (std::size_t i = 0; i < c.mixture.size(); ++i) {
    std::string line = m.players[i].id + ":";
    for (auto& term : c.mixture[i]) {
      line += " " + Num<T>::text(term.weight) + " x (" + m.players[i].pattern_text(term.point.pattern);
      for (auto& q : term.point.q) line += ", " + Num<T>::text(q);
      line += ")";
    }
    v.certificate.push_back(line);
  }
  if (m.nodes == 2)
    for (int t = 0; t < m.periods; ++t) v.certificate.push_back("flow[" + std::to_string(t) + "]: " + Num<T>::text(c.flow[t]));
  return v;
}

}  // namespace

VerifyReport run_verify(const Scenario& s, Method method, const std::vector<Rational>& price, const RunOptions& o) {
  if (method == Method::Both) throw std::invalid_argument("verify takes a single method");
  try {
    return verify_with<Rational>(s, method, price, o);
  } catch (const InexactError&) {
    return verify_with<double>(s, method, price, o);
  }
}

std::string render_text(const VerifyReport& v) {
  std::string s = std::string(v.member ? "true" : "false") + "  [" + v.method + ", " + v.arithmetic + "]\n";
  for (auto& l : v.certificate) s += "  " + l + "\n";
  return s;
}

std::string render_structured(const VerifyReport& v) {
  ordered_json j{{"member", v.member}, {"method", v.method}, {"arithmetic", v.arithmetic},
                 {"certificate", v.certificate}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Golden values

namespace {

struct Checker {
  std::vector<GoldenCheck> out;
  std::string prefix;

  void check(const std::string& name, bool pass, const std::string& detail) {
    out.push_back({prefix + name, pass, detail});
  }
  void exact(const std::string& name, const Rational& got, const std::string& want) {
    check(name, got == parse_decimal(want), "got " + exact_text(got) + ", want " + want);
  }
  void near(const std::string& name, double got, double want, double tol) {
    std::ostringstream os;
    os << std::setprecision(12) << "got " << got << ", want " << want << " within " << tol;
    check(name, std::fabs(got - want) <= tol, os.str());
  }
};

using R = Rational;

struct Case {
  Market<R> m;
  PrimalSolution<R> primal;

  explicit Case(const Scenario& s) : m(Market<R>::from(s)), primal(solve_primal(m)) {}
  Priced<R> chp() const { return price_with(m, primal, original_sets(m)); }
  PricingSets<R> modified() const { return modified_sets(m, build_opportunity_sets(m, R(1)), Epsilon<R>::plus_zero()); }
  Priced<R> mchp() const { return price_with(m, primal, modified()); }
};

const UpliftRow<R>& row(const UpliftReport<R>& u, const std::string& id) {
  for (auto& r : u.rows)
    if (r.id == id) return r;
  throw std::out_of_range("no payment row " + id);
}

void example1(Checker& c) {
  auto q = default_params(1);
  Case k(builtin_example(1));
  c.exact("welfare", k.primal.value, "0");
  auto chp = k.chp();
  c.exact("chp price a + w/g_max", chp.dual.canonical[0], exact_text(q.a + q.w / q.g_max));
  c.exact("chp consumer uplift (b - p)d_max", row(chp.uplift, "consumer").uplift,
          exact_text((q.b - chp.dual.canonical[0]) * q.d_max));
  auto mod = k.mchp();
  const auto& iv = mod.dual.interval->front();
  c.check("mchp price set [b, +inf)", mod.dual.interval->size() == 1 && !iv.lo_inf && iv.lo == q.b && !iv.lo_open && iv.hi_inf,
          mod.dual.interval->str());
  c.exact("mchp total uplift", mod.uplift.total_uplift, "0");
}

void example2(Checker& c) {
  auto q = default_params(2);
  Case k(builtin_example(2));
  auto chp = k.chp();
  R eq9 = q.w * (1 - q.d_max / (2 * q.g_max) + q.w * q.d_max / (q.a * (2 * q.g_max) * (2 * q.g_max)));
  c.exact("chp gap closed form", chp.uplift.gap, exact_text(eq9));
  c.exact("chp total uplift closed form", chp.uplift.total_uplift, exact_text(eq9));
  auto md = Market<double>::from(builtin_example(2));
  auto pd = solve_primal(md);
  auto od = build_opportunity_sets(md, 1.0);
  auto mod = price_with(md, pd, modified_sets(md, od, Epsilon<double>::plus_zero()));
  double w = q.w.convert_to<double>(), a = q.a.convert_to<double>(), dmax = q.d_max.convert_to<double>();
  c.near("mchp total uplift w^2/(a d_max)", mod.uplift.total_uplift, w * w / (a * dmax), 1e-9);
  c.check("chp uplift above w/2", eq9 > q.w / 2, exact_text(eq9));
  c.check("mchp uplift at most w/6", mod.uplift.total_uplift <= w / 6 + 1e-9, std::to_string(mod.uplift.total_uplift));
}

void rows3(Checker& c, const std::string& tag, const UpliftReport<R>& u, const std::vector<std::string>& star,
           const std::vector<std::string>& plus, const std::vector<std::string>& up) {
  for (std::size_t i = 0; i < star.size(); ++i) {
    const auto& r = u.rows.at(i);
    c.exact(tag + " " + r.id + " pi*", r.pi_star, star[i]);
    c.exact(tag + " " + r.id + " pi+", r.pi_plus, plus[i]);
    c.exact(tag + " " + r.id + " uplift", r.uplift, up[i]);
  }
}

void example3(Checker& c) {
  Case k(builtin_example(3));
  auto chp = k.chp();
  c.near("chp price", chp.dual.canonical[0].convert_to<double>(), 30.09, 0.005);
  rows3(c, "chp", chp.uplift, {"1210.80", "-7.80"}, {"1614.40", "0"}, {"403.60", "7.80"});
  c.exact("chp total uplift", chp.uplift.total_uplift, "411.40");
  auto mod = k.mchp();
  c.near("mchp price", mod.dual.canonical[0].convert_to<double>(), 30.13, 0.005);
  rows3(c, "mchp", mod.uplift, {"1215.60", "-4.60"}, {"1215.60", "0"}, {"0", "4.60"});
  c.exact("mchp total uplift", mod.uplift.total_uplift, "4.60");
}

void example4(Checker& c) {
  Case k(builtin_example(4));
  auto chp = k.chp();
  c.near("chp price", chp.dual.canonical[0].convert_to<double>(), 30.09, 0.005);
  c.exact("chp total uplift", chp.uplift.total_uplift, "411.40");
  auto mod = k.mchp();
  c.near("mchp price", mod.dual.canonical[0].convert_to<double>(), 30.09, 0.005);
  rows3(c, "mchp", mod.uplift, {"1210.80", "-7.80"}, {"1210.80", "0"}, {"0", "7.80"});
  c.exact("mchp total uplift", mod.uplift.total_uplift, "7.80");
}

void example5(Checker& c) {
  Case k(builtin_example(5));
  for (auto [tag, p] : {std::pair{"chp", k.chp()}, std::pair{"mchp", k.mchp()}}) {
    c.exact(std::string(tag) + " price", p.dual.canonical[0], "20.20");
    c.exact(std::string(tag) + " producer uplift", row(p.uplift, "producer").uplift, "0");
    c.exact(std::string(tag) + " consumer1 uplift", row(p.uplift, "consumer1").uplift, "0");
    c.exact(std::string(tag) + " consumer2 uplift", row(p.uplift, "consumer2").uplift, "780");
  }
  Case agg(aggregated_example5());
  c.exact("aggregated chp total uplift", agg.chp().uplift.total_uplift, "780");
  c.exact("aggregated mchp total uplift", agg.mchp().uplift.total_uplift, "0");
}

void example6(Checker& c) {
  Case k(builtin_example(6));
  auto chp = k.chp();
  c.check("chp reported price 46.38", format_fixed(round_price(chp.dual.canonical[0]), 2) == "46.38",
          exact_text(chp.dual.canonical[0]));
  c.exact("chp consumer uplift", row(chp.uplift, "consumer").uplift, "72.40");
  auto mod = k.mchp();
  c.exact("mchp price equals chp price", mod.dual.canonical[0], exact_text(chp.dual.canonical[0]));
  c.exact("mchp total uplift", mod.uplift.total_uplift, "0");
  auto sets = k.modified();
  for (std::size_t i = 0; i < k.m.players.size(); ++i)
    if (!k.m.players[i].producer()) {
      sets.sets[i] = original_set(k.m.players[i]);
      sets.inflatable[i] = StatusOutputSet<R>{};
    }
  auto sub = price_with(k.m, k.primal, sets);
  c.exact("consumer original set: price unchanged", sub.dual.canonical[0], exact_text(chp.dual.canonical[0]));
  c.exact("consumer original set: consumer uplift", row(sub.uplift, "consumer").uplift, "72.40");
}

void example7(Checker& c) {
  Case k(builtin_example(7));
  auto chp = k.chp();
  auto mod = k.mchp();
  c.exact("chp price", chp.dual.canonical[0], "80");
  c.exact("chp total uplift", chp.uplift.total_uplift, "1000");
  c.exact("mchp price", mod.dual.canonical[0], "80");
  c.exact("mchp total uplift", mod.uplift.total_uplift, "0");
  c.exact("mchp producer pi*", row(mod.uplift, "producer").pi_star, "14950");
}

void example8(Checker& c) {
  Case k(builtin_example(8));
  auto chp = k.chp();
  c.near("chp price node 1", chp.dual.canonical[0].convert_to<double>(), 15.10, 0.005);
  c.near("chp price node 2", chp.dual.canonical[1].convert_to<double>(), 10.00, 0.005);
  c.exact("chp producer1 uplift", row(chp.uplift, "producer1").uplift, "5");
  c.exact("chp producer2 uplift", row(chp.uplift, "producer2").uplift, "0");
  c.exact("chp FTR holders uplift", row(chp.uplift, "FTR holders").uplift, "510");
  c.exact("chp total uplift", chp.uplift.total_uplift, "515");
  auto mod = k.mchp();
  c.check("mchp prices equal across nodes", mod.dual.canonical[0] == mod.dual.canonical[1],
          exact_text(mod.dual.canonical[0]) + " vs " + exact_text(mod.dual.canonical[1]));
  c.exact("mchp congestion rent", row(mod.uplift, "FTR holders").pi_star, "0");
  c.exact("mchp total uplift", mod.uplift.total_uplift, "0");
}

void example9(Checker& c) {
  Case k(builtin_example(9));
  auto chp = k.chp();
  c.exact("chp price t1", chp.dual.canonical[0], "31.60");
  c.exact("chp price t2", chp.dual.canonical[1], "10");
  c.exact("chp producer pi*", row(chp.uplift, "producer").pi_star, "468");
  c.exact("chp producer pi+", row(chp.uplift, "producer").pi_plus, "500");
  c.exact("chp producer uplift", row(chp.uplift, "producer").uplift, "32");
  auto mod = k.mchp();
  c.exact("mchp gap", mod.uplift.gap, "0");
  auto cert = price_membership(k.m, mod.sets, {parse_decimal("32.67"), R(10)});
  c.check("mchp price (32.67, 10.00) is optimal", cert.member, cert.member ? "member" : "not a member");
}

}  // namespace

std::vector<GoldenCheck> reproduce(int n) {
  Checker c;
  c.prefix = "example " + std::to_string(n) + ": ";
  switch (n) {
    case 1: example1(c); break;
    case 2: example2(c); break;
    case 3: example3(c); break;
    case 4: example4(c); break;
    case 5: example5(c); break;
    case 6: example6(c); break;
    case 7: example7(c); break;
    case 8: example8(c); break;
    case 9: example9(c); break;
    default: throw ScenarioError("n", "builtin examples are numbered 1..9");
  }
  return c.out;
}

}  // namespace mchp
