#include "mchp/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace mchp {

using nlohmann::json;

namespace {

Rational num(const json& j, const std::string& field) {
  try {
    if (j.is_string()) return parse_decimal(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number()) return parse_decimal(j.dump());
  } catch (const std::exception& e) {
    throw ScenarioError(field, std::string("not a number (") + e.what() + ")");
  }
  throw ScenarioError(field, "expected a number or decimal string");
}

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ScenarioError(path + "." + key, "missing");
  return j.at(key);
}

std::vector<Rational> num_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ScenarioError(path, "expected a list");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

bool terminating(const Rational& x) {
  Integer d = denominator(x);
  while (d % 2 == 0) d /= 2;
  while (d % 5 == 0) d /= 5;
  return d == 1;
}

std::string decimal_text(const Rational& x) {
  if (!terminating(x)) return exact_text(x);
  for (int places = 0; places < 64; ++places) {
    Rational scaled = x;
    for (int i = 0; i < places; ++i) scaled *= 10;
    if (denominator(scaled) == 1) return format_fixed(x, places);
  }
  return exact_text(x);
}

json curve_json(const VariableCostCurve& c) {
  switch (c.kind) {
    case CurveKind::Affine:
      return {{"kind", "affine"}, {"slope", decimal_text(c.slope)}};
    case CurveKind::Quadratic:
      return {{"kind", "quadratic"}, {"linear", decimal_text(c.linear)}, {"quadratic", decimal_text(c.quadratic)}};
    case CurveKind::Piecewise: {
      json pieces = json::array();
      for (auto& [s, k] : c.pieces) pieces.push_back({{"breakpoint", decimal_text(s)}, {"slope", decimal_text(k)}});
      return {{"kind", "piecewise"}, {"pieces", pieces}};
    }
  }
  return {};
}

VariableCostCurve parse_curve(const json& j, const std::string& path) {
  VariableCostCurve c;
  std::string kind = need(j, "kind", path).get<std::string>();
  if (kind == "affine") {
    c.kind = CurveKind::Affine;
    c.slope = num(need(j, "slope", path), path + ".slope");
  } else if (kind == "quadratic") {
    c.kind = CurveKind::Quadratic;
    c.linear = num(need(j, "linear", path), path + ".linear");
    c.quadratic = num(need(j, "quadratic", path), path + ".quadratic");
  } else if (kind == "piecewise") {
    c.kind = CurveKind::Piecewise;
    const json& pieces = need(j, "pieces", path);
    if (!pieces.is_array()) throw ScenarioError(path + ".pieces", "expected a list");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      std::string p = path + ".pieces[" + std::to_string(i) + "]";
      c.pieces.emplace_back(num(need(pieces[i], "breakpoint", p), p + ".breakpoint"),
                            num(need(pieces[i], "slope", p), p + ".slope"));
    }
  } else {
    throw ScenarioError(path + ".kind", "unknown curve kind '" + kind + "'");
  }
  return c;
}

void check_curve(const VariableCostCurve& c, const std::string& path) {
  switch (c.kind) {
    case CurveKind::Affine:
      if (c.slope < 0) throw ScenarioError(path + ".slope", "cost must be non-decreasing");
      break;
    case CurveKind::Quadratic:
      if (c.linear < 0) throw ScenarioError(path + ".linear", "cost must be non-decreasing");
      if (c.quadratic < 0) throw ScenarioError(path + ".quadratic", "cost must be convex");
      break;
    case CurveKind::Piecewise:
      if (c.pieces.empty()) throw ScenarioError(path + ".pieces", "empty");
      if (c.pieces[0].first != 0) throw ScenarioError(path + ".pieces[0].breakpoint", "must be 0");
      for (std::size_t i = 0; i < c.pieces.size(); ++i) {
        std::string p = path + ".pieces[" + std::to_string(i) + "]";
        if (c.pieces[i].second < 0) throw ScenarioError(p + ".slope", "cost must be non-decreasing");
        if (i > 0 && c.pieces[i].first <= c.pieces[i - 1].first)
          throw ScenarioError(p + ".breakpoint", "breakpoints must increase");
        if (i > 0 && c.pieces[i].second < c.pieces[i - 1].second)
          throw ScenarioError(p + ".slope", "slopes must be non-decreasing (convexity)");
      }
      break;
  }
}

}  // namespace

void validate(const Scenario& s) {
  if (s.periods < 1) throw ScenarioError("periods", "must be at least 1");
  if (s.units.empty()) throw ScenarioError("units", "at least one unit is required");
  int nodes = s.network.node_count();
  if (s.network.kind == NetworkKind::TwoNode && s.network.line_capacity <= 0)
    throw ScenarioError("network.line_capacity", "must be positive");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.units.size(); ++i) {
    const UnitSpec& u = s.units[i];
    std::string p = "units[" + std::to_string(i) + "]";
    if (!ids.insert(u.id).second) throw ScenarioError(p + ".id", "duplicate id '" + u.id + "'");
    if (u.g_min < 0) throw ScenarioError(p + ".g_min", "must be non-negative");
    if (u.g_min > u.g_max) throw ScenarioError(p + ".g_min", "exceeds g_max");
    if (u.no_load_cost < 0) throw ScenarioError(p + ".no_load_cost", "must be non-negative");
    if (u.startup_cost < 0) throw ScenarioError(p + ".startup_cost", "must be non-negative");
    if (u.ramp_limit && *u.ramp_limit < 0) throw ScenarioError(p + ".ramp_limit", "must be non-negative");
    if (!u.initial_on && u.initial_output != 0)
      throw ScenarioError(p + ".initial_output", "must be 0 when the unit starts offline");
    if (u.initial_output < 0) throw ScenarioError(p + ".initial_output", "must be non-negative");
    if (u.node < 1 || u.node > nodes) throw ScenarioError(p + ".node", "unknown node");
    check_curve(u.variable_cost, p + ".variable_cost");
  }
  for (std::size_t j = 0; j < s.consumers.size(); ++j) {
    const ConsumerSpec& c = s.consumers[j];
    std::string p = "consumers[" + std::to_string(j) + "]";
    if (!ids.insert(c.id).second) throw ScenarioError(p + ".id", "duplicate id '" + c.id + "'");
    if (c.node < 1 || c.node > nodes) throw ScenarioError(p + ".node", "unknown node");
    if (static_cast<int>(c.fixed_load.size()) != s.periods)
      throw ScenarioError(p + ".fixed_load", "needs one value per period");
    for (auto& d : c.fixed_load)
      if (d < 0) throw ScenarioError(p + ".fixed_load", "must be non-negative");
    if (static_cast<int>(c.elastic.size()) != s.periods)
      throw ScenarioError(p + ".elastic_segments", "needs one list per period");
    for (int t = 0; t < s.periods; ++t) {
      const auto& segs = c.elastic[t];
      std::string q = p + ".elastic_segments[" + std::to_string(t) + "]";
      for (std::size_t k = 0; k < segs.size(); ++k) {
        if (segs[k].quantity <= 0) throw ScenarioError(q, "segment quantity must be positive");
        if (k > 0 && segs[k].price >= segs[k - 1].price)
          throw ScenarioError(q, "segment prices must be strictly decreasing");
      }
      if (!segs.empty() && c.quadratic_benefit)
        throw ScenarioError(q, "a consumer uses either elastic segments or a quadratic benefit");
    }
    if (c.quadratic_benefit) {
      const auto& qb = *c.quadratic_benefit;
      std::string q = p + ".quadratic_benefit";
      if (qb.quadratic < 0) throw ScenarioError(q + ".quadratic", "benefit must be concave");
      if (qb.d_max < 0) throw ScenarioError(q + ".d_max", "must be non-negative");
      if (qb.linear < 0 || qb.linear * qb.d_max - qb.quadratic * qb.d_max * qb.d_max < 0)
        throw ScenarioError(q, "benefit must be non-negative on [0, d_max]");
    }
    for (std::size_t k = 0; k < c.discrete_blocks.size(); ++k) {
      const auto& b = c.discrete_blocks[k];
      std::string q = p + ".discrete_blocks[" + std::to_string(k) + "]";
      if (static_cast<int>(b.quantity.size()) != s.periods)
        throw ScenarioError(q + ".quantity", "needs one value per period");
      for (auto& v : b.quantity)
        if (v < 0) throw ScenarioError(q + ".quantity", "must be non-negative");
    }
  }
  for (int t = 0; t < s.periods; ++t) {
    Rational load = 0, cap = 0;
    for (auto& c : s.consumers) load += c.fixed_load[t];
    for (auto& u : s.units) cap += u.g_max;
    if (load > cap) throw ScenarioError("consumers", "fixed load in period " + std::to_string(t + 1) + " exceeds total capacity");
  }
}

Scenario load_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("document", std::string("malformed: ") + e.what());
  }
  if (!j.is_object()) throw ScenarioError("document", "expected an object");
  Scenario s;
  try {
    s.name = j.value("name", std::string("scenario"));
    if (j.contains("periods")) {
      if (!j["periods"].is_number_integer()) throw ScenarioError("periods", "expected an integer");
      s.periods = j["periods"].get<int>();
    }
    if (s.periods < 1) throw ScenarioError("periods", "must be at least 1");
    if (j.contains("network")) {
      const json& n = j["network"];
      std::string kind = need(n, "kind", "network").get<std::string>();
      if (kind == "one-node") {
        s.network.kind = NetworkKind::OneNode;
      } else if (kind == "two-node") {
        s.network.kind = NetworkKind::TwoNode;
        s.network.line_capacity = num(need(n, "line_capacity", "network"), "network.line_capacity");
      } else {
        throw ScenarioError("network.kind", "unknown network kind '" + kind + "'");
      }
    }
    std::string rounding = j.value("rounding_policy", std::string("round-price-to-cent"));
    if (rounding == "round-price-to-cent") s.rounding = RoundingPolicy::Cent;
    else if (rounding == "exact") s.rounding = RoundingPolicy::Exact;
    else throw ScenarioError("rounding_policy", "unknown policy '" + rounding + "'");
    std::string sunk = j.value("sunk_cost_convention", std::string("min-cost"));
    if (sunk != "min-cost") throw ScenarioError("sunk_cost_convention", "only min-cost is supported");

    const json& units = need(j, "units", "document");
    if (!units.is_array()) throw ScenarioError("units", "expected a list");
    for (std::size_t i = 0; i < units.size(); ++i) {
      const json& u = units[i];
      std::string p = "units[" + std::to_string(i) + "]";
      UnitSpec spec;
      spec.id = u.value("id", "unit" + std::to_string(i + 1));
      spec.g_min = num(need(u, "g_min", p), p + ".g_min");
      spec.g_max = num(need(u, "g_max", p), p + ".g_max");
      spec.variable_cost = parse_curve(need(u, "variable_cost", p), p + ".variable_cost");
      if (u.contains("no_load_cost")) spec.no_load_cost = num(u["no_load_cost"], p + ".no_load_cost");
      if (u.contains("startup_cost")) spec.startup_cost = num(u["startup_cost"], p + ".startup_cost");
      std::string status = u.value("initial_status", std::string("off"));
      if (status != "on" && status != "off") throw ScenarioError(p + ".initial_status", "expected on or off");
      spec.initial_on = status == "on";
      if (u.contains("ramp_limit")) {
        spec.ramp_limit = num(u["ramp_limit"], p + ".ramp_limit");
        if (!u.contains("initial_output")) throw ScenarioError(p + ".initial_output", "required with ramp_limit");
      }
      if (u.contains("initial_output")) spec.initial_output = num(u["initial_output"], p + ".initial_output");
      if (u.contains("node")) spec.node = u["node"].get<int>();
      s.units.push_back(std::move(spec));
    }
    if (j.contains("consumers")) {
      const json& cs = j["consumers"];
      if (!cs.is_array()) throw ScenarioError("consumers", "expected a list");
      for (std::size_t k = 0; k < cs.size(); ++k) {
        const json& c = cs[k];
        std::string p = "consumers[" + std::to_string(k) + "]";
        ConsumerSpec spec;
        spec.id = c.value("id", "consumer" + std::to_string(k + 1));
        if (c.contains("fixed_load")) spec.fixed_load = num_list(c["fixed_load"], p + ".fixed_load");
        else spec.fixed_load.assign(s.periods, Rational(0));
        if (c.contains("elastic_segments")) {
          const json& es = c["elastic_segments"];
          if (!es.is_array()) throw ScenarioError(p + ".elastic_segments", "expected a list per period");
          for (std::size_t t = 0; t < es.size(); ++t) {
            std::vector<ElasticSegment> segs;
            std::string q = p + ".elastic_segments[" + std::to_string(t) + "]";
            if (!es[t].is_array()) throw ScenarioError(q, "expected a list");
            for (std::size_t m = 0; m < es[t].size(); ++m) {
              std::string r = q + "[" + std::to_string(m) + "]";
              segs.push_back({num(need(es[t][m], "price", r), r + ".price"),
                              num(need(es[t][m], "quantity", r), r + ".quantity")});
            }
            spec.elastic.push_back(std::move(segs));
          }
        } else {
          spec.elastic.assign(s.periods, {});
        }
        if (c.contains("quadratic_benefit")) {
          const json& qb = c["quadratic_benefit"];
          std::string q = p + ".quadratic_benefit";
          spec.quadratic_benefit = QuadraticBenefit{num(need(qb, "linear", q), q + ".linear"),
                                                    num(need(qb, "quadratic", q), q + ".quadratic"),
                                                    num(need(qb, "d_max", q), q + ".d_max")};
        }
        if (c.contains("discrete_blocks")) {
          const json& bs = c["discrete_blocks"];
          if (!bs.is_array()) throw ScenarioError(p + ".discrete_blocks", "expected a list");
          for (std::size_t m = 0; m < bs.size(); ++m) {
            std::string q = p + ".discrete_blocks[" + std::to_string(m) + "]";
            spec.discrete_blocks.push_back({num_list(need(bs[m], "quantity", q), q + ".quantity"),
                                            num(need(bs[m], "price", q), q + ".price")});
          }
        }
        if (c.contains("node")) spec.node = c["node"].get<int>();
        s.consumers.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw ScenarioError("document", std::string("schema violation: ") + e.what());
  }
  validate(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("file", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["periods"] = s.periods;
  if (s.network.kind == NetworkKind::OneNode) j["network"] = {{"kind", "one-node"}};
  else j["network"] = {{"kind", "two-node"}, {"line_capacity", decimal_text(s.network.line_capacity)}};
  j["rounding_policy"] = s.rounding == RoundingPolicy::Cent ? "round-price-to-cent" : "exact";
  j["sunk_cost_convention"] = "min-cost";
  json units = json::array();
  for (const UnitSpec& u : s.units) {
    json ju = {{"id", u.id},
               {"g_min", decimal_text(u.g_min)},
               {"g_max", decimal_text(u.g_max)},
               {"variable_cost", curve_json(u.variable_cost)},
               {"no_load_cost", decimal_text(u.no_load_cost)},
               {"startup_cost", decimal_text(u.startup_cost)},
               {"initial_status", u.initial_on ? "on" : "off"},
               {"initial_output", decimal_text(u.initial_output)},
               {"node", u.node}};
    if (u.ramp_limit) ju["ramp_limit"] = decimal_text(*u.ramp_limit);
    units.push_back(ju);
  }
  j["units"] = units;
  json consumers = json::array();
  for (const ConsumerSpec& c : s.consumers) {
    json jc = {{"id", c.id}, {"node", c.node}};
    json fl = json::array();
    for (auto& d : c.fixed_load) fl.push_back(decimal_text(d));
    jc["fixed_load"] = fl;
    json es = json::array();
    for (auto& segs : c.elastic) {
      json row = json::array();
      for (auto& seg : segs) row.push_back({{"price", decimal_text(seg.price)}, {"quantity", decimal_text(seg.quantity)}});
      es.push_back(row);
    }
    jc["elastic_segments"] = es;
    if (c.quadratic_benefit)
      jc["quadratic_benefit"] = {{"linear", decimal_text(c.quadratic_benefit->linear)},
                                 {"quadratic", decimal_text(c.quadratic_benefit->quadratic)},
                                 {"d_max", decimal_text(c.quadratic_benefit->d_max)}};
    if (!c.discrete_blocks.empty()) {
      json bs = json::array();
      for (auto& b : c.discrete_blocks) {
        json q = json::array();
        for (auto& v : b.quantity) q.push_back(decimal_text(v));
        bs.push_back({{"quantity", q}, {"price", decimal_text(b.price)}});
      }
      jc["discrete_blocks"] = bs;
    }
    consumers.push_back(jc);
  }
  j["consumers"] = consumers;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Builtin examples

namespace {

UnitSpec unit(std::string id, Rational gmin, Rational gmax, Rational a, Rational w, int node = 1) {
  UnitSpec u;
  u.id = std::move(id);
  u.g_min = std::move(gmin);
  u.g_max = std::move(gmax);
  u.variable_cost = VariableCostCurve::affine(std::move(a));
  u.no_load_cost = std::move(w);
  u.node = node;
  return u;
}

ConsumerSpec fixed_consumer(std::string id, std::vector<Rational> load, int node = 1) {
  ConsumerSpec c;
  c.id = std::move(id);
  c.elastic.assign(load.size(), {});
  c.fixed_load = std::move(load);
  c.node = node;
  return c;
}

ConsumerSpec bid_consumer(std::string id, Rational price, Rational qty) {
  ConsumerSpec c;
  c.id = std::move(id);
  c.fixed_load = {0};
  c.elastic = {{{std::move(price), std::move(qty)}}};
  return c;
}

void require(bool ok, const std::string& inequality) {
  if (!ok) throw ScenarioError("params", "violates " + inequality);
}

}  // namespace

ExampleParams default_params(int n) {
  ExampleParams p;
  if (n == 2) {
    p.a = 1;
    p.w = 10;
    p.d_max = 60;
    p.g_max = 100;
    p.b = 0;
  }
  return p;
}

Scenario builtin_example(int n) { return builtin_example(n, default_params(n)); }

Scenario builtin_example(int n, const ExampleParams& q) {
  Scenario s;
  s.name = "example" + std::to_string(n);
  switch (n) {
    case 1: {
      require(q.a >= 0, "a >= 0");
      require(q.g_max > 0 && q.d_max > 0, "g_max > 0 and d_max > 0");
      require(q.a + q.w / q.g_max < q.b, "a + w/g_max < b");
      require(q.b * q.d_max < q.a * q.d_max + q.w, "b*d_max < a*d_max + w");
      s.units = {unit("producer", 0, q.g_max, q.a, q.w)};
      s.consumers = {bid_consumer("consumer", q.b, q.d_max)};
      s.rounding = RoundingPolicy::Exact;
      break;
    }
    case 2: {
      require(q.a > 0 && q.w > 0, "a > 0 and w > 0");
      require(6 * q.w / q.a <= q.d_max, "6w/a <= d_max");
      require(q.d_max < q.g_max, "d_max < g_max");
      s.units = {unit("producer", 0, q.g_max, q.a, q.w)};
      ConsumerSpec c;
      c.id = "consumer";
      c.fixed_load = {0};
      c.elastic = {{}};
      c.quadratic_benefit = QuadraticBenefit{2 * q.a, q.a / q.d_max, q.d_max};
      s.consumers = {c};
      s.rounding = RoundingPolicy::Exact;
      break;
    }
    case 3:
    case 4:
      s.units = {unit("unit1", n == 3 ? 80 : 0, 160, 20, 0), unit("unit2", 80, 160, 30, 15)};
      s.consumers = {fixed_consumer("load", {200})};
      break;
    case 5:
      s.units = {unit("producer", 250, 250, 20, 50)};
      s.consumers = {bid_consumer("consumer1", 100, 100), bid_consumer("consumer2", 15, 300)};
      break;
    case 6:
      s.units = {unit("producer1", 0, 80, 40, 510), unit("producer2", 0, 80, 40, 510)};
      s.consumers = {bid_consumer("consumer", 50, 100)};
      break;
    case 7: {
      s.units = {unit("producer", 250, 250, 20, 50)};
      ConsumerSpec block;
      block.id = "consumer2";
      block.fixed_load = {0};
      block.elastic = {{}};
      block.discrete_blocks = {{{200}, 80}};
      s.consumers = {bid_consumer("consumer1", 100, 100), block};
      break;
    }
    case 8:
      s.network.kind = NetworkKind::TwoNode;
      s.network.line_capacity = 100;
      s.units = {unit("producer1", 100, 200, 15, 20, 1), unit("producer2", 150, 200, 10, 0, 2)};
      s.consumers = {fixed_consumer("load", {150}, 1)};
      s.rounding = RoundingPolicy::Exact;
      break;
    case 9: {
      s.periods = 2;
      UnitSpec u = unit("producer", 20, 100, 20, 80);
      u.ramp_limit = Rational(50);
      u.initial_on = true;
      u.initial_output = 50;
      s.units = {u};
      ConsumerSpec c;
      c.id = "consumer";
      c.fixed_load = {80, 10};
      c.elastic = {{}, {{10, 30}}};
      s.consumers = {c};
      break;
    }
    default:
      throw ScenarioError("n", "builtin examples are numbered 1..9");
  }
  validate(s);
  return s;
}

Scenario aggregated_example5() {
  Scenario s = builtin_example(5);
  s.name = "example5-aggregated";
  ConsumerSpec c;
  c.id = "consumers";
  c.fixed_load = {0};
  c.elastic = {{{100, 100}, {15, 300}}};
  s.consumers = {c};
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// Curve

template <class T>
T Curve<T>::value(const T& x) const {
  switch (kind) {
    case CurveKind::Affine: return lin * x;
    case CurveKind::Quadratic: return lin * x + quad * x * x;
    case CurveKind::Piecewise: {
      T v{0};
      for (std::size_t k = 0; k < slopes.size(); ++k) {
        if (x <= starts[k]) break;
        T end = (k + 1 < starts.size() && starts[k + 1] < x) ? starts[k + 1] : x;
        v += slopes[k] * (end - starts[k]);
      }
      return v;
    }
  }
  return T{0};
}

template <class T>
T Curve<T>::right_slope(const T& x) const {
  switch (kind) {
    case CurveKind::Affine: return lin;
    case CurveKind::Quadratic: return lin + 2 * quad * x;
    case CurveKind::Piecewise: {
      std::size_t k = 0;
      while (k + 1 < starts.size() && starts[k + 1] <= x) ++k;
      return slopes[k];
    }
  }
  return T{0};
}

template <class T>
T Curve<T>::left_slope(const T& x) const {
  switch (kind) {
    case CurveKind::Affine: return lin;
    case CurveKind::Quadratic: return lin + 2 * quad * x;
    case CurveKind::Piecewise: {
      std::size_t k = 0;
      while (k + 1 < starts.size() && starts[k + 1] < x) ++k;
      return slopes[k];
    }
  }
  return T{0};
}

template <class T>
std::vector<T> Curve<T>::kinks_in(const T& lo, const T& hi) const {
  std::vector<T> out;
  if (kind != CurveKind::Piecewise) return out;
  for (std::size_t k = 1; k < starts.size(); ++k)
    if (lo < starts[k] && starts[k] < hi) out.push_back(starts[k]);
  return out;
}

template <class T>
std::pair<T, T> Curve<T>::best_response(const T& lam, const T& lo, const T& hi) const {
  auto clip = [&](const T& a, const T& b) -> std::pair<T, T> {
    if (b < lo) return {lo, lo};
    if (a > hi) return {hi, hi};
    return {a < lo ? lo : a, b > hi ? hi : b};
  };
  switch (kind) {
    case CurveKind::Affine:
      if (Num<T>::eq(lam, lin)) return {lo, hi};
      return lam > lin ? std::pair<T, T>{hi, hi} : std::pair<T, T>{lo, lo};
    case CurveKind::Quadratic: {
      if (quad == 0) {
        if (Num<T>::eq(lam, lin)) return {lo, hi};
        return lam > lin ? std::pair<T, T>{hi, hi} : std::pair<T, T>{lo, lo};
      }
      T x = (lam - lin) / (2 * quad);
      return clip(x, x);
    }
    case CurveKind::Piecewise: {
      std::size_t n = slopes.size();
      for (std::size_t k = 0; k < n; ++k) {
        if (Num<T>::eq(slopes[k], lam)) {
          if (k + 1 == n) return clip(starts[k], hi);
          return clip(starts[k], starts[k + 1]);
        }
        if (slopes[k] > lam) return clip(starts[k], starts[k]);
      }
      return {hi, hi};
    }
  }
  return {lo, lo};
}

template <class T>
std::vector<T> Curve<T>::response_kinks(const T& lo, const T& hi) const {
  switch (kind) {
    case CurveKind::Affine: return {lin};
    case CurveKind::Quadratic:
      if (quad == 0) return {lin};
      return {lin + 2 * quad * lo, lin + 2 * quad * hi};
    case CurveKind::Piecewise: {
      std::vector<T> out;
      for (std::size_t k = 0; k < slopes.size(); ++k) {
        bool starts_before_hi = starts[k] <= hi;
        bool ends_after_lo = k + 1 == slopes.size() || starts[k + 1] >= lo;
        if (starts_before_hi && ends_after_lo) out.push_back(slopes[k]);
      }
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Player

template <class T>
T Player<T>::offset(std::uint32_t pattern, int t) const {
  if (producer()) return T{0};
  T off = fixed_load[t];
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (pattern >> k & 1u) off += blocks[k].quantity[t];
  return off;
}

template <class T>
std::pair<T, T> Player<T>::domain(std::uint32_t pattern, int t) const {
  if (producer()) {
    if (pattern >> t & 1u) return {g_min, g_max};
    return {T{0}, T{0}};
  }
  T off = offset(pattern, t);
  return {off, off + elastic_cap[t]};
}

template <class T>
T Player<T>::fixed_cost(std::uint32_t pattern) const {
  T c{0};
  if (producer()) {
    bool prev = initial_on;
    for (int t = 0; t < periods; ++t) {
      bool on = pattern >> t & 1u;
      if (on) c += no_load;
      if (on && !prev) c += startup;
      prev = on;
    }
    return c;
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (!(pattern >> k & 1u)) continue;
    for (auto& q : blocks[k].quantity) c -= blocks[k].price * q;
  }
  return c;
}

template <class T>
T Player<T>::period_value(std::uint32_t pattern, int t, const T& q) const {
  return -curve[t].value(q - offset(pattern, t));
}

template <class T>
T Player<T>::value(std::uint32_t pattern, const std::vector<T>& q) const {
  T v = -fixed_cost(pattern);
  for (int t = 0; t < periods; ++t) v += period_value(pattern, t, q[t]);
  return v;
}

template <class T>
std::string Player<T>::pattern_text(std::uint32_t pattern) const {
  std::string s;
  for (int b = 0; b < pattern_bits(); ++b) s += (pattern >> b & 1u) ? '1' : '0';
  return s.empty() ? "-" : s;
}

// ---------------------------------------------------------------------------
// Market

template <class T>
Market<T> Market<T>::from(const Scenario& s) {
  validate(s);
  Market<T> m;
  m.name = s.name;
  m.periods = s.periods;
  m.nodes = s.network.node_count();
  m.line_capacity = Num<T>::from(s.network.line_capacity);
  m.rounding = s.rounding;
  auto cv = [](const Rational& r) { return Num<T>::from(r); };
  for (const UnitSpec& u : s.units) {
    Player<T> p;
    p.kind = Player<T>::Kind::Producer;
    p.id = u.id;
    p.node = u.node - 1;
    p.sign = 1;
    p.periods = s.periods;
    Curve<T> c;
    c.kind = u.variable_cost.kind;
    switch (c.kind) {
      case CurveKind::Affine: c.lin = cv(u.variable_cost.slope); break;
      case CurveKind::Quadratic:
        c.lin = cv(u.variable_cost.linear);
        c.quad = cv(u.variable_cost.quadratic);
        break;
      case CurveKind::Piecewise:
        for (auto& [st, sl] : u.variable_cost.pieces) {
          c.starts.push_back(cv(st));
          c.slopes.push_back(cv(sl));
        }
        break;
    }
    p.curve.assign(s.periods, c);
    p.g_min = cv(u.g_min);
    p.g_max = cv(u.g_max);
    p.no_load = cv(u.no_load_cost);
    p.startup = cv(u.startup_cost);
    p.initial_on = u.initial_on;
    p.initial_output = cv(u.initial_output);
    if (u.ramp_limit) p.ramp = cv(*u.ramp_limit);
    m.players.push_back(std::move(p));
  }
  m.unit_count = static_cast<int>(s.units.size());
  for (const ConsumerSpec& c : s.consumers) {
    Player<T> p;
    p.kind = Player<T>::Kind::Consumer;
    p.id = c.id;
    p.node = c.node - 1;
    p.sign = -1;
    p.periods = s.periods;
    for (int t = 0; t < s.periods; ++t) {
      p.fixed_load.push_back(cv(c.fixed_load[t]));
      Curve<T> cu;
      T cap{0};
      if (c.quadratic_benefit) {
        cu.kind = CurveKind::Quadratic;
        cu.lin = -cv(c.quadratic_benefit->linear);
        cu.quad = cv(c.quadratic_benefit->quadratic);
        cap = cv(c.quadratic_benefit->d_max);
      } else if (!c.elastic[t].empty()) {
        cu.kind = CurveKind::Piecewise;
        for (const ElasticSegment& seg : c.elastic[t]) {
          cu.starts.push_back(cap);
          cu.slopes.push_back(-cv(seg.price));
          cap += cv(seg.quantity);
        }
      }
      p.curve.push_back(cu);
      p.elastic_cap.push_back(cap);
    }
    for (const DiscreteBlock& b : c.discrete_blocks) {
      Block<T> blk;
      for (auto& q : b.quantity) blk.quantity.push_back(cv(q));
      blk.price = cv(b.price);
      p.blocks.push_back(std::move(blk));
    }
    m.players.push_back(std::move(p));
  }
  return m;
}

template <class T>
std::vector<T> Market<T>::player_prices(const Player<T>& p, const std::vector<T>& prices) const {
  std::vector<T> out(periods);
  for (int t = 0; t < periods; ++t) out[t] = prices[price_index(p.node, t)];
  return out;
}

template <class T>
bool Market<T>::has_curvature() const {
  for (auto& p : players)
    for (auto& c : p.curve)
      if (c.curved()) return true;
  return false;
}

template <class T>
bool Market<T>::has_ramp() const {
  for (auto& p : players)
    if (p.ramp) return true;
  return false;
}

template struct Curve<Rational>;
template struct Curve<double>;
template struct Player<Rational>;
template struct Player<double>;
template struct Market<Rational>;
template struct Market<double>;

}  // namespace mchp
