#include "support.hpp"

#include "mchp/report.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace mchp;
using namespace mchp::testing;

namespace {

const PaymentLine& line(const MethodReport& m, const std::string& id) {
  for (auto& r : m.rows)
    if (r.id == id) return r;
  throw std::out_of_range(id);
}

}  // namespace

TEST_CASE("side-by-side report for a fixed load") {
  auto r = run_price(builtin_example(3), {});
  REQUIRE(r.methods.size() == 2);
  auto& chp = r.methods[0];
  auto& mod = r.methods[1];
  CHECK(chp.paid_price.at(0).shown == "30.09");
  CHECK(mod.paid_price.at(0).shown == "30.13");
  CHECK(line(chp, "unit1").uplift.shown == "403.60");
  CHECK(line(chp, "unit2").uplift.shown == "7.80");
  CHECK(chp.total.uplift.shown == "411.40");
  CHECK(line(mod, "unit1").uplift.shown == "0.00");
  CHECK(mod.total.uplift.shown == "4.60");
  CHECK(chp.certified);
  CHECK(mod.certified);

  auto text = render_text(r);
  CHECK(text.find("411.40") != std::string::npos);
  CHECK(text.find("timings") == std::string::npos);
}

TEST_CASE("two-node report carries the congestion row") {
  auto r = run_price(builtin_example(8), {});
  auto& chp = r.methods[0];
  CHECK(chp.rows.back().id == "FTR holders");
  CHECK(chp.total.uplift.shown == "515.00");
  auto& mod = r.methods[1];
  CHECK(mod.rows.back().pi_star.shown == "0.00");
  CHECK(mod.total.uplift.shown == "0.00");
}

TEST_CASE("reports are byte-identical across runs") {
  for (int n : {3, 7, 9}) {
    RunOptions o;
    o.oracle = true;
    auto a = run_price(builtin_example(n), o), b = run_price(builtin_example(n), o);
    CHECK(render_text(a) == render_text(b));
    CHECK(render_structured(a) == render_structured(b));
    for (auto& l : a.oracle) CHECK(l.ok);
  }
  CHECK(scenario_digest(builtin_example(3)) == scenario_digest(load_scenario(serialize_scenario(builtin_example(3)))));
  CHECK(scenario_digest(builtin_example(3)) != scenario_digest(builtin_example(4)));
}

TEST_CASE("structured report parses and mirrors the text") {
  auto r = run_price(builtin_example(6), {});
  auto j = nlohmann::json::parse(render_structured(r));
  CHECK(j["methods"].size() == 2);
  CHECK(j["comparison"][2]["chp_uplift"] == "72.40");
  CHECK(j["comparison"][2]["mchp_uplift"] == "0.00");
  CHECK(j["primal"]["welfare"]["display"] == "290.00");
}

TEST_CASE("single-method runs and options") {
  RunOptions o;
  o.method = Method::Chp;
  CHECK(run_price(builtin_example(5), o).methods.size() == 1);
  o.method = Method::Mchp;
  o.epsilon = R(1, 1000);
  auto r = run_price(builtin_example(7), o);
  REQUIRE(r.methods.size() == 1);
  CHECK(r.methods[0].method == "mchp");
  o.rounding = RoundingPolicy::Exact;
  o.epsilon.reset();
  auto exact = run_price(builtin_example(3), o);
  CHECK(exact.methods[0].paid_price[0].exact == "241/8");
}

TEST_CASE("irrational thresholds fall back to floating point") {
  auto r = run_price(builtin_example(2), {});
  REQUIRE(r.methods.size() == 2);
  CHECK(r.methods[0].arithmetic == "exact");
  CHECK(r.methods[1].arithmetic != "exact");
}

TEST_CASE("price verification") {
  auto yes = run_verify(builtin_example(9), Method::Mchp, {q("32.67"), R(10)}, {});
  CHECK(yes.member);
  CHECK_FALSE(yes.certificate.empty());
  CHECK(run_verify(builtin_example(3), Method::Chp, {q("30.09375")}, {}).member);
  CHECK_FALSE(run_verify(builtin_example(3), Method::Chp, {R(29)}, {}).member);
  CHECK_THROWS_AS(run_verify(builtin_example(3), Method::Chp, {R(29), R(1)}, {}), ScenarioError);
}

TEST_CASE("golden checks for every builtin example") {
  for (int n = 1; n <= 9; ++n) {
    for (auto& g : reproduce(n)) {
      INFO(g.name << ": " << g.detail);
      CHECK(g.pass);
    }
  }
}
