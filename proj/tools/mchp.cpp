// mchp: price a scenario with convex hull pricing and its modified variant.
//
// Exit codes: 0 ok, 1 usage or golden failure, 2 invalid scenario,
// 3 infeasible dispatch, 4 internal consistency failure.

#include "mchp/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>

namespace {

using namespace mchp;

struct Common {
  std::string epsilon, resolution = "1", rounding, format = "text", out;
  bool oracle = false, timings = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--epsilon", c.epsilon, "inflation for modified sets (default: the +0 limit)");
  cmd->add_option("--resolution", c.resolution, "quantity step for the opportunity-set sweep")->capture_default_str();
  cmd->add_option("--rounding", c.rounding, "payment price rounding")->check(CLI::IsMember({"cent", "exact"}));
  cmd->add_option("--format", c.format, "report format")->check(CLI::IsMember({"text", "structured"}));
  cmd->add_option("-o,--output", c.out, "write the report to a file");
}

RunOptions options_from(const Common& c) {
  RunOptions o;
  if (!c.epsilon.empty()) {
    o.epsilon = parse_decimal(c.epsilon);
    if (*o.epsilon <= 0) throw ScenarioError("--epsilon", "must be positive");
  }
  o.resolution = parse_decimal(c.resolution);
  if (o.resolution <= 0) throw ScenarioError("--resolution", "must be positive");
  if (c.rounding == "cent") o.rounding = RoundingPolicy::Cent;
  if (c.rounding == "exact") o.rounding = RoundingPolicy::Exact;
  o.oracle = c.oracle;
  o.timings = c.timings;
  return o;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw std::runtime_error("cannot write " + c.out);
  f << text;
}

const std::map<std::string, Method> kMethods{{"chp", Method::Chp}, {"mchp", Method::Mchp}, {"both", Method::Both}};

int reproduce_cmd(const std::string& which, const std::string& format) {
  std::vector<int> ns;
  if (which == "all") {
    for (int n = 1; n <= 9; ++n) ns.push_back(n);
  } else {
    ns.push_back(std::stoi(which));
  }
  std::vector<GoldenCheck> checks;
  for (int n : ns)
    for (auto& g : reproduce(n)) checks.push_back(g);
  int failed = 0;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (auto& g : checks) {
    failed += !g.pass;
    if (format == "structured") {
      j.push_back({{"check", g.name}, {"pass", g.pass}, {"detail", g.detail}});
    } else {
      std::cout << (g.pass ? "PASS  " : "FAIL  ") << g.name << "  [" << g.detail << "]\n";
    }
  }
  if (format == "structured") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << checks.size() - failed << "/" << checks.size() << " golden checks passed\n";
  }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex hull pricing and modified convex hull pricing for small unit-commitment markets"};
  app.require_subcommand(1);

  Common price_opts;
  std::string price_path, price_method = "both";
  auto* price = app.add_subcommand("price", "price a scenario file");
  price->add_option("scenario", price_path, "scenario file (JSON)")->required();
  price->add_option("--method", price_method, "pricing method")->check(CLI::IsMember({"chp", "mchp", "both"}));
  price->add_flag("--oracle", price_opts.oracle, "cross-check against brute-force grids");
  price->add_flag("--timings", price_opts.timings, "include wall-clock timings");
  add_common(price, price_opts);

  std::string which = "all", repro_format = "text";
  auto* repro = app.add_subcommand("reproduce", "check the builtin examples against their golden values");
  repro->add_option("n", which, "example number 1..9 or 'all'")
      ->check(CLI::IsMember({"1", "2", "3", "4", "5", "6", "7", "8", "9", "all"}));
  repro->add_option("--format", repro_format, "report format")->check(CLI::IsMember({"text", "structured"}));

  Common verify_opts;
  std::string verify_path, verify_method;
  std::vector<std::string> prices;
  auto* verify = app.add_subcommand("verify", "test whether prices are optimal for the dual");
  verify->add_option("scenario", verify_path, "scenario file (JSON)")->required();
  verify->add_option("method", verify_method, "chp or mchp")->required()->check(CLI::IsMember({"chp", "mchp"}));
  verify->add_option("prices", prices, "one price per node and period")->required();
  add_common(verify, verify_opts);

  std::string export_dir;
  auto* exp = app.add_subcommand("export", "write the builtin examples as scenario files");
  exp->add_option("dir", export_dir, "target directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*price) {
      auto report = run_price(load_scenario_file(price_path),
                              [&] {
                                auto o = options_from(price_opts);
                                o.method = kMethods.at(price_method);
                                return o;
                              }());
      emit(price_opts, price_opts.format == "structured" ? render_structured(report) : render_text(report));
      return 0;
    }
    if (*verify) {
      std::vector<Rational> p;
      for (auto& s : prices) p.push_back(parse_decimal(s));
      auto v = run_verify(load_scenario_file(verify_path), kMethods.at(verify_method), p, options_from(verify_opts));
      emit(verify_opts, verify_opts.format == "structured" ? render_structured(v) : render_text(v));
      return v.member ? 0 : 1;
    }
    if (*repro) return reproduce_cmd(which, repro_format);
    if (*exp) {
      auto write = [&](const Scenario& s, const std::string& name) {
        std::ofstream f(export_dir + "/" + name + ".json");
        if (!f) throw std::runtime_error("cannot write into " + export_dir);
        f << serialize_scenario(s);
      };
      for (int n = 1; n <= 9; ++n) write(builtin_example(n), "ex" + std::to_string(n));
      write(aggregated_example5(), "ex5_aggregated");
      return 0;
    }
  } catch (const ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const ConsistencyError& e) {
    std::cerr << "consistency failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
