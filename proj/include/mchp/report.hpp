#pragma once

#include "mchp/dual.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mchp {

enum class Method { Chp, Mchp, Both };

struct RunOptions {
  Method method = Method::Both;
  std::optional<Rational> epsilon;  // numeric inflation; unset means the +0 limit
  Rational resolution = 1;
  std::optional<RoundingPolicy> rounding;
  bool oracle = false;
  bool timings = false;
};

// A number as shown (two decimals) plus its exact form when one exists.
struct Money {
  double value = 0;
  std::string shown;
  std::string exact;
};

struct DispatchLine {
  std::string id, pattern;
  std::vector<Money> q;
};

struct PaymentLine {
  std::string id;
  Money pi_star, pi_plus, uplift;
};

struct MethodReport {
  std::string method;  // "chp" or "mchp"
  std::string sets_label, arithmetic;
  std::string price_set;
  std::vector<Money> price, paid_price;
  Money dual_value, gap;
  bool certified = false;
  std::vector<std::string> player_sets;
  std::vector<std::string> set_methods;  // modified pricing only
  std::vector<PaymentLine> rows;
  PaymentLine total;
};

struct OracleLine {
  std::string what;
  double exact = 0, oracle = 0;
  bool ok = true;
};

struct RunReport {
  std::string scenario, digest;
  Money welfare;
  std::vector<DispatchLine> dispatch;
  std::vector<Money> flow;
  std::vector<MethodReport> methods;
  std::vector<OracleLine> oracle;
  std::vector<std::pair<std::string, double>> timings_ms;
};

RunReport run_price(const Scenario& s, const RunOptions& opts);
std::string render_text(const RunReport& r);
std::string render_structured(const RunReport& r);

struct VerifyReport {
  bool member = false;
  std::string method, arithmetic;
  std::vector<std::string> certificate;  // one line per player, then flows
};

VerifyReport run_verify(const Scenario& s, Method method, const std::vector<Rational>& price, const RunOptions& opts);
std::string render_text(const VerifyReport& v);
std::string render_structured(const VerifyReport& v);

struct GoldenCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Golden assertions for builtin example n (1..9).
std::vector<GoldenCheck> reproduce(int n);

std::string scenario_digest(const Scenario& s);

}  // namespace mchp
