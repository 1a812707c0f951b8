#pragma once

#include "mchp/numeric.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mchp {

struct ScenarioError : std::runtime_error {
  ScenarioError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field(field) {}
  std::string field;
};

enum class CurveKind { Affine, Quadratic, Piecewise };

// Convex, non-decreasing, zero at zero.
struct VariableCostCurve {
  CurveKind kind = CurveKind::Affine;
  Rational slope = 0;                               // affine
  Rational linear = 0, quadratic = 0;               // quadratic
  std::vector<std::pair<Rational, Rational>> pieces;  // piecewise: (start, slope), first start 0

  static VariableCostCurve affine(Rational a) {
    VariableCostCurve c;
    c.slope = std::move(a);
    return c;
  }
  bool operator==(const VariableCostCurve&) const = default;
};

struct UnitSpec {
  std::string id;
  Rational g_min = 0, g_max = 0;
  std::optional<Rational> ramp_limit;
  VariableCostCurve variable_cost;
  Rational no_load_cost = 0, startup_cost = 0;
  bool initial_on = false;
  Rational initial_output = 0;
  int node = 1;
  bool operator==(const UnitSpec&) const = default;
};

struct ElasticSegment {
  Rational price, quantity;
  bool operator==(const ElasticSegment&) const = default;
};

struct QuadraticBenefit {
  Rational linear, quadratic, d_max;  // B(x) = linear*x - quadratic*x^2 on [0, d_max]
  bool operator==(const QuadraticBenefit&) const = default;
};

struct DiscreteBlock {
  std::vector<Rational> quantity;  // per period
  Rational price;
  bool operator==(const DiscreteBlock&) const = default;
};

struct ConsumerSpec {
  std::string id;
  std::vector<Rational> fixed_load;                    // per period
  std::vector<std::vector<ElasticSegment>> elastic;    // per period (may be empty)
  std::optional<QuadraticBenefit> quadratic_benefit;   // every period
  std::vector<DiscreteBlock> discrete_blocks;
  int node = 1;
  bool operator==(const ConsumerSpec&) const = default;
};

enum class NetworkKind { OneNode, TwoNode };
enum class RoundingPolicy { Exact, Cent };

struct Network {
  NetworkKind kind = NetworkKind::OneNode;
  Rational line_capacity = 0;
  int node_count() const { return kind == NetworkKind::OneNode ? 1 : 2; }
  bool operator==(const Network&) const = default;
};

struct Scenario {
  std::string name;
  int periods = 1;
  std::vector<UnitSpec> units;
  std::vector<ConsumerSpec> consumers;
  Network network;
  RoundingPolicy rounding = RoundingPolicy::Cent;
  bool operator==(const Scenario&) const = default;
};

Scenario load_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);
std::string serialize_scenario(const Scenario& s);
void validate(const Scenario& s);

// Parameters for the two parametric builtin examples.
struct ExampleParams {
  Rational a = 10, b = 12, w = 100, d_max = 20, g_max = 100;
};
ExampleParams default_params(int n);
Scenario builtin_example(int n);
Scenario builtin_example(int n, const ExampleParams& params);
// Example 5 with the two bids merged into one stepped consumer.
Scenario aggregated_example5();

// ---------------------------------------------------------------------------
// Engine-side representation, templated on the scalar.

// Convex curve c(x) for x >= 0 with c(0) = 0. Consumers are stored as minus
// their benefit so that every player maximises  lam*x - c(x).
template <class T>
struct Curve {
  CurveKind kind = CurveKind::Affine;
  T lin{0}, quad{0};
  std::vector<T> starts, slopes;

  T value(const T& x) const;
  T right_slope(const T& x) const;
  T left_slope(const T& x) const;
  // Interior kinks strictly inside (lo, hi).
  std::vector<T> kinks_in(const T& lo, const T& hi) const;
  // argmax over [lo, hi] of lam*x - c(x), as a closed interval.
  std::pair<T, T> best_response(const T& lam, const T& lo, const T& hi) const;
  // Values of lam at which best_response over [lo, hi] changes shape.
  std::vector<T> response_kinks(const T& lo, const T& hi) const;
  bool curved() const { return kind == CurveKind::Quadratic && quad != 0; }
};

template <class T>
struct Block {
  std::vector<T> quantity;
  T price;
};

template <class T>
struct Player {
  enum class Kind { Producer, Consumer };
  Kind kind = Kind::Producer;
  std::string id;
  int node = 0;  // zero-based
  int sign = 1;  // +1 injects, -1 withdraws
  int periods = 1;
  std::vector<Curve<T>> curve;  // per period

  T g_min{0}, g_max{0}, no_load{0}, startup{0};
  bool initial_on = false;
  T initial_output{0};
  std::optional<T> ramp;

  std::vector<T> fixed_load, elastic_cap;
  std::vector<Block<T>> blocks;

  bool producer() const { return kind == Kind::Producer; }
  int pattern_bits() const { return producer() ? periods : static_cast<int>(blocks.size()); }
  std::uint32_t pattern_count() const { return 1u << pattern_bits(); }
  T offset(std::uint32_t pattern, int t) const;
  // Box bounds on the quantity in period t for the given pattern.
  std::pair<T, T> domain(std::uint32_t pattern, int t) const;
  T fixed_cost(std::uint32_t pattern) const;
  // Net value: -C for producers, elastic benefit plus block benefit for consumers.
  T value(std::uint32_t pattern, const std::vector<T>& q) const;
  // Value of the elastic part only in period t.
  T period_value(std::uint32_t pattern, int t, const T& q) const;
  std::string pattern_text(std::uint32_t pattern) const;
};

template <class T>
struct Market {
  std::string name;
  int periods = 1;
  int nodes = 1;
  T line_capacity{0};
  RoundingPolicy rounding = RoundingPolicy::Cent;
  std::vector<Player<T>> players;  // units first, then consumers
  int unit_count = 0;

  static Market from(const Scenario& s);
  int dim() const { return nodes * periods; }
  int price_index(int node, int t) const { return node * periods + t; }
  std::vector<T> player_prices(const Player<T>& p, const std::vector<T>& prices) const;
  bool has_curvature() const;
  bool has_ramp() const;
};

}  // namespace mchp
