#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mchp {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

// Thrown when an exact computation would need an irrational number.
struct InexactError : std::domain_error {
  using std::domain_error::domain_error;
};

// Accepts "12", "-3.25", "1.5e2", "1300/85".
Rational parse_decimal(std::string_view text);

// Half away from zero, used for the price-to-cent payment policy.
Rational round_to_cents(const Rational& x);
double round_to_cents(double x);

// Fixed-point rendering with half-even rounding (display only).
std::string format_fixed(const Rational& x, int places = 2);
std::string format_fixed(double x, int places = 2);

// Exact rational text ("a/b" or "a").
std::string exact_text(const Rational& x);

template <class T>
struct Num;

template <>
struct Num<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "exact";
  static Rational from(const Rational& r) { return r; }
  static double to_double(const Rational& r) { return r.convert_to<double>(); }
  static bool eq(const Rational& a, const Rational& b) { return a == b; }
  static bool le(const Rational& a, const Rational& b) { return a <= b; }
  static bool lt(const Rational& a, const Rational& b) { return a < b; }
  static bool is_zero(const Rational& a) { return a == 0; }
  static Rational abs(const Rational& a) { return a < 0 ? Rational(-a) : a; }
  // Exact square root when both numerator and denominator are perfect squares.
  static std::optional<Rational> sqrt(const Rational& a);
  static std::string text(const Rational& a) { return exact_text(a); }
};

template <>
struct Num<double> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";
  static constexpr double tol = 1e-9;
  static double from(const Rational& r) { return r.convert_to<double>(); }
  static double to_double(double r) { return r; }
  static double scale(double a, double b) {
    double s = std::fabs(a) > std::fabs(b) ? std::fabs(a) : std::fabs(b);
    return s > 1.0 ? s : 1.0;
  }
  static bool eq(double a, double b) { return std::fabs(a - b) <= tol * scale(a, b); }
  static bool le(double a, double b) { return a <= b + tol * scale(a, b); }
  static bool lt(double a, double b) { return a < b - tol * scale(a, b); }
  static bool is_zero(double a) { return std::fabs(a) <= tol; }
  static double abs(double a) { return std::fabs(a); }
  static std::optional<double> sqrt(double a) {
    if (a < 0) {
      if (a > -tol) return 0.0;
      return std::nullopt;
    }
    return std::sqrt(a);
  }
  static std::string text(double a);
};

template <class T>
T round_price(const T& x) {
  return round_to_cents(x);
}

}  // namespace mchp
