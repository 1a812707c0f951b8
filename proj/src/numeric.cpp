#include "mchp/numeric.hpp"

#include <cstdio>

namespace mchp {

namespace {

Integer pow10(int n) {
  Integer r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

Rational parse_plain(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  int exp10 = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view ex = s.substr(e + 1);
    bool eneg = false;
    if (!ex.empty() && (ex[0] == '+' || ex[0] == '-')) {
      eneg = ex[0] == '-';
      ex.remove_prefix(1);
    }
    if (!all_digits(ex) || ex.size() > 6) throw std::invalid_argument("bad exponent");
    exp10 = std::stoi(std::string(ex)) * (eneg ? -1 : 1);
    s = s.substr(0, e);
  }
  std::string digits;
  int frac = 0;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) ||
        (!fp.empty() && !all_digits(fp)))
      throw std::invalid_argument("bad number");
    digits = std::string(ip) + std::string(fp);
    frac = static_cast<int>(fp.size());
  } else {
    if (!all_digits(s)) throw std::invalid_argument("bad number");
    digits = std::string(s);
  }
  if (digits.empty()) digits = "0";
  Rational r{Integer(digits)};
  int shift = exp10 - frac;
  if (shift > 0) r *= Rational(pow10(shift));
  if (shift < 0) r /= Rational(pow10(-shift));
  return neg ? Rational(-r) : r;
}

}  // namespace

Rational parse_decimal(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_plain(text.substr(0, slash));
    Rational den = parse_plain(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return num / den;
  }
  return parse_plain(text);
}

Rational round_to_cents(const Rational& x) {
  Rational scaled = x * 100;
  Rational a = scaled < 0 ? Rational(-scaled) : scaled;
  Integer q = numerator(a) / denominator(a);
  Rational rest = a - Rational(q);
  if (rest * 2 >= 1) q += 1;
  Rational r = Rational(q) / 100;
  return scaled < 0 ? Rational(-r) : r;
}

double round_to_cents(double x) { return std::round(x * 100.0) / 100.0; }

std::string format_fixed(const Rational& x, int places) {
  Integer scale = pow10(places);
  Rational scaled = x * Rational(scale);
  bool neg = scaled < 0;
  Rational a = neg ? Rational(-scaled) : scaled;
  Integer q = numerator(a) / denominator(a);
  Rational rest = a - Rational(q);
  if (rest * 2 > 1 || (rest * 2 == 1 && q % 2 == 1)) q += 1;
  std::string digits = q.str();
  if (places > 0) {
    if (static_cast<int>(digits.size()) <= places)
      digits = std::string(places + 1 - digits.size(), '0') + digits;
    digits.insert(digits.size() - places, ".");
  }
  if (neg && q != 0) digits = "-" + digits;
  return digits;
}

std::string format_fixed(double x, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, x);
  std::string s = buf;
  if (s.rfind("-0.", 0) == 0 && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string exact_text(const Rational& x) {
  if (denominator(x) == 1) return numerator(x).str();
  return numerator(x).str() + "/" + denominator(x).str();
}

std::optional<Rational> Num<Rational>::sqrt(const Rational& a) {
  if (a < 0) return std::nullopt;
  Integer n = numerator(a), d = denominator(a);
  Integer sn = boost::multiprecision::sqrt(n), sd = boost::multiprecision::sqrt(d);
  if (sn * sn != n || sd * sd != d)
    throw InexactError("square root of " + exact_text(a) + " is irrational");
  return Rational(sn) / Rational(sd);
}

std::string Num<double>::text(double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", a);
  return buf;
}

}  // namespace mchp
