#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

namespace culpa {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// "p/q", "-p/q" or a plain integer. No decimals: the format is exact by contract.
inline bool parse_rational_literal(std::string_view text, Rational& out) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  auto parse_int = [&](std::string_view s, BigInt& v) {
    s = trim(s);
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      neg = s.front() == '-';
      s.remove_prefix(1);
    }
    if (s.empty()) return false;
    v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') return false;
      v = v * 10 + (c - '0');
    }
    if (neg) v = -v;
    return true;
  };
  text = trim(text);
  const auto slash = text.find('/');
  BigInt num, den = 1;
  if (slash == std::string_view::npos) {
    if (!parse_int(text, num)) return false;
  } else {
    if (!parse_int(text.substr(0, slash), num)) return false;
    auto rest = trim(text.substr(slash + 1));
    if (rest.empty() || rest.front() == '-' || rest.front() == '+') return false;
    if (!parse_int(rest, den) || den == 0) return false;
  }
  out = Rational(num, den);
  return true;
}

inline std::string to_string(const Rational& r) { return r.str(); }

// Decimal rendering for display only, rounded half away from zero to at most
// `significant` significant digits. Never parsed back.
inline std::string to_decimal(const Rational& r, int significant = 20) {
  if (r == 0) return "0";
  const bool neg = r < 0;
  const Rational a = neg ? Rational(-r) : r;
  BigInt num = boost::multiprecision::numerator(a);
  BigInt den = boost::multiprecision::denominator(a);

  // exponent e such that 10^e <= a < 10^(e+1)
  int e = 0;
  {
    BigInt ip = num / den;
    if (ip > 0) {
      e = static_cast<int>(ip.str().size()) - 1;
    } else {
      BigInt n = num;
      while (n < den) {
        n *= 10;
        --e;
      }
    }
  }
  const int frac_digits = std::max(0, significant - 1 - e);
  BigInt scale = 1;
  for (int i = 0; i < frac_digits; ++i) scale *= 10;
  BigInt scaled_num = num * scale * 2 + den;  // round half up: floor((2*n*s + d) / (2*d))
  BigInt q = scaled_num / (den * 2);

  std::string digits = q.str();
  std::string out;
  if (frac_digits == 0) {
    out = digits;
  } else {
    if (static_cast<int>(digits.size()) <= frac_digits)
      digits.insert(0, static_cast<std::size_t>(frac_digits) - digits.size() + 1, '0');
    out = digits.substr(0, digits.size() - static_cast<std::size_t>(frac_digits)) + "." +
          digits.substr(digits.size() - static_cast<std::size_t>(frac_digits));
    while (!out.empty() && out.back() == '0') out.pop_back();
    if (!out.empty() && out.back() == '.') out.pop_back();
  }
  return neg ? "-" + out : out;
}

}  // namespace culpa
