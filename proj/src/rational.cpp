#include "wickmart/rational.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

namespace wickmart {

namespace {

BigInt pow10(long e) {
  BigInt p = 1;
  for (long i = 0; i < e; ++i) p *= 10;
  return p;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ValidationError("empty coefficient");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw ValidationError("zero denominator in '" + text + "'");
    return num / den;
  }

  bool neg = false;
  std::size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') neg = (s[pos++] == '-');

  std::string digits;
  long frac_len = 0;
  long exponent = 0;
  bool seen_dot = false, seen_digit = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++frac_len;
      seen_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if ((c == 'e' || c == 'E') && seen_digit) {
      exponent = std::strtol(s.c_str() + pos + 1, nullptr, 10);
      break;
    } else {
      throw ValidationError("cannot parse coefficient '" + text + "'");
    }
  }
  if (!seen_digit) throw ValidationError("cannot parse coefficient '" + text + "'");

  BigInt mant(digits.empty() ? "0" : digits);
  if (neg) mant = -mant;
  long net = exponent - frac_len;
  Rational r(mant);
  if (net > 0)
    r *= Rational(pow10(net));
  else if (net < 0)
    r /= Rational(pow10(-net));
  return r;
}

std::vector<Rational> parse_coeff_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
  if (out.empty()) throw ValidationError("empty coefficient list");
  return out;
}

}  // namespace wickmart
