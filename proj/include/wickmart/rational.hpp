#ifndef WICKMART_RATIONAL_HPP
#define WICKMART_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

#include "wickmart/errors.hpp"

namespace wickmart {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Parses a decimal literal ("1", "-0.25", "3e-2", "1/3") into an exact rational.
Rational parse_rational(const std::string& text);

// Comma-separated, degree-ascending coefficient list, e.g. "0,0,0,0,1".
std::vector<Rational> parse_coeff_list(const std::string& text);

inline double to_double(const Rational& r) { return static_cast<double>(r); }

}  // namespace wickmart

#endif
