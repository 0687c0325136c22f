#ifndef WICKMART_ROOTS_HPP
#define WICKMART_ROOTS_HPP

#include <vector>

namespace wickmart {

// All real roots of a polynomial (degree-ascending double coefficients),
// returned ascending, multiple roots reported once.
//
// Roots are isolated by recursive derivative interlacing: the polynomial is
// monotone between consecutive critical points, so every sign change brackets
// exactly one root. Brackets are resolved by bisection to ~1e-12 relative
// width followed by one guarded Newton polish. Tangential (even-multiplicity)
// roots are picked up at critical points with near-zero residual.
std::vector<double> real_roots(const std::vector<double>& coeffs);

// 1 + max |c_i / c_d|; every real root lies in [-bound, bound].
double cauchy_root_bound(const std::vector<double>& coeffs);

double poly_eval(const std::vector<double>& coeffs, double x);
std::vector<double> poly_derivative(const std::vector<double>& coeffs);

}  // namespace wickmart

#endif
