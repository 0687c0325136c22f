#ifndef WICKMART_QUADRATURE_HPP
#define WICKMART_QUADRATURE_HPP

#include <functional>

namespace wickmart {

// Adaptive Simpson integration of f over [a, b] to absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol);

}  // namespace wickmart

#endif
