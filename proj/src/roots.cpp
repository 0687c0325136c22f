#include "wickmart/roots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "wickmart/errors.hpp"

namespace wickmart {

double poly_eval(const std::vector<double>& coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
  std::vector<double> d;
  for (std::size_t i = 1; i < coeffs.size(); ++i) d.push_back(static_cast<double>(i) * coeffs[i]);
  return d;
}

double cauchy_root_bound(const std::vector<double>& coeffs) {
  const double lead = coeffs.back();
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < coeffs.size(); ++i) m = std::max(m, std::abs(coeffs[i] / lead));
  return 1.0 + m;
}

namespace {

std::vector<double> trimmed(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  return c;
}

// |p| scale used to decide whether a critical value counts as a touching root
double residual_scale(const std::vector<double>& c, double x) {
  double s = 0.0, xp = 1.0;
  for (double ci : c) {
    s += std::abs(ci) * std::abs(xp);
    xp *= x;
  }
  return std::max(s, 1.0);
}

// p(a) and p(b) have opposite signs; shrink by bisection, then polish.
double refine_bracket(const std::vector<double>& c, const std::vector<double>& dc, double a, double b) {
  double fa = poly_eval(c, a);
  if (fa == 0.0) return a;
  if (poly_eval(c, b) == 0.0) return b;
  constexpr int kMaxIter = 200;
  int it = 0;
  while (b - a > 1e-12 * (1.0 + std::abs(a) + std::abs(b))) {
    if (++it > kMaxIter)
      throw NumericalError("root refinement exceeded iteration cap on bracket [" +
                           std::to_string(a) + ", " + std::to_string(b) + "]");
    const double mid = 0.5 * (a + b);
    const double fm = poly_eval(c, mid);
    if (fm == 0.0) return mid;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  double x = 0.5 * (a + b);
  const double dpx = poly_eval(dc, x);
  if (dpx != 0.0) {
    const double step = poly_eval(c, x) / dpx;
    if (x - step >= a && x - step <= b) x -= step;
  }
  return x;
}

}  // namespace

std::vector<double> real_roots(const std::vector<double>& raw) {
  const std::vector<double> c = trimmed(raw);
  const std::size_t deg = c.size() - 1;
  std::vector<double> roots;
  if (deg == 0) return roots;
  if (deg == 1) {
    roots.push_back(-c[0] / c[1]);
    return roots;
  }
  if (deg == 2) {
    const double a = c[2], b = c[1], c0 = c[0];
    const double disc = b * b - 4.0 * a * c0;
    if (disc < 0.0) return roots;
    const double sq = std::sqrt(disc);
    // Citardauq form on one branch avoids cancellation
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    double r1 = q / a;
    double r2 = (q != 0.0) ? c0 / q : -b / (2.0 * a);
    if (r1 > r2) std::swap(r1, r2);
    roots.push_back(r1);
    if (disc > 0.0 && r2 != r1) roots.push_back(r2);
    return roots;
  }

  const std::vector<double> dc = poly_derivative(c);
  const std::vector<double> crit = real_roots(dc);
  const double bound = cauchy_root_bound(c);

  std::vector<double> nodes;
  nodes.push_back(-bound);
  for (double x : crit)
    if (x > -bound && x < bound) nodes.push_back(x);
  nodes.push_back(bound);

  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i], b = nodes[i + 1];
    const double fa = poly_eval(c, a), fb = poly_eval(c, b);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      roots.push_back(refine_bracket(c, dc, a, b));
    } else if (i > 0 && std::abs(fa) <= 1e-11 * residual_scale(c, a)) {
      roots.push_back(a);  // tangential root at a critical point
    }
  }

  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) { return std::abs(x - y) <= 1e-10 * (1.0 + std::abs(x)); }),
              roots.end());
  return roots;
}

}  // namespace wickmart
