#ifndef WICKMART_WICKPOLY_HPP
#define WICKMART_WICKPOLY_HPP

#include <string>
#include <vector>

#include "wickmart/rational.hpp"

namespace wickmart {

// Coefficients are exact integers; degrees above kMaxHermiteDegree are rejected
// because the entries grow factorially.
inline constexpr int kMaxHermiteDegree = 64;

// Probabilists' Hermite polynomials with unit leading coefficient:
//   He_0 = 1, He_1 = x, He_{k+1}(x) = x He_k(x) - k He_{k-1}(x).
struct HermiteTable {
  int max_degree = 0;
  // rows[k] = degree-ascending coefficients of He_k, size k+1
  std::vector<std::vector<BigInt>> rows;
};

HermiteTable hermite(int max_degree);

// A univariate polynomial with exact rational coefficients, degree-ascending.
class Polynomial {
 public:
  explicit Polynomial(std::vector<Rational> coeffs);
  static Polynomial from_string(const std::string& comma_separated);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const Rational& coeff(int i) const { return coeffs_[static_cast<std::size_t>(i)]; }
  const std::vector<Rational>& coeffs() const { return coeffs_; }

  bool monic() const { return coeffs_.back() == 1; }
  double eval(double x) const;

 private:
  std::vector<Rational> coeffs_;
};

struct BivariateTerm {
  int xpow = 0;
  int tpow = 0;
  Rational coef;
};

// The Wick-ordered companion of an even monic polynomial R:
//   P(x; t) = sum_i a_i t^{i/2} He_i(x / sqrt(t)),
// expanded into exact integer powers of x and t (the half-integer powers
// cancel because He_i only carries terms of the same parity as i).
class WickPolynomial {
 public:
  int degree() const { return deg_x_; }       // degree in x, = 2n
  int half_degree() const { return deg_x_ / 2; }  // n, also the degree in t
  const Polynomial& base() const { return base_; }

  // exact coefficient of x^j t^k (zero outside the stored range)
  const Rational& coef(int j, int k) const;

  // terms with nonzero coefficient, descending xpow then ascending tpow
  std::vector<BivariateTerm> terms() const;

  double eval(double x, double t) const;
  double eval_dx(double x, double t) const;

  // coefficients in v of P(v; t) and of d/dv P(v; t) at fixed t, degree-ascending
  std::vector<double> x_poly_at(double t) const;
  std::vector<double> dx_poly_at(double t) const;

 private:
  friend WickPolynomial wick_order(const Polynomial& r);
  WickPolynomial() = default;

  Polynomial base_{std::vector<Rational>{Rational(0)}};
  int deg_x_ = 0;
  std::vector<std::vector<Rational>> coef_;  // coef_[j][k] <-> x^j t^k
  std::vector<std::vector<double>> cx_;      // double mirror of coef_, per xpow
  std::vector<std::vector<double>> cdx_;     // same for dP/dx
};

// Validates R (even degree >= 4, monic, degree <= kMaxHermiteDegree) and
// expands the Wick ordering with exact arithmetic.
WickPolynomial wick_order(const Polynomial& r);

double horner(const std::vector<double>& ascending, double x);

}  // namespace wickmart

#endif
