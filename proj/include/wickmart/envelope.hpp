#ifndef WICKMART_ENVELOPE_HPP
#define WICKMART_ENVELOPE_HPP

#include <string>
#include <utility>
#include <vector>

#include "wickmart/wickpoly.hpp"

namespace wickmart {

// Calibrated cone g(t) = t + A enclosing the zero envelope of a Wick polynomial.
struct ConeConfig {
  double A = 0.0;                                   // integer-valued cone offset
  std::vector<std::pair<double, double>> eps_table; // (eps, A'(eps)) pairs
  double t_check_max = 0.0;                         // calibration horizon

  double g(double t) const { return t + A; }

  std::string to_json() const;
  static ConeConfig from_json(const std::string& text);
  static ConeConfig load(const std::string& path);
  void save(const std::string& path) const;
};

// f(t) = max{|u| : P(u; t) = 0}, or 0 when P(.; t) has no real root.
// P is positive outside [-f, f].
double zero_envelope(const WickPolynomial& p, double t);

// Envelope values precomputed on the uniform grid t_i = i * dt, i = 0..n.
class EnvelopeTable {
 public:
  EnvelopeTable(const WickPolynomial& p, double dt, double t_max);
  double dt() const { return dt_; }
  double t_max() const { return dt_ * static_cast<double>(values_.size() - 1); }
  double at_index(std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double operator()(double t) const;  // linear interpolation, clamped

 private:
  double dt_;
  std::vector<double> values_;
};

// Exact composition q(t) = P(t + A; t) as a univariate rational polynomial.
std::vector<Rational> cone_poly(const WickPolynomial& p, const Rational& a);

double cone_value(const WickPolynomial& p, const ConeConfig& cfg, double t);

// Smallest integer A >= 1 (plus a +1 safety margin) such that on a dense grid
// over [0, t_max]: f(t) <= t + A, P(t+A; t) > 0 and d/dt P(t+A; t) > 0.
// For each eps, the smallest integer A' with f(t) <= eps*t + A' on the grid.
ConeConfig calibrate_cone(const WickPolynomial& p, double t_max, const std::vector<double>& eps_list);

}  // namespace wickmart

#endif
