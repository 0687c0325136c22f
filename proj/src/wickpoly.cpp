#include "wickmart/wickpoly.hpp"

#include <algorithm>

#include "wickmart/errors.hpp"

namespace wickmart {

HermiteTable hermite(int max_degree) {
  if (max_degree < 0) throw ValidationError("hermite: max_degree must be >= 0");
  if (max_degree > kMaxHermiteDegree)
    throw ValidationError("hermite: degree cap is " + std::to_string(kMaxHermiteDegree) +
                          " in exact arithmetic mode");
  HermiteTable table;
  table.max_degree = max_degree;
  table.rows.resize(static_cast<std::size_t>(max_degree) + 1);
  table.rows[0] = {BigInt(1)};
  if (max_degree >= 1) table.rows[1] = {BigInt(0), BigInt(1)};
  for (int k = 1; k < max_degree; ++k) {
    // He_{k+1} = x He_k - k He_{k-1}
    std::vector<BigInt> next(static_cast<std::size_t>(k) + 2, BigInt(0));
    for (int j = 0; j <= k; ++j) next[static_cast<std::size_t>(j) + 1] += table.rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    for (int j = 0; j < k; ++j) next[static_cast<std::size_t>(j)] -= k * table.rows[static_cast<std::size_t>(k) - 1][static_cast<std::size_t>(j)];
    table.rows[static_cast<std::size_t>(k) + 1] = std::move(next);
  }
  return table;
}

Polynomial::Polynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw ValidationError("polynomial needs at least one coefficient");
  while (coeffs_.size() > 1 && coeffs_.back() == 0) coeffs_.pop_back();
}

Polynomial Polynomial::from_string(const std::string& comma_separated) {
  return Polynomial(parse_coeff_list(comma_separated));
}

double Polynomial::eval(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + to_double(*it);
  return acc;
}

double horner(const std::vector<double>& ascending, double x) {
  double acc = 0.0;
  for (auto it = ascending.rbegin(); it != ascending.rend(); ++it) acc = acc * x + *it;
  return acc;
}

namespace {
const Rational kZero(0);
}

const Rational& WickPolynomial::coef(int j, int k) const {
  if (j < 0 || j > deg_x_ || k < 0) return kZero;
  const auto& row = coef_[static_cast<std::size_t>(j)];
  if (static_cast<std::size_t>(k) >= row.size()) return kZero;
  return row[static_cast<std::size_t>(k)];
}

std::vector<BivariateTerm> WickPolynomial::terms() const {
  std::vector<BivariateTerm> out;
  for (int j = deg_x_; j >= 0; --j)
    for (std::size_t k = 0; k < coef_[static_cast<std::size_t>(j)].size(); ++k)
      if (coef_[static_cast<std::size_t>(j)][k] != 0)
        out.push_back({j, static_cast<int>(k), coef_[static_cast<std::size_t>(j)][k]});
  return out;
}

double WickPolynomial::eval(double x, double t) const {
  double acc = 0.0;
  for (int j = deg_x_; j >= 0; --j) acc = acc * x + horner(cx_[static_cast<std::size_t>(j)], t);
  return acc;
}

double WickPolynomial::eval_dx(double x, double t) const {
  double acc = 0.0;
  for (int j = deg_x_ - 1; j >= 0; --j) acc = acc * x + horner(cdx_[static_cast<std::size_t>(j)], t);
  return acc;
}

std::vector<double> WickPolynomial::x_poly_at(double t) const {
  std::vector<double> out(static_cast<std::size_t>(deg_x_) + 1);
  for (int j = 0; j <= deg_x_; ++j) out[static_cast<std::size_t>(j)] = horner(cx_[static_cast<std::size_t>(j)], t);
  return out;
}

std::vector<double> WickPolynomial::dx_poly_at(double t) const {
  std::vector<double> out(static_cast<std::size_t>(deg_x_));
  for (int j = 0; j < deg_x_; ++j) out[static_cast<std::size_t>(j)] = horner(cdx_[static_cast<std::size_t>(j)], t);
  return out;
}

WickPolynomial wick_order(const Polynomial& r) {
  const int deg = r.degree();
  if (deg < 4) throw ValidationError("wick_order: degree must be >= 4");
  if (deg % 2 != 0) throw ValidationError("wick_order: degree must be even");
  if (!r.monic()) throw ValidationError("wick_order: polynomial must be monic");
  if (deg > kMaxHermiteDegree)
    throw ValidationError("wick_order: degree cap is " + std::to_string(kMaxHermiteDegree));

  const HermiteTable he = hermite(deg);

  WickPolynomial p;
  p.base_ = r;
  p.deg_x_ = deg;
  p.coef_.assign(static_cast<std::size_t>(deg) + 1, {});
  // a_i t^{i/2} He_i(x/sqrt t) contributes a_i he[i][j] to x^j t^{(i-j)/2};
  // He_i has terms of parity i only, so i = j + 2k is the unique source of x^j t^k.
  for (int j = 0; j <= deg; ++j) {
    const int kmax = (deg - j) / 2;
    auto& row = p.coef_[static_cast<std::size_t>(j)];
    row.assign(static_cast<std::size_t>(kmax) + 1, Rational(0));
    for (int k = 0; k <= kmax; ++k) {
      const int i = j + 2 * k;
      row[static_cast<std::size_t>(k)] = r.coeff(i) * Rational(he.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
  }

  p.cx_.resize(static_cast<std::size_t>(deg) + 1);
  p.cdx_.resize(static_cast<std::size_t>(deg));
  for (int j = 0; j <= deg; ++j) {
    auto& dst = p.cx_[static_cast<std::size_t>(j)];
    for (const auto& c : p.coef_[static_cast<std::size_t>(j)]) dst.push_back(to_double(c));
    if (j >= 1) {
      auto& ddst = p.cdx_[static_cast<std::size_t>(j) - 1];
      for (const auto& c : p.coef_[static_cast<std::size_t>(j)]) ddst.push_back(to_double(Rational(j) * c));
    }
  }
  return p;
}

}  // namespace wickmart
