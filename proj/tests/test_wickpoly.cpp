#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "wickmart/errors.hpp"
#include "wickmart/rng.hpp"
#include "wickmart/stats.hpp"
#include "wickmart/wickpoly.hpp"

using namespace wickmart;

namespace {

// Gauss-Hermite nodes/weights for the standard normal weight, via the
// Golub-Welsch eigenvalue construction on the probabilists' Jacobi matrix.
// Exact for polynomials of degree <= 2m - 1; independent of the library's
// Hermite recurrence code path.
struct GaussHermite {
  std::vector<double> nodes, weights;
  explicit GaussHermite(int m) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) {
      const double b = std::sqrt(static_cast<double>(i + 1));
      jac(i, i + 1) = b;
      jac(i + 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    for (int k = 0; k < m; ++k) {
      nodes.push_back(es.eigenvalues()(k));
      const double v0 = es.eigenvectors()(0, k);
      weights.push_back(v0 * v0);
    }
  }
  double integrate(const std::function<double(double)>& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(nodes[k]);
    return acc;
  }
};

double he_eval(const HermiteTable& table, int k, double x) {
  double acc = 0.0;
  const auto& row = table.rows[static_cast<std::size_t>(k)];
  for (auto it = row.rbegin(); it != row.rend(); ++it) acc = acc * x + static_cast<double>(*it);
  return acc;
}

}  // namespace

TEST_CASE("hermite base cases and hand-derived rows") {
  const HermiteTable t0 = hermite(0);
  REQUIRE(t0.rows.size() == 1);
  CHECK(t0.rows[0] == std::vector<BigInt>{1});

  const HermiteTable t4 = hermite(4);
  // one recurrence step from He_0, He_1
  CHECK(t4.rows[2] == std::vector<BigInt>{-1, 0, 1});
  // He_4 = x^4 - 6x^2 + 3 by applying the recurrence by hand
  CHECK(t4.rows[4] == std::vector<BigInt>{3, 0, -6, 0, 1});
}

TEST_CASE("hermite recurrence holds exactly for the whole table") {
  const HermiteTable t = hermite(12);
  for (int k = 1; k < 12; ++k) {
    const auto& prev = t.rows[static_cast<std::size_t>(k) - 1];
    const auto& cur = t.rows[static_cast<std::size_t>(k)];
    const auto& next = t.rows[static_cast<std::size_t>(k) + 1];
    for (int j = 0; j <= k + 1; ++j) {
      BigInt expect = 0;
      if (j >= 1) expect += cur[static_cast<std::size_t>(j) - 1];
      if (j <= k - 1) expect -= k * prev[static_cast<std::size_t>(j)];
      CHECK(next[static_cast<std::size_t>(j)] == expect);
    }
    CHECK(cur.back() == 1);  // unit leading coefficient
  }
}

TEST_CASE("hermite degree cap") {
  CHECK_NOTHROW(hermite(64));
  CHECK_THROWS_AS(hermite(65), ValidationError);
  CHECK_THROWS_AS(hermite(-1), ValidationError);
}

TEST_CASE("hermite orthogonality under the normal weight") {
  const HermiteTable t = hermite(6);
  const GaussHermite gh(16);
  for (int i = 0; i <= 6; ++i) {
    for (int j = 0; j <= 6; ++j) {
      const double val = gh.integrate([&](double x) { return he_eval(t, i, x) * he_eval(t, j, x); });
      if (i != j) {
        CHECK(std::abs(val) < 1e-10);
      } else {
        double fact = 1.0;  // <He_i, He_i> = i!
        for (int k = 2; k <= i; ++k) fact *= k;
        CHECK(val == doctest::Approx(fact).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("wick_order on x^4 reproduces the quartic expansion") {
  const WickPolynomial p = wick_order(Polynomial::from_string("0,0,0,0,1"));
  CHECK(p.degree() == 4);
  CHECK(p.coef(4, 0) == 1);
  CHECK(p.coef(2, 1) == -6);
  CHECK(p.coef(0, 2) == 3);
  CHECK(p.coef(0, 0) == 0);
  CHECK(p.coef(2, 0) == 0);
  CHECK(p.coef(0, 1) == 0);
  // (x^2 - 3t)^2 - 6t^2 form: the minimum over x is -6t^2, attained at x^2 = 3t
  for (double t : {0.25, 1.0, 3.0}) {
    const double x = std::sqrt(3.0 * t);
    CHECK(p.eval(x, t) == doctest::Approx(-6.0 * t * t).epsilon(1e-12));
  }
}

TEST_CASE("wick_order input validation") {
  CHECK_THROWS_AS(wick_order(Polynomial::from_string("0,0,1")), ValidationError);        // degree 2
  CHECK_THROWS_AS(wick_order(Polynomial::from_string("0,0,0,0,0,1")), ValidationError);  // odd
  CHECK_THROWS_AS(wick_order(Polynomial::from_string("0,0,0,0,2")), ValidationError);    // non-monic
}

TEST_CASE("wick_order is linear in sub-leading terms") {
  const WickPolynomial quartic = wick_order(Polynomial::from_string("0,0,0,0,1"));
  const WickPolynomial mixed = wick_order(Polynomial::from_string("0,0,3/7,0,1"));
  // x^2 Wick-orders to x^2 - t, scaled by 3/7
  const Rational c(3, 7);
  for (int j = 0; j <= 4; ++j)
    for (int k = 0; k <= 2; ++k) {
      Rational expect = quartic.coef(j, k);
      if (j == 2 && k == 0) expect += c;
      if (j == 0 && k == 1) expect -= c;
      CHECK(mixed.coef(j, k) == expect);
    }
}

TEST_CASE("eval matches the worked values") {
  const WickPolynomial p = wick_order(Polynomial::from_string("0,0,0,0,1"));
  CHECK(p.eval(2.0, 1.0) == doctest::Approx(-5.0));  // 16 - 24 + 3
  CHECK(p.eval(0.0, 1.0) == doctest::Approx(3.0));
  CHECK(p.eval_dx(2.0, 1.0) == doctest::Approx(8.0));  // 4x^3 - 12tx at (2,1)
  CHECK(p.eval_dx(0.0, 0.7) == 0.0);

  // t = 0 recovers R for any polynomial
  const Polynomial r = Polynomial::from_string("2,0,-1,0.5,0,0,1");
  const WickPolynomial pr = wick_order(r);
  for (double x : {-2.0, -0.3, 0.0, 1.7}) CHECK(pr.eval(x, 0.0) == doctest::Approx(r.eval(x)).epsilon(1e-13));
}

TEST_CASE("eval_dx agrees with a central finite difference") {
  const WickPolynomial p = wick_order(Polynomial::from_string("1,0,2,0,0,1/3,0,0,1"));
  GaussianStream rng(123, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = 4.0 * rng.gaussian();
    const double t = std::abs(2.0 * rng.gaussian());
    const double h = 1e-6 * (1.0 + std::abs(x));
    const double fd = (p.eval(x + h, t) - p.eval(x - h, t)) / (2.0 * h);
    const double an = p.eval_dx(x, t);
    CHECK(an == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("leading x-power keeps unit coefficient for all t") {
  for (const char* spec : {"0,0,0,0,1", "0,0,0,0,0,0,1", "5,-1,0,2,0,0,0,0,1"}) {
    const WickPolynomial p = wick_order(Polynomial::from_string(spec));
    const int d = p.degree();
    CHECK(p.coef(d, 0) == 1);
    for (int k = 1; k <= p.half_degree(); ++k) CHECK(p.coef(d, k) == 0);
  }
}

// The Wick expansion solves the backward heat equation d/dt P + (1/2) d2/dx2 P = 0
// coefficientwise; this is the algebraic form of the martingale property.
TEST_CASE("heat identity holds exactly on the coefficients") {
  for (const char* spec : {"0,0,0,0,1", "0,0,1,0,1", "-3,1/2,0,2,0,7,0,0,0,0,1"}) {
    const WickPolynomial p = wick_order(Polynomial::from_string(spec));
    const int d = p.degree();
    for (int j = 0; j <= d; ++j)
      for (int k = 1; 2 * k + j <= d; ++k) {
        const Rational lhs = Rational(k) * p.coef(j, k);
        const Rational rhs = Rational(-(j + 2) * (j + 1), 2) * p.coef(j + 2, k - 1);
        CHECK(lhs == rhs);
      }
  }
}

TEST_CASE("martingale nullity: MC mean of P(B_t; t) vanishes") {
  for (int n = 2; n <= 6; ++n) {
    std::vector<Rational> coeffs(static_cast<std::size_t>(2 * n) + 1, Rational(0));
    coeffs.back() = 1;
    const WickPolynomial p = wick_order(Polynomial(coeffs));
    for (double t : {0.5, 1.0, 2.0}) {
      RunningStat stat;
      GaussianStream rng(2024, static_cast<std::uint64_t>(n));
      const double sq = std::sqrt(t);
      for (int i = 0; i < 200000; ++i) stat.add(p.eval(sq * rng.gaussian(), t));
      const double se = stat.stderr_of_mean();
      INFO("n=", n, " t=", t, " mean=", stat.mean(), " se=", se);
      CHECK(std::abs(stat.mean()) <= 4.0 * se);
    }
  }
}

TEST_CASE("terms() lists the bivariate expansion in canonical order") {
  const WickPolynomial p = wick_order(Polynomial::from_string("0,0,0,0,1"));
  const auto terms = p.terms();
  REQUIRE(terms.size() == 3);
  CHECK(terms[0].xpow == 4);
  CHECK(terms[0].tpow == 0);
  CHECK(terms[0].coef == 1);
  CHECK(terms[1].xpow == 2);
  CHECK(terms[1].tpow == 1);
  CHECK(terms[1].coef == -6);
  CHECK(terms[2].xpow == 0);
  CHECK(terms[2].tpow == 2);
  CHECK(terms[2].coef == 3);
}
