#include <doctest.h>

#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "wickmart/errors.hpp"
#include "wickmart/gff.hpp"
#include "wickmart/stats.hpp"

using namespace wickmart;

TEST_CASE("k_cumulative basics") {
  KernelDecomposition kd;
  CHECK(k_cumulative(kd, 3.7, 0.0) == 3.7);  // integrand identically 1
  CHECK(k_cumulative(kd, 0.0, 0.5) == 0.0);

  // closed form via the exponential integral:
  // K_t(r) = (E1(r^2/2) - E1(e^{2t} r^2/2)) / 2
  for (double r : {0.1, 0.5, 1.0}) {
    for (double t : {0.5, 2.0, 10.0}) {
      const double a = r * r / 2.0;
      const double b = std::exp(2.0 * t) * a;
      const double closed =
          0.5 * (boost::math::expint(1, a) - (b < 700.0 ? boost::math::expint(1, b) : 0.0));
      CHECK(k_cumulative(kd, t, r) == doctest::Approx(closed).epsilon(1e-9));
    }
  }

  // r = 1: bounded by a constant < 1 uniformly in t
  CHECK(k_cumulative(kd, 50.0, 1.0) < 1.0);

  // fine-grid Riemann oracle
  const double r = 0.3, t = 2.0;
  double riemann = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) * t / n;
    riemann += kd.q(u, r) * t / n;
  }
  CHECK(k_cumulative(kd, t, r) == doctest::Approx(riemann).epsilon(1e-8));
}

TEST_CASE("log divergence window: K matches min(t, ln 1/r) up to a constant") {
  KernelDecomposition kd;
  double c_meas = 0.0;
  for (double t : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    for (double r = 1e-4; r <= 1.5; r *= 2.0) {
      const double k = k_cumulative(kd, t, r);
      const double target = std::min(t, std::max(0.0, std::log(1.0 / r)));
      c_meas = std::max(c_meas, std::abs(k - target));
    }
  }
  INFO("measured constant C = ", c_meas);
  CHECK(c_meas < 1.0);
  // the deep log window specifically
  for (double t : {2.0, 5.0, 10.0}) {
    for (double r = std::exp(-t); r <= 0.5; r *= 1.9) {
      CHECK(std::abs(k_cumulative(kd, 40.0, r) - std::log(1.0 / r)) <= c_meas + 1e-9);
    }
  }
}

TEST_CASE("beta integrability: stable below 2, diverging trend at 2") {
  KernelDecomposition kd;
  const GridDomain dom = GridDomain::unit_square(8);
  for (double beta : {0.5, 1.0, 1.99}) {
    const BetaIntegrability bi = beta_integrability(kd, beta, dom);
    CHECK(std::isfinite(bi.value));
    CHECK(bi.value > 0.0);
    CHECK(bi.rel_change < 1e-6);
  }
  CHECK_THROWS_AS(beta_integrability(kd, 2.0, dom), ValidationError);
  CHECK_THROWS_AS(beta_integrability(kd, -0.5, dom), ValidationError);

  // at beta = 2 the mass concentrates at vanishing separations: refining the
  // grid keeps increasing the quadrature, unlike any beta < 2
  const double v8 = beta_integral_raw(kd, 2.0, GridDomain::unit_square(8), 25.0);
  const double v16 = beta_integral_raw(kd, 2.0, GridDomain::unit_square(16), 25.0);
  const double v32 = beta_integral_raw(kd, 2.0, GridDomain::unit_square(32), 25.0);
  CHECK(v16 > v8 * 1.05);
  CHECK(v32 > v16 * 1.05);

  const double w8 = beta_integral_raw(kd, 1.0, GridDomain::unit_square(8), 25.0);
  const double w32 = beta_integral_raw(kd, 1.0, GridDomain::unit_square(32), 25.0);
  CHECK(std::abs(w32 - w8) / w8 < 0.25);
}

TEST_CASE("gram matrices are PSD at every scale") {
  KernelDecomposition kd;
  for (int m : {4, 8}) {
    const GramReport rep = gram_psd_report(kd, GridDomain::unit_square(m), 1.0);
    CHECK(rep.n_scales_checked == 100);
    CHECK(rep.min_eigenvalue >= -1e-10);
  }
}

TEST_CASE("single grid point is a standard Brownian motion in t") {
  KernelDecomposition kd;
  const GridDomain dom = GridDomain::unit_square(1);
  const FieldSimulator sim(kd, dom, 2.0);
  RunningStat stat;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    const FieldSnapshot snap = sim.snapshot(77, r, 2.0);
    stat.add(snap.values[0] * snap.values[0]);
  }
  // E X_t^2 = t exactly; fourth-moment stderr for the variance estimate
  const double se = stat.stderr_of_mean();
  CHECK(std::abs(stat.mean() - 2.0) <= 4.0 * se);
}

TEST_CASE("two-point covariance matches k_cumulative") {
  KernelDecomposition kd;
  GridDomain dom;
  dom.m = 2;  // 2x2 grid, neighbours at distance 1/2
  const double t = 1.0;
  const CovarianceCheck chk = covariance_check(kd, dom, t, 10000, 2024);
  INFO("max |emp - K| = ", chk.max_abs_error, ", in SE units: ", chk.max_error_over_se);
  CHECK(chk.max_error_over_se <= 4.0);
}

TEST_CASE("field snapshots are deterministic and thread-invariant") {
  KernelDecomposition kd;
  const GridDomain dom = GridDomain::unit_square(3);
  const WickPolynomial p = wick_order(Polynomial::from_string("0,0,0,0,1"));
  const auto a = sample_field_functionals(kd, dom, p, {0.5, 1.0}, 32, 9, 1);
  const auto b = sample_field_functionals(kd, dom, p, {0.5, 1.0}, 32, 9, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t r = 0; r < a[k].size(); ++r) CHECK(a[k][r] == b[k][r]);
}

TEST_CASE("field functional basics") {
  KernelDecomposition kd;
  const GridDomain dom = GridDomain::unit_square(4);
  const WickPolynomial p = wick_order(Polynomial::from_string("0,0,0,0,1"));

  // zero field at t = 1 on the unit square: P(0;1) * area = 3
  FieldSnapshot zero;
  zero.t = 1.0;
  zero.m = 4;
  zero.values.assign(16, 0.0);
  CHECK(field_functional(zero, p, dom) == doctest::Approx(3.0));

  // Wick centering: E D_t = 0
  const auto samples = sample_field_functionals(kd, dom, p, {1.0}, 3000, 5150);
  RunningStat stat;
  for (double v : samples[0]) stat.add(v);
  CHECK(std::abs(stat.mean()) <= 4.0 * stat.stderr_of_mean());

  // hard lower bound -6 t^2 area(Lambda) for the quartic
  for (double v : samples[0]) CHECK(v >= -6.0 * 1.0 * 1.0 - 1e-9);
}

TEST_CASE("field decomposition: D_t - D_L - D_H is the Ito discretization gap") {
  KernelDecomposition kd;
  const GridDomain dom = GridDomain::unit_square(4);
  const WickPolynomial p = wick_order(Polynomial::from_string("0,0,0,0,1"));
  ConeConfig cone;
  cone.A = 3.0;
  const double t = 2.0;
  const FieldDecomposition dec = sample_field_decomposition(kd, dom, p, cone, t, 200, 33);
  RunningStat gap;
  for (std::size_t r = 0; r < dec.d_l.size(); ++r)
    gap.add(std::abs(dec.d_end[r] - (dec.d_l[r] + dec.d_h[r])));
  // D_0 = P(0;0) * area = 0 for the quartic; gap is the O(sqrt(du)) Ito error
  CHECK(gap.mean() <= 50.0 * std::sqrt(kd.du));
  for (std::size_t r = 0; r < dec.d_l.size(); ++r) CHECK(dec.realized_qv[r] >= 0.0);
}

TEST_CASE("snapshot dump writes binary plus json header") {
  KernelDecomposition kd;
  const GridDomain dom = GridDomain::unit_square(3);
  const FieldSnapshot snap = sample_field(kd, dom, 0.5, 42, 7);
  const std::string prefix = "/tmp/wickmart_test_snapshot";
  dump_snapshot(snap, dom, prefix);

  std::ifstream bin(prefix + ".f64", std::ios::binary);
  REQUIRE(bin.good());
  std::vector<double> back(9);
  bin.read(reinterpret_cast<char*>(back.data()), 9 * sizeof(double));
  CHECK(bin.gcount() == 9 * sizeof(double));
  for (int i = 0; i < 9; ++i) CHECK(back[static_cast<std::size_t>(i)] == snap.values[static_cast<std::size_t>(i)]);

  std::ifstream hdr(prefix + ".json");
  REQUIRE(hdr.good());
  std::string text((std::istreambuf_iterator<char>(hdr)), std::istreambuf_iterator<char>());
  CHECK(text.find("float64-le") != std::string::npos);
  CHECK(text.find("row-major") != std::string::npos);
  std::remove((prefix + ".f64").c_str());
  std::remove((prefix + ".json").c_str());
}

TEST_CASE("factorization failure paths are guarded") {
  KernelDecomposition kd;
  GridDomain dom = GridDomain::unit_square(70);
  CHECK_THROWS_AS(FieldSimulator(kd, dom, 0.1), ValidationError);  // grid cap
  dom.m = 0;
  CHECK_THROWS_AS(dom.validate(), ValidationError);
}
