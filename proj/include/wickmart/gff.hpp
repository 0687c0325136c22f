#ifndef WICKMART_GFF_HPP
#define WICKMART_GFF_HPP

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wickmart/rng.hpp"

#include "wickmart/envelope.hpp"
#include "wickmart/stats.hpp"
#include "wickmart/wickpoly.hpp"

namespace wickmart {

// Scale decomposition Q_u(x,y) = exp(-e^{2u} |x-y|^2 / 2). The diagonal is
// identically 1, so the cut-off field has K_t(x,x) = t exactly, and the
// spatial mass of Q_u scales like e^{-2u}, which makes the e^{beta u}
// integral finite precisely for beta < 2.
struct KernelDecomposition {
  double du = 1e-2;     // scale step of the simulated field
  double u_max = 20.0;  // truncation used by the integral diagnostics

  double q(double u, double r) const { return std::exp(-std::exp(2.0 * u) * r * r * 0.5); }
};

// Axis-aligned rectangle sampled at the centers of an m x m uniform cell grid.
struct GridDomain {
  double x0 = 0.0, y0 = 0.0;
  double width = 1.0, height = 1.0;
  int m = 8;

  static GridDomain unit_square(int m);
  void validate() const;
  int n_points() const { return m * m; }
  double cell_area() const;
  double area() const { return width * height; }
  double diameter() const;
  // row-major cell centers
  std::vector<std::pair<double, double>> points() const;
  // mean point-to-point distance inside one cell, used as the regularized
  // diagonal separation in pair quadratures
  double intra_cell_distance() const;
};

struct FieldSnapshot {
  double t = 0.0;
  int m = 0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::vector<double> values;  // row-major, size m*m
};

// K_t(r) = int_0^t exp(-e^{2u} r^2 / 2) du, adaptive quadrature, |err| <= 1e-10.
double k_cumulative(const KernelDecomposition& kd, double t, double r);

// Truncated integral  int_{Lambda^2} int_0^{u_max} e^{beta u} Q_u(x,y) du dx dy
// on the grid-pair quadrature. No domain validation; used by divergence probes.
double beta_integral_raw(const KernelDecomposition& kd, double beta, const GridDomain& domain,
                         double u_max);

struct BetaIntegrability {
  double value = 0.0;            // at kd.u_max
  double value_extended = 0.0;   // at kd.u_max + 5
  double rel_change = 0.0;
};
// Validates 0 < beta < 2 (the integral diverges at beta >= 2 for this kernel).
BetaIntegrability beta_integrability(const KernelDecomposition& kd, double beta,
                                     const GridDomain& domain);

// Gram matrix [Q_u(x_i, x_j)] diagnostics over the scale steps up to t.
struct GramReport {
  double min_eigenvalue = 0.0;  // over all checked scales
  int n_scales_checked = 0;
  int n_jittered = 0;           // factorizations that needed the 1e-10 jitter
};
GramReport gram_psd_report(const KernelDecomposition& kd, const GridDomain& domain, double t);

// Walks the scale discretization u_j = (j + 1/2) du, advancing all requested
// replicas with shared Cholesky factors (computed once, read-only).
class FieldSimulator {
 public:
  FieldSimulator(const KernelDecomposition& kd, const GridDomain& domain, double t_end);

  std::size_t n_steps() const { return widths_.size(); }
  double t_end() const { return t_end_; }
  const GridDomain& domain() const { return domain_; }
  // cumulative time after step s
  double t_after(std::size_t s) const { return t_bounds_[s]; }
  // number of steps whose boundary reaches t (throws unless t is a boundary)
  std::size_t steps_to(double t) const;

  // Per-step visitor:
  //   visit(step_idx, t_before, u_mid, width, state_before, increment)
  // with vectors of size m^2; the state update happens afterwards.
  // Deterministic in (seed, replica) for any thread layout.
  template <class Visitor>
  void run_replica(std::uint64_t seed, std::uint64_t replica, Visitor&& visit,
                   std::size_t step_limit = SIZE_MAX) const {
    const int d = dim_;
    GaussianStream rng(seed, replica);
    std::vector<double> state(static_cast<std::size_t>(d), 0.0);
    std::vector<double> xi(static_cast<std::size_t>(d));
    std::vector<double> inc(static_cast<std::size_t>(d));
    const std::size_t n = std::min(step_limit, widths_.size());
    double t_before = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double sw = std::sqrt(widths_[s]);
      for (int i = 0; i < d; ++i) xi[static_cast<std::size_t>(i)] = rng.gaussian();
      const double* lf = factors_[s].data();
      for (int i = 0; i < d; ++i) {
        const double* row = lf + static_cast<std::size_t>(i) * static_cast<std::size_t>(d);
        double acc = 0.0;
        for (int j = 0; j <= i; ++j) acc += row[j] * xi[static_cast<std::size_t>(j)];
        inc[static_cast<std::size_t>(i)] = sw * acc;
      }
      visit(s, t_before, u_mids_[s], widths_[s], state, inc);
      for (int i = 0; i < d; ++i) state[static_cast<std::size_t>(i)] += inc[static_cast<std::size_t>(i)];
      t_before += widths_[s];
    }
  }

  // Snapshot values at time t (must be a step boundary).
  FieldSnapshot snapshot(std::uint64_t seed, std::uint64_t replica, double t) const;

 private:
  KernelDecomposition kd_;
  GridDomain domain_;
  double t_end_ = 0.0;
  std::vector<double> widths_;   // step widths, sum == t_end
  std::vector<double> u_mids_;
  std::vector<double> t_bounds_;
  std::vector<std::vector<double>> factors_;  // lower Cholesky factors, row-major
  int dim_ = 0;
};

// One field replica at time t (convenience wrapper over FieldSimulator).
FieldSnapshot sample_field(const KernelDecomposition& kd, const GridDomain& domain, double t,
                           std::uint64_t seed, std::uint64_t replica);

// Midpoint quadrature of P(X_t(x); t) over the domain.
double field_functional(const FieldSnapshot& snapshot, const WickPolynomial& p,
                        const GridDomain& domain);

// D_t samples for every t in t_list (ascending), common replicas across t.
std::vector<std::vector<double>> sample_field_functionals(const KernelDecomposition& kd,
                                                          const GridDomain& domain,
                                                          const WickPolynomial& p,
                                                          const std::vector<double>& t_list,
                                                          std::int64_t n_replicas,
                                                          std::uint64_t seed, int threads = 0);

struct CovarianceCheck {
  double t = 0.0;
  int m = 0;
  double max_abs_error = 0.0;   // max_ij |empirical - K_t(r_ij)|
  double max_error_over_se = 0.0;
  std::int64_t n = 0;
};
CovarianceCheck covariance_check(const KernelDecomposition& kd, const GridDomain& domain, double t,
                                 std::int64_t n_replicas, std::uint64_t seed, int threads = 0);

// Low-interval Ito sums of the field functional: per-replica D_L(t), D_H(t),
// realized quadratic variation of D_L, and the high-value sum over sites.
struct FieldDecomposition {
  std::vector<double> d_l;
  std::vector<double> d_h;
  std::vector<double> realized_qv;
  std::vector<double> d_end;  // D_t at t_end
};
FieldDecomposition sample_field_decomposition(const KernelDecomposition& kd,
                                              const GridDomain& domain, const WickPolynomial& p,
                                              const ConeConfig& cone, double t,
                                              std::int64_t n_replicas, std::uint64_t seed,
                                              int threads = 0);

// Binary snapshot dump: row-major little-endian doubles plus a JSON header.
void dump_snapshot(const FieldSnapshot& snapshot, const GridDomain& domain,
                   const std::string& path_prefix);

}  // namespace wickmart

#endif
