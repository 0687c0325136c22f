#ifndef WICKMART_ESTIMATORS_HPP
#define WICKMART_ESTIMATORS_HPP

#include <cstdint>
#include <vector>

#include "wickmart/envelope.hpp"
#include "wickmart/gff.hpp"
#include "wickmart/stats.hpp"
#include "wickmart/wickpoly.hpp"

namespace wickmart {

// MC mean of exp(lambda B_t - lambda^2 t / 2) from exact N(0, t) samples;
// the target value is 1 for every (lambda, t).
McEstimate exp_martingale_check(double lambda, double t, std::int64_t n, std::uint64_t seed,
                                int threads = 0);

struct MgfPoint {
  double alpha = 0.0;
  double log_mgf = 0.0;
  double stderr_ = 0.0;
  bool dropped = false;  // overflow or jackknife degeneracy at this alpha
};

struct MgfCurve {
  std::vector<MgfPoint> points;
  double c_hat = 0.0;          // least squares of log-MGF = C alpha^2 through the origin
  double residual_max = 0.0;   // max |log-MGF - C alpha^2| over kept points
  double linear_term = 0.0;    // diagnostic b from log-MGF = b alpha + c alpha^2
  double quad_term = 0.0;      // c from the same two-parameter fit
  double c2 = 0.0, c4 = 0.0;   // from log-MGF = c2 alpha^2 + c4 alpha^4
  double quartic_ratio = 0.0;  // |c4| alpha_max^2 / |c2|: quartic vs quadratic at the edge
  bool quadratic_rejected = false;  // linear term dominates the quadratic at the edge
};

// Per-alpha log-mean-exp with delete-one jackknife errors and the quadratic /
// quartic fits described above. Overflowing alphas are dropped and flagged.
MgfCurve mgf_curve(const std::vector<double>& samples, const std::vector<double>& alphas);

// Deterministic upper bound for the quadratic variation of D_L up to time t:
//   int_0^t [ sup_{|v| <= g(s)} |P'(v; s)| ]^2 * (da^2 sum_{x,y} Q_s(x,y)) ds
// evaluated on the kernel scale grid.
double qv_bound(const WickPolynomial& p, const ConeConfig& cone, const KernelDecomposition& kd,
                const GridDomain& domain, double t);

// sup over [-g, g] of |P'(v; s)| via the critical points of P''.
double sup_abs_dx(const WickPolynomial& p, double s, double g);

struct NegExpMoment {
  double t = 0.0;
  double alpha = 0.0;
  McEstimate estimate;     // of exp(-alpha D_t)
  double ci_low = 0.0, ci_high = 0.0;  // mean +/- 1.96 SE
  double ess = 0.0;        // (sum w)^2 / sum w^2
  bool reliable = true;    // ESS >= 50
};

std::vector<NegExpMoment> neg_exp_moment(double alpha, const std::vector<double>& t_list,
                                         const KernelDecomposition& kd, const GridDomain& domain,
                                         const WickPolynomial& p, std::int64_t n_replicas,
                                         std::uint64_t seed, int threads = 0);

}  // namespace wickmart

#endif
