#include "wickmart/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "wickmart/errors.hpp"
#include "wickmart/parallel.hpp"
#include "wickmart/rng.hpp"
#include "wickmart/roots.hpp"

namespace wickmart {

McEstimate exp_martingale_check(double lambda, double t, std::int64_t n, std::uint64_t seed,
                                int threads) {
  if (std::abs(lambda) > 2.0) throw ValidationError("exp_martingale_check: |lambda| must be <= 2");
  if (t <= 0.0) throw ValidationError("exp_martingale_check: t must be > 0");
  if (n < 100) throw ValidationError("exp_martingale_check: n must be >= 100");

  const double sq = std::sqrt(t);
  const double shift = 0.5 * lambda * lambda * t;
  std::vector<RunningStat> parts(n_chunks_for(static_cast<std::size_t>(n), 1 << 14));
  const int use_threads = threads > 0 ? threads : default_threads();
  parallel_chunks(static_cast<std::size_t>(n), 1 << 14, use_threads,
                  [&](std::size_t ci, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      GaussianStream rng(seed, i);
                      parts[ci].add(std::exp(lambda * sq * rng.gaussian() - shift));
                    }
                  });
  RunningStat agg;
  for (const auto& part : parts) agg.merge(part);
  return agg.estimate(seed);
}

MgfCurve mgf_curve(const std::vector<double>& samples, const std::vector<double>& alphas) {
  if (samples.size() < 1000) throw ValidationError("mgf_curve: need >= 10^3 samples");
  if (alphas.empty()) throw ValidationError("mgf_curve: empty alpha grid");

  MgfCurve curve;
  std::vector<double> xs, ys;
  double alpha_max = 0.0;
  for (double a : alphas) {
    MgfPoint pt;
    pt.alpha = a;
    if (a == 0.0) {
      pt.log_mgf = 0.0;
      pt.stderr_ = 0.0;
    } else {
      const LogMgfPoint lp = log_mgf_jackknife(samples, a);
      pt.log_mgf = lp.value;
      pt.stderr_ = lp.stderr_;
      // a collapsed effective sample size means the point is carried by a
      // handful of extreme samples and would poison the fit
      pt.dropped = !lp.reliable || !std::isfinite(lp.value) || lp.ess < 50.0;
    }
    if (!pt.dropped) {
      xs.push_back(a);
      ys.push_back(pt.log_mgf);
      alpha_max = std::max(alpha_max, std::abs(a));
    }
    curve.points.push_back(pt);
  }
  if (xs.size() < 3) throw NumericalError("mgf_curve: too few usable alphas after overflow drops");

  curve.c_hat = fit_quadratic_origin(xs, ys);
  for (std::size_t i = 0; i < xs.size(); ++i)
    curve.residual_max = std::max(curve.residual_max, std::abs(ys[i] - curve.c_hat * xs[i] * xs[i]));

  // two-parameter fit b alpha + c alpha^2 for the linear diagnostic
  {
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double a = xs[i], a2 = xs[i] * xs[i];
      s11 += a * a;
      s12 += a * a2;
      s22 += a2 * a2;
      b1 += a * ys[i];
      b2 += a2 * ys[i];
    }
    const double det = s11 * s22 - s12 * s12;
    if (det != 0.0) {
      curve.linear_term = (b1 * s22 - b2 * s12) / det;
      curve.quad_term = (s11 * b2 - s12 * b1) / det;
    }
    const double lin_edge = std::abs(curve.linear_term) * alpha_max;
    const double quad_edge = std::abs(curve.quad_term) * alpha_max * alpha_max;
    curve.quadratic_rejected = lin_edge > 0.5 * quad_edge;
  }

  const QuarticFit qf = fit_quadratic_quartic(xs, ys);
  curve.c2 = qf.c2;
  curve.c4 = qf.c4;
  curve.quartic_ratio =
      curve.c2 != 0.0 ? std::abs(curve.c4) * alpha_max * alpha_max / std::abs(curve.c2) : 0.0;
  return curve;
}

double sup_abs_dx(const WickPolynomial& p, double s, double g) {
  const std::vector<double> dp = p.dx_poly_at(s);
  double best = std::max(std::abs(poly_eval(dp, g)), std::abs(poly_eval(dp, -g)));
  for (double c : real_roots(poly_derivative(dp)))
    if (c > -g && c < g) best = std::max(best, std::abs(poly_eval(dp, c)));
  return best;
}

double qv_bound(const WickPolynomial& p, const ConeConfig& cone, const KernelDecomposition& kd,
                const GridDomain& domain, double t) {
  if (t < 0.0) throw ValidationError("qv_bound: t must be >= 0");
  domain.validate();
  const double da = domain.cell_area();

  // pair separations with multiplicities, diagonal regularized
  std::vector<std::pair<double, double>> dists;
  {
    const double hx = domain.width / static_cast<double>(domain.m);
    const double hy = domain.height / static_cast<double>(domain.m);
    for (int di = 0; di < domain.m; ++di)
      for (int dj = 0; dj < domain.m; ++dj) {
        double mult = static_cast<double>(domain.m - di) * static_cast<double>(domain.m - dj);
        if (di > 0) mult *= 2.0;
        if (dj > 0) mult *= 2.0;
        // same-cell pairs use the mean intra-cell separation; the exact
        // diagonal is a measure-zero set of the continuum double integral and
        // keeping it at r = 0 would make the bound grow without limit in t
        const double r = (di == 0 && dj == 0)
                             ? domain.intra_cell_distance()
                             : std::hypot(static_cast<double>(di) * hy, static_cast<double>(dj) * hx);
        dists.emplace_back(r, mult);
      }
  }

  double acc = 0.0;
  double s_acc = 0.0;
  while (s_acc < t - 1e-12) {
    const double w = std::min(kd.du, t - s_acc);
    const double s_mid = s_acc + 0.5 * w;
    double gram_mass = 0.0;
    for (const auto& [r, mult] : dists) gram_mass += mult * kd.q(s_mid, r);
    const double sup = sup_abs_dx(p, s_mid, cone.g(s_mid));
    acc += sup * sup * gram_mass * da * da * w;
    s_acc += w;
  }
  return acc;
}

std::vector<NegExpMoment> neg_exp_moment(double alpha, const std::vector<double>& t_list,
                                         const KernelDecomposition& kd, const GridDomain& domain,
                                         const WickPolynomial& p, std::int64_t n_replicas,
                                         std::uint64_t seed, int threads) {
  if (alpha < 0.0 || alpha > 0.2) throw ValidationError("neg_exp_moment: alpha must lie in [0, 0.2]");
  if (domain.m > 16) throw ValidationError("neg_exp_moment: grid capped at 16x16");

  const std::vector<std::vector<double>> d_samples =
      sample_field_functionals(kd, domain, p, t_list, n_replicas, seed, threads);

  std::vector<NegExpMoment> out;
  for (std::size_t k = 0; k < t_list.size(); ++k) {
    NegExpMoment row;
    row.t = t_list[k];
    row.alpha = alpha;
    RunningStat st;
    double wsum = 0.0, wsq = 0.0;
    for (double dv : d_samples[k]) {
      const double w = std::exp(-alpha * dv);
      st.add(w);
      wsum += w;
      wsq += w * w;
    }
    row.estimate = st.estimate(seed);
    row.ci_low = row.estimate.mean - 1.96 * row.estimate.stderr_;
    row.ci_high = row.estimate.mean + 1.96 * row.estimate.stderr_;
    row.ess = wsq > 0.0 ? wsum * wsum / wsq : 0.0;
    row.reliable = row.ess >= 50.0;
    out.push_back(row);
  }
  return out;
}

}  // namespace wickmart
