#include "wickmart/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wickmart/errors.hpp"

namespace wickmart {

void RunningStat::merge(const RunningStat& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
  const double delta = o.mean_ - mean_;
  const double n = na + nb;
  mean_ += delta * nb / n;
  m2_ += o.m2_ + delta * delta * na * nb / n;
  n_ += o.n_;
}

double RunningStat::stderr_of_mean() const {
  if (n_ < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(n_));
}

double log_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) throw ValidationError("log_sum_exp: empty input");
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) throw ValidationError("fit_line: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  LineFit fit;
  fit.slope = (dn * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / dn;
  double ss_res = 0.0;
  const double ss_tot = syy - sy * sy / dn;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    ss_res += r * r;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (n > 2) {
    const double s2 = ss_res / static_cast<double>(n - 2);
    fit.se_slope = std::sqrt(s2 * dn / den);
    fit.se_intercept = std::sqrt(s2 * sxx / den);
  }
  return fit;
}

double fit_quadratic_origin(const std::vector<double>& xs, const std::vector<double>& ys) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x2 = xs[i] * xs[i];
    num += x2 * ys[i];
    den += x2 * x2;
  }
  if (den == 0.0) throw ValidationError("fit_quadratic_origin: degenerate abscissae");
  return num / den;
}

QuarticFit fit_quadratic_quartic(const std::vector<double>& xs, const std::vector<double>& ys) {
  // normal equations in (x^2, x^4) basis
  double s44 = 0, s46 = 0, s66 = 0;  // sum x^4, x^6, x^8 pairings
  double b2 = 0, b4 = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x2 = xs[i] * xs[i];
    const double x4 = x2 * x2;
    s44 += x4;
    s46 += x4 * x2;
    s66 += x4 * x4;
    b2 += x2 * ys[i];
    b4 += x4 * ys[i];
  }
  const double det = s44 * s66 - s46 * s46;
  if (det == 0.0) throw ValidationError("fit_quadratic_quartic: degenerate abscissae");
  QuarticFit fit;
  fit.c2 = (b2 * s66 - b4 * s46) / det;
  fit.c4 = (s44 * b4 - s46 * b2) / det;
  return fit;
}

LogMgfPoint log_mgf_jackknife(const std::vector<double>& samples, double alpha) {
  const std::size_t n = samples.size();
  if (n < 2) throw ValidationError("log_mgf_jackknife: need >= 2 samples");
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = alpha * samples[i];
  const double m = *std::max_element(z.begin(), z.end());
  LogMgfPoint out;
  if (!std::isfinite(m)) {
    out.value = m;
    out.reliable = false;
    return out;
  }
  double s = 0.0, s2 = 0.0;
  for (double zi : z) {
    const double w = std::exp(zi - m);
    s += w;
    s2 += w * w;
  }
  out.value = m + std::log(s) - std::log(static_cast<double>(n));
  out.ess = s2 > 0.0 ? s * s / s2 : 0.0;

  double jsum = 0.0, jsq = 0.0;
  bool degenerate = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double rest = s - std::exp(z[i] - m);
    if (rest <= 0.0) {
      degenerate = true;
      break;
    }
    const double ti = m + std::log(rest) - std::log(static_cast<double>(n - 1));
    jsum += ti;
    jsq += ti * ti;
  }
  if (degenerate) {
    out.reliable = false;
    out.stderr_ = std::numeric_limits<double>::infinity();
    return out;
  }
  const double dn = static_cast<double>(n);
  const double jmean = jsum / dn;
  const double var = std::max(0.0, jsq / dn - jmean * jmean);
  out.stderr_ = std::sqrt((dn - 1.0) * var);
  return out;
}

}  // namespace wickmart
