#ifndef WICKMART_STATS_HPP
#define WICKMART_STATS_HPP

#include <cstdint>
#include <vector>

namespace wickmart {

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
};

// Welford accumulator with an exact merge, so chunked parallel reductions
// give the same result as a serial pass when merged in a fixed order.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const RunningStat& o);

  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_of_mean() const;
  McEstimate estimate(std::uint64_t seed = 0) const { return {mean(), stderr_of_mean(), n_, seed}; }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// log(sum exp(x_i)) with max shift
double log_sum_exp(const std::vector<double>& xs);

// P[N(0,1) >= x]
double normal_upper_tail(double x);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
};
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

// least squares fit y = c2 x^2 (through the origin)
double fit_quadratic_origin(const std::vector<double>& xs, const std::vector<double>& ys);

// least squares fit y = c2 x^2 + c4 x^4
struct QuarticFit {
  double c2 = 0.0;
  double c4 = 0.0;
};
QuarticFit fit_quadratic_quartic(const std::vector<double>& xs, const std::vector<double>& ys);

// Delete-one jackknife for theta = ln((1/n) sum exp(alpha*y_i)).
// Returns {theta, jackknife stderr, ESS}. Overflow-safe via max shift.
// ess = (sum w)^2 / sum w^2 measures how many samples carry the estimate;
// points with a collapsed ESS are not trustworthy at any n.
struct LogMgfPoint {
  double value = 0.0;
  double stderr_ = 0.0;
  double ess = 0.0;
  bool reliable = true;
};
LogMgfPoint log_mgf_jackknife(const std::vector<double>& samples, double alpha);

}  // namespace wickmart

#endif
