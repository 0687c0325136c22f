#ifndef WICKMART_PATHS_HPP
#define WICKMART_PATHS_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "wickmart/envelope.hpp"
#include "wickmart/stats.hpp"
#include "wickmart/wickpoly.hpp"

namespace wickmart {

struct SimConfig {
  double dt = 1e-3;
  double t_max = 40.0;
  std::int64_t n_paths = 10000;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = library default

  void validate() const;
  std::size_t n_steps() const;
};

enum class StepLabel : unsigned char { Low = 0, High = 1 };

// One discretized path together with its detected stopping times.
// h_times[k] is the k-th entry into the cone (start of a HIGH interval),
// l_times[k] the matching return to the zero envelope. By convention the
// path starts LOW (L_0 = 0).
struct PathRecord {
  double dt = 0.0;
  std::vector<double> values;      // grid values, size n_steps + 1
  std::vector<StepLabel> labels;   // label of step [t_i, t_{i+1}), size n_steps
  std::vector<double> h_times;
  std::vector<double> l_times;

  double time_at(std::size_t i) const { return dt * static_cast<double>(i); }
};

struct PathFunctionals {
  double d_t = 0.0;  // P(B_end; t_end)
  double d_l = 0.0;  // Ito sum of P'(B;s) dB over LOW steps
  double d_h = 0.0;  // same over HIGH steps
  double q = 0.0;    // sum of cone values P(g(H_k); H_k) over detected hits
  int n_hits = 0;
  // true when the last HIGH excursion is still open at t_max; d_h then carries
  // the positive in-flight term P(B_end) - P(B at the last cone entry)
  bool ends_high = false;
};

// Classifies an existing value grid in place (used by tests with synthetic
// paths and by the simulators). envelope must cover [0, t_max] at the same dt.
void classify_path(PathRecord& path, const ConeConfig& cone, const EnvelopeTable& envelope);

PathRecord simulate_path(const SimConfig& cfg, const ConeConfig& cone,
                         const EnvelopeTable& envelope, std::uint64_t path_index);

PathFunctionals decompose(const PathRecord& path, const WickPolynomial& p,
                          const ConeConfig& cone);

// Streaming one-pass equivalent of simulate_path + decompose (no path storage).
PathFunctionals simulate_functionals_one(const SimConfig& cfg, const WickPolynomial& p,
                                         const ConeConfig& cone, const EnvelopeTable& envelope,
                                         std::uint64_t path_index);

// Per-path functionals for cfg.n_paths paths; deterministic in (seed, index).
std::vector<PathFunctionals> simulate_functionals(const SimConfig& cfg, const WickPolynomial& p,
                                                  const ConeConfig& cone);

struct HittingStats {
  std::vector<int> m;                    // 1..m_max
  std::vector<McEstimate> mean_count;    // MC mean of #{k : H_k in (m-1, m]}
  std::vector<double> paper_bound;       // 8 / sqrt(2 pi m) exp(-m/2)
  // pooled over m: P[count >= k+1 | count >= k] for k = 1, 2
  struct Ratio {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t denom = 0;
  };
  Ratio halving_k1, halving_k2;
};

HittingStats hitting_counts(const SimConfig& cfg, const WickPolynomial& p, const ConeConfig& cone,
                            int m_max);

// MC estimate of P[sup_{s<=m} |B_s| >= m].
McEstimate sup_tail(const SimConfig& cfg, double m);

inline double hitting_bound(double m) {
  return 8.0 / std::sqrt(2.0 * 3.14159265358979323846 * m) * std::exp(-0.5 * m);
}
inline double sup_tail_bound(double m) { return 0.5 * hitting_bound(m); }

}  // namespace wickmart

#endif
