#ifndef WICKMART_COUPLING_HPP
#define WICKMART_COUPLING_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "wickmart/envelope.hpp"
#include "wickmart/paths.hpp"
#include "wickmart/stats.hpp"

namespace wickmart {

inline constexpr double kAbsent = std::numeric_limits<double>::infinity();

// Alternating envelope/cone hit sequence for a motion restarted at time
// offset t0: L-bar_k = first touch of E after H-bar_{k-1}, H-bar_k = first
// entry into C after L-bar_k (H-bar_0 = 0). Fed one grid point at a time.
class BarrierTracker {
 public:
  enum class Event : unsigned char { None, HitE, HitC };

  BarrierTracker(double start_value, double f_start)
      : seek_e_(true), above_(std::abs(start_value) > f_start) {}

  Event feed(double value, double f, double g) {
    const double mag = std::abs(value);
    if (seek_e_) {
      const bool above = mag > f;
      if (above != above_ || mag == f) {
        seek_e_ = false;
        return Event::HitE;
      }
      return Event::None;
    }
    if (mag >= g) {
      seek_e_ = true;
      above_ = true;
      return Event::HitC;
    }
    return Event::None;
  }

 private:
  bool seek_e_;
  bool above_;
};

struct CouplingResult {
  double tau = kAbsent;     // meeting time of the independent coupling
  double t_cap = kAbsent;   // min{H-bar^1_1, H-bar^2_1, 1}
  double s1 = kAbsent;      // first cone entry of B^1 (parallel coupling)
  double s2 = kAbsent;      // first cone entry of B^2
  double s2_prime = kAbsent;  // first touch of the lower envelope branch by B^2 after S1
  bool s1_before_s2 = false;
  bool b1_exit_lower = false;  // B^1 left through the lower cone branch at S1
  double max_gap_error = 0.0;  // parallel coupling: max |(B^2 - B^1) - (z2 - z1)|
  std::vector<double> h1_bar, l1_bar, h2_bar, l2_bar;
};

// Two motions from z1 < z2 with independent increments until they first meet,
// identical afterwards. Barriers are the time-shifted E and C at t_offset.
CouplingResult independent_coupling(double z1, double z2, const SimConfig& cfg,
                                    const WickPolynomial& p, const ConeConfig& cone,
                                    const EnvelopeTable& envelope, double t_offset,
                                    std::uint64_t replica);

// Translation coupling B^2 = B^1 + (z2 - z1); records S1, S2, S2'.
CouplingResult parallel_exit(double z1, double z2, const SimConfig& cfg, const WickPolynomial& p,
                             const ConeConfig& cone, const EnvelopeTable& envelope, double t_offset,
                             std::uint64_t replica);

// P_z[exists s: B_s = s] = e^{2z} for z <= 0.
double line_hit_prob(double z);

// Drifted two-boundary exit: probability that B_s - s started at z in [L, 0]
// reaches level L before level 0, L < 0. Closed form (1 - e^{2z}) / (1 - e^{2L}).
double two_boundary_prob(double z, double big_l);

McEstimate mc_line_hit(double z, const SimConfig& cfg);
McEstimate mc_two_boundary(double z, double big_l, const SimConfig& cfg);

struct TauScaling {
  std::vector<double> gaps;
  std::vector<McEstimate> p_exceed;  // P[tau > T_cap] per gap
  LineFit fit;                       // line through the gap grid
};
TauScaling tau_scaling(const std::vector<double>& gaps, const SimConfig& cfg,
                       const WickPolynomial& p, const ConeConfig& cone, double t_offset);

struct ParallelExitStats {
  std::int64_t n = 0;
  std::int64_t n_s1_first = 0;         // S1 < S2 (strict, both observed or S2 absent)
  std::int64_t n_lower_given_first = 0;  // of those, B^1 exited through the lower branch
  std::int64_t n_next_event = 0;       // of those, min(S2, S2') observed within horizon
  McEstimate gap_error;                // max |(B^2 - B^1) - (z2 - z1)| over the path
  McEstimate value1;                   // E[1{S1 observed} P(g(t+S1); t+S1)]
  McEstimate value2;                   // same for S2
  McEstimate value_diff;               // per-replica paired difference of the above
};
ParallelExitStats parallel_exit_stats(double z1, double z2, const SimConfig& cfg,
                                      const WickPolynomial& p, const ConeConfig& cone,
                                      double t_offset);

struct LipschitzProbe {
  double t = 0.0;
  std::vector<double> z;
  std::vector<McEstimate> value;   // F(z) = E_z[sum over H-bar hits of P(g(t+H); t+H)]
  std::vector<double> slope;       // paired-difference quotient between adjacent z
  std::vector<double> slope_se;
  double max_slope = 0.0;
  double c_fit = 0.0;              // max_slope / e^{t/2}
};

// Common random numbers across the z grid: replica r uses one increment
// stream for every start point, so difference quotients are paired.
LipschitzProbe lipschitz_probe(double t, const std::vector<double>& z_grid, const SimConfig& cfg,
                               const WickPolynomial& p, const ConeConfig& cone);

// F evaluated with the start on the envelope, z = f(s), at offset t = s.
McEstimate envelope_start_value(double s, const SimConfig& cfg, const WickPolynomial& p,
                                const ConeConfig& cone);

}  // namespace wickmart

#endif
