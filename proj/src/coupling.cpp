#include "wickmart/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "wickmart/errors.hpp"
#include "wickmart/parallel.hpp"
#include "wickmart/rng.hpp"

namespace wickmart {

double line_hit_prob(double z) {
  if (z > 0.0) throw ValidationError("line_hit_prob: z must be <= 0");
  return std::exp(2.0 * z);
}

double two_boundary_prob(double z, double big_l) {
  if (big_l >= 0.0) throw ValidationError("two_boundary_prob: L must be < 0");
  if (z < big_l || z > 0.0) throw ValidationError("two_boundary_prob: need L <= z <= 0");
  return (1.0 - std::exp(2.0 * z)) / (1.0 - std::exp(2.0 * big_l));
}

CouplingResult independent_coupling(double z1, double z2, const SimConfig& cfg,
                                    const WickPolynomial& p, const ConeConfig& cone,
                                    const EnvelopeTable& envelope, double t_offset,
                                    std::uint64_t replica) {
  (void)p;
  cfg.validate();
  if (z1 > z2) throw ValidationError("independent_coupling: need z1 <= z2");
  const std::size_t n = cfg.n_steps();
  const double sdt = std::sqrt(cfg.dt);
  GaussianStream rng1(cfg.seed, 2 * replica);
  GaussianStream rng2(cfg.seed, 2 * replica + 1);

  CouplingResult out;
  const double f0 = envelope(t_offset);
  BarrierTracker trk1(z1, f0), trk2(z2, f0);
  double b1 = z1, b2 = z2;
  bool merged = (z1 == z2);
  if (merged) out.tau = 0.0;

  for (std::size_t i = 0; i <= n; ++i) {
    const double s = cfg.dt * static_cast<double>(i);
    const double f = envelope(t_offset + s);
    const double g = cone.g(t_offset + s);
    switch (trk1.feed(b1, f, g)) {
      case BarrierTracker::Event::HitE: out.l1_bar.push_back(s); break;
      case BarrierTracker::Event::HitC: out.h1_bar.push_back(s); break;
      default: break;
    }
    switch (trk2.feed(b2, f, g)) {
      case BarrierTracker::Event::HitE: out.l2_bar.push_back(s); break;
      case BarrierTracker::Event::HitC: out.h2_bar.push_back(s); break;
      default: break;
    }
    if (i == n) break;
    const double d1 = sdt * rng1.gaussian();
    const double d2 = sdt * rng2.gaussian();
    if (!merged) {
      const double nb1 = b1 + d1, nb2 = b2 + d2;
      bool meet = (nb2 - nb1) <= 0.0;
      if (!meet) {
        // bridge correction for the difference process (variance rate 2):
        // crossing probability exp(-a b / dt) for endpoints a, b > 0
        const double pa = (b2 - b1) * (nb2 - nb1) / cfg.dt;
        if (pa < 40.0 && rng1.uniform() < std::exp(-pa)) meet = true;
      }
      if (meet) {
        merged = true;
        out.tau = cfg.dt * static_cast<double>(i + 1);
        b1 = nb1;
        b2 = nb1;
      } else {
        b1 = nb1;
        b2 = nb2;
      }
    } else {
      b1 += d1;
      b2 = b1;
    }
  }

  const double h1 = out.h1_bar.empty() ? kAbsent : out.h1_bar.front();
  const double h2 = out.h2_bar.empty() ? kAbsent : out.h2_bar.front();
  out.t_cap = std::min({h1, h2, 1.0});
  return out;
}

CouplingResult parallel_exit(double z1, double z2, const SimConfig& cfg, const WickPolynomial& p,
                             const ConeConfig& cone, const EnvelopeTable& envelope, double t_offset,
                             std::uint64_t replica) {
  (void)p;
  cfg.validate();
  if (z1 > z2) throw ValidationError("parallel_exit: need z1 <= z2");
  const std::size_t n = cfg.n_steps();
  const double sdt = std::sqrt(cfg.dt);
  const double gap = z2 - z1;
  GaussianStream rng(cfg.seed, replica);

  CouplingResult out;
  double b1 = z1;
  bool below_lower_env = false;  // state of B^2 relative to -f after S1
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = cfg.dt * static_cast<double>(i);
    const double f = envelope(t_offset + s);
    const double g = cone.g(t_offset + s);
    const double b2 = b1 + gap;
    out.max_gap_error = std::max(out.max_gap_error, std::abs((b2 - b1) - gap));
    if (out.s1 == kAbsent && std::abs(b1) >= g) {
      out.s1 = s;
      out.b1_exit_lower = (b1 <= -g);
      below_lower_env = (b2 < -f);
    }
    if (out.s2 == kAbsent && std::abs(b2) >= g) out.s2 = s;
    if (out.s1 != kAbsent && s > out.s1 && out.s2_prime == kAbsent) {
      const bool below = (b2 < -f);
      if (below != below_lower_env || b2 == -f) out.s2_prime = s;
      below_lower_env = below;
    }
    if (out.s1 != kAbsent && out.s2 != kAbsent && out.s2_prime != kAbsent) break;
    if (i == n) break;
    b1 += sdt * rng.gaussian();
  }
  out.s1_before_s2 = out.s1 < out.s2;
  return out;
}

McEstimate mc_line_hit(double z, const SimConfig& cfg) {
  if (z > 0.0) throw ValidationError("mc_line_hit: z must be <= 0");
  cfg.validate();
  const std::size_t n = cfg.n_steps();
  const std::size_t n_items = static_cast<std::size_t>(cfg.n_paths);
  std::vector<RunningStat> parts(n_chunks_for(n_items, 512));
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();
  parallel_chunks(n_items, 512, threads, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    const double sdt = std::sqrt(cfg.dt);
    for (std::size_t idx = begin; idx < end; ++idx) {
      GaussianStream rng(cfg.seed, idx);
      double y = z;  // y = z + B_s - s; hit when y >= 0
      bool hit = (y >= 0.0);
      for (std::size_t i = 0; i < n && !hit; ++i) {
        const double ny = y + sdt * rng.gaussian() - cfg.dt;
        if (ny >= 0.0) {
          hit = true;
        } else {
          // Brownian bridge crossing of the flat barrier at 0 (the drift does
          // not enter given the endpoints); removes the O(sqrt(dt)) bias
          const double pa = 2.0 * y * ny / cfg.dt;
          if (pa < 40.0 && rng.uniform() < std::exp(-pa)) hit = true;
        }
        y = ny;
      }
      parts[ci].add(hit ? 1.0 : 0.0);
    }
  });
  RunningStat agg;
  for (const auto& part : parts) agg.merge(part);
  return agg.estimate(cfg.seed);
}

McEstimate mc_two_boundary(double z, double big_l, const SimConfig& cfg) {
  if (big_l >= 0.0 || z < big_l || z > 0.0)
    throw ValidationError("mc_two_boundary: need L < 0 and L <= z <= 0");
  cfg.validate();
  const std::size_t n = cfg.n_steps();
  const std::size_t n_items = static_cast<std::size_t>(cfg.n_paths);
  std::vector<RunningStat> parts(n_chunks_for(n_items, 512));
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();
  parallel_chunks(n_items, 512, threads, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    const double sdt = std::sqrt(cfg.dt);
    for (std::size_t idx = begin; idx < end; ++idx) {
      GaussianStream rng(cfg.seed, idx);
      double y = z;  // drift -1 diffusion; absorb at big_l (success) or 0 (failure)
      double result = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double ny = y + sdt * rng.gaussian() - cfg.dt;
        if (ny <= big_l) {
          result = 1.0;
          break;
        }
        if (ny >= 0.0) break;
        // bridge crossings of the two flat barriers; crossing both within one
        // step needs a double traversal and is negligible at these widths
        const double pl = 2.0 * (y - big_l) * (ny - big_l) / cfg.dt;
        if (pl < 40.0 && rng.uniform() < std::exp(-pl)) {
          result = 1.0;
          break;
        }
        const double pu = 2.0 * y * ny / cfg.dt;
        if (pu < 40.0 && rng.uniform() < std::exp(-pu)) break;
        y = ny;
      }
      parts[ci].add(result);
    }
  });
  RunningStat agg;
  for (const auto& part : parts) agg.merge(part);
  return agg.estimate(cfg.seed);
}

TauScaling tau_scaling(const std::vector<double>& gaps, const SimConfig& cfg,
                       const WickPolynomial& p, const ConeConfig& cone, double t_offset) {
  cfg.validate();
  const EnvelopeTable envelope(p, cfg.dt, t_offset + cfg.t_max);
  TauScaling out;
  out.gaps = gaps;
  for (double gap : gaps) {
    const double z1 = -0.5 * gap, z2 = 0.5 * gap;
    const std::size_t n_items = static_cast<std::size_t>(cfg.n_paths);
    std::vector<RunningStat> parts(n_chunks_for(n_items, 256));
    const int threads = cfg.threads > 0 ? cfg.threads : default_threads();
    parallel_chunks(n_items, 256, threads, [&](std::size_t ci, std::size_t begin, std::size_t end) {
      for (std::size_t idx = begin; idx < end; ++idx) {
        const CouplingResult r =
            independent_coupling(z1, z2, cfg, p, cone, envelope, t_offset, idx);
        parts[ci].add(r.tau > r.t_cap ? 1.0 : 0.0);
      }
    });
    RunningStat agg;
    for (const auto& part : parts) agg.merge(part);
    out.p_exceed.push_back(agg.estimate(cfg.seed));
  }
  std::vector<double> ys;
  for (const auto& e : out.p_exceed) ys.push_back(e.mean);
  out.fit = fit_line(out.gaps, ys);
  return out;
}

ParallelExitStats parallel_exit_stats(double z1, double z2, const SimConfig& cfg,
                                      const WickPolynomial& p, const ConeConfig& cone,
                                      double t_offset) {
  cfg.validate();
  const EnvelopeTable envelope(p, cfg.dt, t_offset + cfg.t_max);
  const std::size_t n_items = static_cast<std::size_t>(cfg.n_paths);
  struct Part {
    std::int64_t s1_first = 0, lower = 0, next_event = 0;
    RunningStat gap_err, v1, v2, diff;
  };
  std::vector<Part> parts(n_chunks_for(n_items, 256));
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();
  parallel_chunks(n_items, 256, threads, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const CouplingResult r = parallel_exit(z1, z2, cfg, p, cone, envelope, t_offset, idx);
      parts[ci].gap_err.add(r.max_gap_error);
      const double val1 = r.s1 != kAbsent ? p.eval(cone.g(t_offset + r.s1), t_offset + r.s1) : 0.0;
      const double val2 = r.s2 != kAbsent ? p.eval(cone.g(t_offset + r.s2), t_offset + r.s2) : 0.0;
      parts[ci].v1.add(val1);
      parts[ci].v2.add(val2);
      parts[ci].diff.add(val1 - val2);
      if (r.s1_before_s2 && r.s1 != kAbsent) {
        ++parts[ci].s1_first;
        if (r.b1_exit_lower) ++parts[ci].lower;
        if (r.s2 != kAbsent || r.s2_prime != kAbsent) ++parts[ci].next_event;
      }
    }
  });
  ParallelExitStats out;
  out.n = static_cast<std::int64_t>(n_items);
  RunningStat agg, v1, v2, diff;
  for (const auto& part : parts) {
    out.n_s1_first += part.s1_first;
    out.n_lower_given_first += part.lower;
    out.n_next_event += part.next_event;
    agg.merge(part.gap_err);
    v1.merge(part.v1);
    v2.merge(part.v2);
    diff.merge(part.diff);
  }
  out.gap_error = agg.estimate(cfg.seed);
  out.value1 = v1.estimate(cfg.seed);
  out.value2 = v2.estimate(cfg.seed);
  out.value_diff = diff.estimate(cfg.seed);
  return out;
}

namespace {

// One replica of F(z) for every z in the grid, sharing a single increment
// stream (common random numbers).
void lipschitz_replica(const std::vector<double>& z_grid, const SimConfig& cfg,
                       const WickPolynomial& p, const ConeConfig& cone,
                       const EnvelopeTable& envelope, double t, std::uint64_t replica,
                       std::vector<double>& f_out) {
  const std::size_t n = cfg.n_steps();
  const std::size_t nz = z_grid.size();
  const double sdt = std::sqrt(cfg.dt);
  GaussianStream rng(cfg.seed, replica);

  const double f0 = envelope(t);
  std::vector<BarrierTracker> trackers;
  trackers.reserve(nz);
  for (double z : z_grid) trackers.emplace_back(z, f0);
  std::fill(f_out.begin(), f_out.end(), 0.0);

  double w = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = cfg.dt * static_cast<double>(i);
    const double f = envelope(t + s);
    const double g = cone.g(t + s);
    for (std::size_t j = 0; j < nz; ++j) {
      if (trackers[j].feed(z_grid[j] + w, f, g) == BarrierTracker::Event::HitC)
        f_out[j] += p.eval(g, t + s);
    }
    if (i == n) break;
    w += sdt * rng.gaussian();
  }
}

}  // namespace

LipschitzProbe lipschitz_probe(double t, const std::vector<double>& z_grid, const SimConfig& cfg,
                               const WickPolynomial& p, const ConeConfig& cone) {
  cfg.validate();
  if (z_grid.size() < 1) throw ValidationError("lipschitz_probe: empty z grid");
  for (std::size_t i = 1; i < z_grid.size(); ++i)
    if (!(z_grid[i] > z_grid[i - 1])) throw ValidationError("lipschitz_probe: z grid must ascend");
  for (double z : z_grid)
    if (std::abs(z) > cone.g(t)) throw ValidationError("lipschitz_probe: start outside the cone");
  const EnvelopeTable envelope(p, cfg.dt, t + cfg.t_max);

  const std::size_t nz = z_grid.size();
  const std::size_t n_items = static_cast<std::size_t>(cfg.n_paths);
  struct Part {
    std::vector<RunningStat> value;
    std::vector<RunningStat> slope;
  };
  std::vector<Part> parts(n_chunks_for(n_items, 64));
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();
  parallel_chunks(n_items, 64, threads, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    Part& part = parts[ci];
    part.value.resize(nz);
    part.slope.resize(nz > 1 ? nz - 1 : 0);
    std::vector<double> f_rep(nz);
    for (std::size_t idx = begin; idx < end; ++idx) {
      lipschitz_replica(z_grid, cfg, p, cone, envelope, t, idx, f_rep);
      for (std::size_t j = 0; j < nz; ++j) part.value[j].add(f_rep[j]);
      for (std::size_t j = 0; j + 1 < nz; ++j)
        part.slope[j].add((f_rep[j + 1] - f_rep[j]) / (z_grid[j + 1] - z_grid[j]));
    }
  });

  LipschitzProbe out;
  out.t = t;
  out.z = z_grid;
  std::vector<RunningStat> value(nz), slope(nz > 1 ? nz - 1 : 0);
  for (const auto& part : parts) {
    if (part.value.empty()) continue;
    for (std::size_t j = 0; j < nz; ++j) value[j].merge(part.value[j]);
    for (std::size_t j = 0; j + 1 < nz; ++j) slope[j].merge(part.slope[j]);
  }
  for (std::size_t j = 0; j < nz; ++j) out.value.push_back(value[j].estimate(cfg.seed));
  for (std::size_t j = 0; j + 1 < nz; ++j) {
    out.slope.push_back(std::abs(slope[j].mean()));
    out.slope_se.push_back(slope[j].stderr_of_mean());
    out.max_slope = std::max(out.max_slope, out.slope.back());
  }
  out.c_fit = out.max_slope / std::exp(0.5 * t);
  return out;
}

McEstimate envelope_start_value(double s, const SimConfig& cfg, const WickPolynomial& p,
                                const ConeConfig& cone) {
  const double z = zero_envelope(p, s);
  LipschitzProbe probe = lipschitz_probe(s, {z}, cfg, p, cone);
  return probe.value.front();
}

}  // namespace wickmart
