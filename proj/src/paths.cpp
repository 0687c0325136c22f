#include "wickmart/paths.hpp"

#include <algorithm>
#include <cmath>

#include "wickmart/errors.hpp"
#include "wickmart/parallel.hpp"
#include "wickmart/rng.hpp"

namespace wickmart {

void SimConfig::validate() const {
  if (!(dt > 0.0) || dt > 1e-2) throw ValidationError("SimConfig: dt must lie in (0, 1e-2]");
  if (t_max < 1.0) throw ValidationError("SimConfig: t_max must be >= 1");
  if (n_paths < 1) throw ValidationError("SimConfig: n_paths must be >= 1");
}

std::size_t SimConfig::n_steps() const {
  return static_cast<std::size_t>(std::llround(t_max / dt));
}

void classify_path(PathRecord& path, const ConeConfig& cone, const EnvelopeTable& envelope) {
  const std::size_t n = path.values.size() - 1;
  path.labels.assign(n, StepLabel::Low);
  path.h_times.clear();
  path.l_times.clear();

  bool high = false;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = path.time_at(i);
    const double b = std::abs(path.values[i]);
    if (!high) {
      if (b >= cone.g(t)) {
        high = true;
        path.h_times.push_back(t);
      }
    } else {
      if (b <= envelope.at_index(i)) {
        high = false;
        path.l_times.push_back(t);
      }
    }
    if (i < n) path.labels[i] = high ? StepLabel::High : StepLabel::Low;
  }
}

PathRecord simulate_path(const SimConfig& cfg, const ConeConfig& cone,
                         const EnvelopeTable& envelope, std::uint64_t path_index) {
  cfg.validate();
  const std::size_t n = cfg.n_steps();
  PathRecord path;
  path.dt = cfg.dt;
  path.values.resize(n + 1);
  path.values[0] = 0.0;
  GaussianStream rng(cfg.seed, path_index);
  const double sdt = std::sqrt(cfg.dt);
  for (std::size_t i = 0; i < n; ++i) path.values[i + 1] = path.values[i] + sdt * rng.gaussian();
  classify_path(path, cone, envelope);
  return path;
}

PathFunctionals decompose(const PathRecord& path, const WickPolynomial& p, const ConeConfig& cone) {
  const std::size_t n = path.values.size() - 1;
  PathFunctionals out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = path.time_at(i);
    const double dp = p.eval_dx(path.values[i], t);
    const double db = path.values[i + 1] - path.values[i];
    if (path.labels[i] == StepLabel::Low)
      out.d_l += dp * db;
    else
      out.d_h += dp * db;
  }
  for (double h : path.h_times) out.q += p.eval(cone.g(h), h);
  out.n_hits = static_cast<int>(path.h_times.size());
  out.d_t = p.eval(path.values[n], path.time_at(n));
  out.ends_high = !path.labels.empty() && path.labels.back() == StepLabel::High;
  return out;
}

PathFunctionals simulate_functionals_one(const SimConfig& cfg, const WickPolynomial& p,
                                         const ConeConfig& cone, const EnvelopeTable& envelope,
                                         std::uint64_t path_index) {
  const std::size_t n = cfg.n_steps();
  GaussianStream rng(cfg.seed, path_index);
  const double sdt = std::sqrt(cfg.dt);
  PathFunctionals out;
  double b = 0.0;
  bool high = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = cfg.dt * static_cast<double>(i);
    if (!high) {
      if (std::abs(b) >= cone.g(t)) {
        high = true;
        out.q += p.eval(cone.g(t), t);
        ++out.n_hits;
      }
    } else if (std::abs(b) <= envelope.at_index(i)) {
      high = false;
    }
    const double dp = p.eval_dx(b, t);
    const double db = sdt * rng.gaussian();
    if (high)
      out.d_h += dp * db;
    else
      out.d_l += dp * db;
    b += db;
  }
  out.ends_high = high;
  if (!high && std::abs(b) >= cone.g(cfg.t_max)) {  // endpoint check, matches classify_path
    out.q += p.eval(cone.g(cfg.t_max), cfg.t_max);
    ++out.n_hits;
  }
  out.d_t = p.eval(b, cfg.t_max);
  return out;
}

std::vector<PathFunctionals> simulate_functionals(const SimConfig& cfg, const WickPolynomial& p,
                                                  const ConeConfig& cone) {
  cfg.validate();
  const EnvelopeTable envelope(p, cfg.dt, cfg.t_max);
  std::vector<PathFunctionals> out(static_cast<std::size_t>(cfg.n_paths));
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();
  parallel_chunks(out.size(), 512, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = simulate_functionals_one(cfg, p, cone, envelope, i);
  });
  return out;
}

namespace {

struct HitChunk {
  std::vector<RunningStat> per_m;         // mean count per bin
  std::vector<std::int64_t> ge_k{0, 0, 0};  // pooled #{(path,m): count >= k}, k = 1,2,3
};

}  // namespace

HittingStats hitting_counts(const SimConfig& cfg, const WickPolynomial& p, const ConeConfig& cone,
                            int m_max) {
  cfg.validate();
  if (m_max < 1 || static_cast<double>(m_max) > cfg.t_max)
    throw ValidationError("hitting_counts: need 1 <= m_max <= t_max");
  const EnvelopeTable envelope(p, cfg.dt, cfg.t_max);
  const std::size_t n = cfg.n_steps();
  const std::size_t mm = static_cast<std::size_t>(m_max);

  const std::size_t n_items = static_cast<std::size_t>(cfg.n_paths);
  const std::size_t chunk = 512;
  std::vector<HitChunk> parts(n_chunks_for(n_items, chunk));
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();

  parallel_chunks(n_items, chunk, threads, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    HitChunk& part = parts[ci];
    part.per_m.resize(mm);
    std::vector<int> counts(mm);
    const double sdt = std::sqrt(cfg.dt);
    for (std::size_t idx = begin; idx < end; ++idx) {
      GaussianStream rng(cfg.seed, idx);
      std::fill(counts.begin(), counts.end(), 0);
      double b = 0.0;
      bool high = false;
      for (std::size_t i = 0; i <= n; ++i) {
        const double t = cfg.dt * static_cast<double>(i);
        if (!high) {
          if (std::abs(b) >= cone.g(t)) {
            high = true;
            // bin (m-1, m]: t = 0 lands in the first bin
            const std::size_t bin = static_cast<std::size_t>(std::max(0.0, std::ceil(t) - 1.0));
            if (bin < mm) ++counts[bin];
          }
        } else if (std::abs(b) <= envelope.at_index(i)) {
          high = false;
        }
        if (i < n) b += sdt * rng.gaussian();
      }
      for (std::size_t j = 0; j < mm; ++j) {
        part.per_m[j].add(static_cast<double>(counts[j]));
        for (int k = 1; k <= 3; ++k)
          if (counts[j] >= k) ++part.ge_k[static_cast<std::size_t>(k) - 1];
      }
    }
  });

  HittingStats stats;
  std::vector<RunningStat> agg(mm);
  std::int64_t ge[3] = {0, 0, 0};
  for (const auto& part : parts) {
    if (part.per_m.empty()) continue;
    for (std::size_t j = 0; j < mm; ++j) agg[j].merge(part.per_m[j]);
    for (int k = 0; k < 3; ++k) ge[k] += part.ge_k[static_cast<std::size_t>(k)];
  }
  for (std::size_t j = 0; j < mm; ++j) {
    stats.m.push_back(static_cast<int>(j) + 1);
    stats.mean_count.push_back(agg[j].estimate(cfg.seed));
    stats.paper_bound.push_back(hitting_bound(static_cast<double>(j) + 1.0));
  }
  auto ratio = [](std::int64_t num, std::int64_t den) {
    HittingStats::Ratio r;
    r.denom = den;
    if (den > 0) {
      r.value = static_cast<double>(num) / static_cast<double>(den);
      r.stderr_ = std::sqrt(std::max(r.value * (1.0 - r.value), 0.0) / static_cast<double>(den));
    }
    return r;
  };
  stats.halving_k1 = ratio(ge[1], ge[0]);
  stats.halving_k2 = ratio(ge[2], ge[1]);
  return stats;
}

McEstimate sup_tail(const SimConfig& cfg, double m) {
  cfg.validate();
  if (m > cfg.t_max) throw ValidationError("sup_tail: m must be <= t_max");
  const std::size_t n = static_cast<std::size_t>(std::llround(m / cfg.dt));
  const std::size_t n_items = static_cast<std::size_t>(cfg.n_paths);
  const std::size_t chunk = 512;
  std::vector<RunningStat> parts(n_chunks_for(n_items, chunk));
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();

  parallel_chunks(n_items, chunk, threads, [&](std::size_t ci, std::size_t begin, std::size_t end) {
    const double sdt = std::sqrt(cfg.dt);
    for (std::size_t idx = begin; idx < end; ++idx) {
      GaussianStream rng(cfg.seed, idx);
      double b = 0.0;
      bool hit = false;
      for (std::size_t i = 0; i < n; ++i) {
        b += sdt * rng.gaussian();
        if (std::abs(b) >= m) {
          hit = true;
          break;
        }
      }
      parts[ci].add(hit ? 1.0 : 0.0);
    }
  });

  RunningStat agg;
  for (const auto& part : parts) agg.merge(part);
  return agg.estimate(cfg.seed);
}

}  // namespace wickmart
