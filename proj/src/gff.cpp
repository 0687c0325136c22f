#include "wickmart/gff.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "wickmart/errors.hpp"
#include "wickmart/parallel.hpp"
#include "wickmart/quadrature.hpp"
#include "wickmart/roots.hpp"

namespace wickmart {

GridDomain GridDomain::unit_square(int m) {
  GridDomain d;
  d.m = m;
  d.validate();
  return d;
}

void GridDomain::validate() const {
  if (m < 1) throw ValidationError("GridDomain: grid size must be >= 1");
  if (!(width > 0.0) || !(height > 0.0)) throw ValidationError("GridDomain: degenerate rectangle");
}

double GridDomain::cell_area() const {
  return (width / static_cast<double>(m)) * (height / static_cast<double>(m));
}

double GridDomain::diameter() const { return std::hypot(width, height); }

std::vector<std::pair<double, double>> GridDomain::points() const {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  const double hx = width / static_cast<double>(m);
  const double hy = height / static_cast<double>(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      pts.emplace_back(x0 + (static_cast<double>(j) + 0.5) * hx,
                       y0 + (static_cast<double>(i) + 0.5) * hy);
  return pts;
}

double GridDomain::intra_cell_distance() const {
  // mean distance between two uniform points in a unit square is
  // (2 + sqrt(2) + 5 asinh(1)) / 15; scale by the cell geometric mean
  const double unit = (2.0 + std::sqrt(2.0) + 5.0 * std::asinh(1.0)) / 15.0;
  const double hx = width / static_cast<double>(m);
  const double hy = height / static_cast<double>(m);
  return unit * std::sqrt(hx * hy);
}

double k_cumulative(const KernelDecomposition& kd, double t, double r) {
  if (t < 0.0 || r < 0.0) throw ValidationError("k_cumulative: t and r must be >= 0");
  if (t == 0.0) return 0.0;
  if (r == 0.0) return t;  // integrand is identically 1
  return integrate([&](double u) { return kd.q(u, r); }, 0.0, t, 1e-10);
}

namespace {

// Unique pair separations (incl. the regularized diagonal) with multiplicities.
std::vector<std::pair<double, double>> pair_distances(const GridDomain& domain) {
  const double hx = domain.width / static_cast<double>(domain.m);
  const double hy = domain.height / static_cast<double>(domain.m);
  std::vector<std::pair<double, double>> out;  // (r, multiplicity)
  const int m = domain.m;
  for (int di = 0; di < m; ++di) {
    for (int dj = 0; dj < m; ++dj) {
      double mult = static_cast<double>(m - di) * static_cast<double>(m - dj);
      if (di > 0) mult *= 2.0;
      if (dj > 0) mult *= 2.0;
      double r;
      if (di == 0 && dj == 0)
        r = domain.intra_cell_distance();
      else
        r = std::hypot(static_cast<double>(di) * hy, static_cast<double>(dj) * hx);
      out.emplace_back(r, mult);
    }
  }
  return out;
}

}  // namespace

double beta_integral_raw(const KernelDecomposition& kd, double beta, const GridDomain& domain,
                         double u_max) {
  domain.validate();
  const double da = domain.cell_area();
  double total = 0.0;
  for (const auto& [r, mult] : pair_distances(domain)) {
    const double w = integrate(
        [&](double u) { return std::exp(beta * u) * kd.q(u, r); }, 0.0, u_max, 1e-12);
    total += mult * w;
  }
  return total * da * da;
}

BetaIntegrability beta_integrability(const KernelDecomposition& kd, double beta,
                                     const GridDomain& domain) {
  if (!(beta > 0.0 && beta < 2.0))
    throw ValidationError("beta_integrability: beta must lie in (0, 2); the scale integral "
                          "diverges at beta >= 2 for this kernel");
  BetaIntegrability out;
  out.value = beta_integral_raw(kd, beta, domain, kd.u_max);
  out.value_extended = beta_integral_raw(kd, beta, domain, kd.u_max + 5.0);
  out.rel_change = std::abs(out.value_extended - out.value) / std::max(1e-300, std::abs(out.value));
  return out;
}

namespace {

Eigen::MatrixXd gram_matrix(const KernelDecomposition& kd, const GridDomain& domain, double u) {
  const auto pts = domain.points();
  const int d = static_cast<int>(pts.size());
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    g(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      const double r = std::hypot(pts[static_cast<std::size_t>(i)].first - pts[static_cast<std::size_t>(j)].first,
                                  pts[static_cast<std::size_t>(i)].second - pts[static_cast<std::size_t>(j)].second);
      g(i, j) = g(j, i) = kd.q(u, r);
    }
  }
  return g;
}

std::vector<double> scale_widths(double t_end, double du) {
  std::vector<double> widths;
  const auto n_full = static_cast<std::size_t>(std::floor(t_end / du + 1e-12));
  for (std::size_t i = 0; i < n_full; ++i) widths.push_back(du);
  const double rest = t_end - du * static_cast<double>(n_full);
  if (rest > 1e-12) widths.push_back(rest);
  return widths;
}

}  // namespace

GramReport gram_psd_report(const KernelDecomposition& kd, const GridDomain& domain, double t) {
  domain.validate();
  GramReport report;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  double u_acc = 0.0;
  for (double w : scale_widths(t, kd.du)) {
    const double u = u_acc + 0.5 * w;
    const Eigen::MatrixXd g = gram_matrix(kd, domain, u);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = std::min(report.min_eigenvalue, es.eigenvalues().minCoeff());
    ++report.n_scales_checked;
    u_acc += w;
  }
  return report;
}

FieldSimulator::FieldSimulator(const KernelDecomposition& kd, const GridDomain& domain,
                               double t_end)
    : kd_(kd), domain_(domain), t_end_(t_end) {
  domain.validate();
  if (t_end < 0.0) throw ValidationError("FieldSimulator: t_end must be >= 0");
  if (domain.m > 64) throw ValidationError("FieldSimulator: grid size capped at 64");
  dim_ = domain.n_points();
  widths_ = scale_widths(t_end, kd.du);
  double acc = 0.0;
  for (double w : widths_) {
    u_mids_.push_back(acc + 0.5 * w);
    acc += w;
    t_bounds_.push_back(acc);
  }
  factors_.reserve(widths_.size());
  for (double u : u_mids_) {
    Eigen::MatrixXd g = gram_matrix(kd, domain, u);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) {
      // near rank deficiency at small separations; one diagonal jitter
      g.diagonal().array() += 1e-10;
      llt.compute(g);
      if (llt.info() != Eigen::Success)
        throw NumericalError("FieldSimulator: Gram factorization failed after jitter at u = " +
                             std::to_string(u));
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    std::vector<double> flat(static_cast<std::size_t>(dim_) * static_cast<std::size_t>(dim_), 0.0);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j <= i; ++j)
        flat[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j)] = lower(i, j);
    factors_.push_back(std::move(flat));
  }
}

std::size_t FieldSimulator::steps_to(double t) const {
  if (t == 0.0) return 0;
  for (std::size_t s = 0; s < t_bounds_.size(); ++s)
    if (std::abs(t_bounds_[s] - t) <= 1e-9) return s + 1;
  throw ValidationError("FieldSimulator: t is not a scale-step boundary");
}

FieldSnapshot FieldSimulator::snapshot(std::uint64_t seed, std::uint64_t replica, double t) const {
  const std::size_t k = steps_to(t);
  FieldSnapshot snap;
  snap.t = t;
  snap.m = domain_.m;
  snap.seed = seed;
  snap.replica = replica;
  snap.values.assign(static_cast<std::size_t>(dim_), 0.0);
  run_replica(
      seed, replica,
      [&](std::size_t, double, double, double, const std::vector<double>& state,
          const std::vector<double>& inc) {
        for (int i = 0; i < dim_; ++i)
          snap.values[static_cast<std::size_t>(i)] = state[static_cast<std::size_t>(i)] + inc[static_cast<std::size_t>(i)];
      },
      k);
  return snap;
}

FieldSnapshot sample_field(const KernelDecomposition& kd, const GridDomain& domain, double t,
                           std::uint64_t seed, std::uint64_t replica) {
  const FieldSimulator sim(kd, domain, t);
  return sim.snapshot(seed, replica, t);
}

double field_functional(const FieldSnapshot& snapshot, const WickPolynomial& p,
                        const GridDomain& domain) {
  const double da = domain.cell_area();
  double acc = 0.0;
  for (double v : snapshot.values) acc += p.eval(v, snapshot.t);
  return acc * da;
}

std::vector<std::vector<double>> sample_field_functionals(const KernelDecomposition& kd,
                                                          const GridDomain& domain,
                                                          const WickPolynomial& p,
                                                          const std::vector<double>& t_list,
                                                          std::int64_t n_replicas,
                                                          std::uint64_t seed, int threads) {
  if (t_list.empty()) throw ValidationError("sample_field_functionals: empty t list");
  const double t_end = *std::max_element(t_list.begin(), t_list.end());
  const FieldSimulator sim(kd, domain, t_end);
  std::vector<std::size_t> snap_steps;
  for (double t : t_list) snap_steps.push_back(sim.steps_to(t));

  const double da = domain.cell_area();
  std::vector<std::vector<double>> out(t_list.size(),
                                       std::vector<double>(static_cast<std::size_t>(n_replicas)));
  const int use_threads = threads > 0 ? threads : default_threads();
  parallel_chunks(static_cast<std::size_t>(n_replicas), 64, use_threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t r = begin; r < end; ++r) {
                      // t = 0 snapshots are identically zero fields
                      for (std::size_t k = 0; k < snap_steps.size(); ++k)
                        if (snap_steps[k] == 0)
                          out[k][r] = p.eval(0.0, 0.0) * domain.area();
                      sim.run_replica(seed, r,
                                      [&](std::size_t s, double, double, double,
                                          const std::vector<double>& state,
                                          const std::vector<double>& inc) {
                                        for (std::size_t k = 0; k < snap_steps.size(); ++k) {
                                          if (snap_steps[k] != s + 1) continue;
                                          double acc = 0.0;
                                          for (std::size_t i = 0; i < state.size(); ++i)
                                            acc += p.eval(state[i] + inc[i], t_list[k]);
                                          out[k][r] = acc * da;
                                        }
                                      });
                    }
                  });
  return out;
}

CovarianceCheck covariance_check(const KernelDecomposition& kd, const GridDomain& domain, double t,
                                 std::int64_t n_replicas, std::uint64_t seed, int threads) {
  const FieldSimulator sim(kd, domain, t);
  const int d = domain.n_points();
  const std::size_t dd = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);

  struct Part {
    std::vector<double> sum, sumsq;
  };
  std::vector<Part> parts(n_chunks_for(static_cast<std::size_t>(n_replicas), 64));
  const int use_threads = threads > 0 ? threads : default_threads();
  parallel_chunks(static_cast<std::size_t>(n_replicas), 64, use_threads,
                  [&](std::size_t ci, std::size_t begin, std::size_t end) {
                    Part& part = parts[ci];
                    part.sum.assign(dd, 0.0);
                    part.sumsq.assign(dd, 0.0);
                    for (std::size_t r = begin; r < end; ++r) {
                      const FieldSnapshot snap = sim.snapshot(seed, r, t);
                      for (int i = 0; i < d; ++i)
                        for (int j = 0; j <= i; ++j) {
                          const double prod = snap.values[static_cast<std::size_t>(i)] *
                                              snap.values[static_cast<std::size_t>(j)];
                          const std::size_t at = static_cast<std::size_t>(i) * static_cast<std::size_t>(d) + static_cast<std::size_t>(j);
                          part.sum[at] += prod;
                          part.sumsq[at] += prod * prod;
                        }
                    }
                  });

  std::vector<double> sum(dd, 0.0), sumsq(dd, 0.0);
  for (const auto& part : parts) {
    if (part.sum.empty()) continue;
    for (std::size_t i = 0; i < dd; ++i) {
      sum[i] += part.sum[i];
      sumsq[i] += part.sumsq[i];
    }
  }

  const auto pts = domain.points();
  CovarianceCheck out;
  out.t = t;
  out.m = domain.m;
  out.n = n_replicas;
  const double dn = static_cast<double>(n_replicas);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      const std::size_t at = static_cast<std::size_t>(i) * static_cast<std::size_t>(d) + static_cast<std::size_t>(j);
      const double mean = sum[at] / dn;
      const double var = std::max(sumsq[at] / dn - mean * mean, 0.0);
      const double se = std::sqrt(var / dn);
      const double r = std::hypot(pts[static_cast<std::size_t>(i)].first - pts[static_cast<std::size_t>(j)].first,
                                  pts[static_cast<std::size_t>(i)].second - pts[static_cast<std::size_t>(j)].second);
      const double expected = k_cumulative(kd, t, r);
      const double err = std::abs(mean - expected);
      out.max_abs_error = std::max(out.max_abs_error, err);
      if (se > 0.0) out.max_error_over_se = std::max(out.max_error_over_se, err / se);
    }
  return out;
}

FieldDecomposition sample_field_decomposition(const KernelDecomposition& kd,
                                              const GridDomain& domain, const WickPolynomial& p,
                                              const ConeConfig& cone, double t,
                                              std::int64_t n_replicas, std::uint64_t seed,
                                              int threads) {
  const FieldSimulator sim(kd, domain, t);
  const EnvelopeTable envelope(p, kd.du, t + kd.du);
  const double da = domain.cell_area();
  const int d = domain.n_points();

  FieldDecomposition out;
  out.d_l.resize(static_cast<std::size_t>(n_replicas));
  out.d_h.resize(static_cast<std::size_t>(n_replicas));
  out.realized_qv.resize(static_cast<std::size_t>(n_replicas));
  out.d_end.resize(static_cast<std::size_t>(n_replicas));

  const int use_threads = threads > 0 ? threads : default_threads();
  parallel_chunks(
      static_cast<std::size_t>(n_replicas), 16, use_threads,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<char> high(static_cast<std::size_t>(d));
        for (std::size_t r = begin; r < end; ++r) {
          std::fill(high.begin(), high.end(), 0);
          double d_l = 0.0, d_h = 0.0, qv = 0.0, d_end = 0.0;
          sim.run_replica(seed, r,
                          [&](std::size_t s, double t_before, double, double,
                              const std::vector<double>& state, const std::vector<double>& inc) {
                            const double g = cone.g(t_before);
                            const double f = envelope(t_before);
                            double dl_step = 0.0, dh_step = 0.0;
                            for (int i = 0; i < d; ++i) {
                              const std::size_t ii = static_cast<std::size_t>(i);
                              const double v = state[ii];
                              if (!high[ii]) {
                                if (std::abs(v) >= g) high[ii] = 1;
                              } else if (std::abs(v) <= f) {
                                high[ii] = 0;
                              }
                              const double contrib = p.eval_dx(v, t_before) * inc[ii] * da;
                              if (high[ii])
                                dh_step += contrib;
                              else
                                dl_step += contrib;
                            }
                            d_l += dl_step;
                            d_h += dh_step;
                            qv += dl_step * dl_step;
                            if (s + 1 == sim.n_steps()) {
                              double acc = 0.0;
                              for (int i = 0; i < d; ++i) {
                                const std::size_t ii = static_cast<std::size_t>(i);
                                acc += p.eval(state[ii] + inc[ii], t);
                              }
                              d_end = acc * da;
                            }
                          });
          out.d_l[r] = d_l;
          out.d_h[r] = d_h;
          out.realized_qv[r] = qv;
          out.d_end[r] = d_end;
        }
      });
  return out;
}

void dump_snapshot(const FieldSnapshot& snapshot, const GridDomain& domain,
                   const std::string& path_prefix) {
  const std::string bin_path = path_prefix + ".f64";
  const std::string header_path = path_prefix + ".json";
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw ValidationError("cannot write '" + bin_path + "'");
  // little-endian 64-bit floats, row-major (this code targets little-endian hosts)
  bin.write(reinterpret_cast<const char*>(snapshot.values.data()),
            static_cast<std::streamsize>(snapshot.values.size() * sizeof(double)));
  bin.close();

  nlohmann::json j;
  j["t"] = snapshot.t;
  j["grid"] = snapshot.m;
  j["seed"] = snapshot.seed;
  j["replica"] = snapshot.replica;
  j["dtype"] = "float64-le";
  j["layout"] = "row-major";
  j["count"] = snapshot.values.size();
  j["domain"] = {{"x0", domain.x0}, {"y0", domain.y0}, {"width", domain.width}, {"height", domain.height}};
  j["data_file"] = bin_path;
  std::ofstream hdr(header_path);
  if (!hdr) throw ValidationError("cannot write '" + header_path + "'");
  hdr << j.dump(2) << "\n";
}

}  // namespace wickmart
