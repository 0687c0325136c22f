#include "wickmart/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "wickmart/errors.hpp"
#include "wickmart/roots.hpp"

namespace wickmart {

double zero_envelope(const WickPolynomial& p, double t) {
  if (t < 0.0) throw ValidationError("zero_envelope: t must be >= 0");
  const std::vector<double> roots = real_roots(p.x_poly_at(t));
  double f = 0.0;
  for (double r : roots) f = std::max(f, std::abs(r));
  return f;
}

EnvelopeTable::EnvelopeTable(const WickPolynomial& p, double dt, double t_max) : dt_(dt) {
  if (dt <= 0.0 || t_max < 0.0) throw ValidationError("EnvelopeTable: bad grid");
  const std::size_t n = static_cast<std::size_t>(std::ceil(t_max / dt)) + 1;
  values_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values_[i] = zero_envelope(p, static_cast<double>(i) * dt);
}

double EnvelopeTable::operator()(double t) const {
  if (t <= 0.0) return values_.front();
  const double s = t / dt_;
  const std::size_t i = static_cast<std::size_t>(s);
  if (i + 1 >= values_.size()) return values_.back();
  const double w = s - static_cast<double>(i);
  return values_[i] * (1.0 - w) + values_[i + 1] * w;
}

std::vector<Rational> cone_poly(const WickPolynomial& p, const Rational& a) {
  const int d = p.degree();
  std::vector<Rational> q(static_cast<std::size_t>(d) + 1, Rational(0));
  // binomial expansion of (t + A)^j
  std::vector<std::vector<Rational>> binom(static_cast<std::size_t>(d) + 1);
  for (int j = 0; j <= d; ++j) {
    binom[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(j) + 1, Rational(0));
    binom[static_cast<std::size_t>(j)][0] = 1;
    for (int m = 1; m <= j; ++m)
      binom[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] =
          binom[static_cast<std::size_t>(j) - 1][static_cast<std::size_t>(m) - 1] +
          (m <= j - 1 ? binom[static_cast<std::size_t>(j) - 1][static_cast<std::size_t>(m)] : Rational(0));
  }
  for (int j = 0; j <= d; ++j) {
    for (int k = 0; 2 * k + j <= d; ++k) {
      const Rational& c = p.coef(j, k);
      if (c == 0) continue;
      Rational apow(1);
      for (int m = j; m >= 0; --m) {
        // contributes c * C(j,m) * A^{j-m} to t^{m+k}; apow tracks A^{j-m}
        q[static_cast<std::size_t>(m + k)] += c * binom[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] * apow;
        apow *= a;
      }
    }
  }
  while (q.size() > 1 && q.back() == 0) q.pop_back();
  return q;
}

double cone_value(const WickPolynomial& p, const ConeConfig& cfg, double t) {
  if (t < 0.0) throw ValidationError("cone_value: t must be >= 0");
  return p.eval(cfg.g(t), t);
}

namespace {

std::vector<double> calibration_grid(double t_max) {
  std::vector<double> grid;
  grid.reserve(10100);
  const int n = 10000;
  for (int i = 0; i <= n; ++i) grid.push_back(t_max * static_cast<double>(i) / n);
  for (double t = 0.5 * t_max / n; t > 1e-12; t *= 0.5) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  return grid;
}

std::vector<double> to_doubles(const std::vector<Rational>& q) {
  std::vector<double> out;
  out.reserve(q.size());
  for (const auto& c : q) out.push_back(to_double(c));
  return out;
}

bool cone_checks_pass(const WickPolynomial& p, int a, const std::vector<double>& grid,
                      const std::vector<double>& envelope) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (envelope[i] > grid[i] + static_cast<double>(a)) return false;
  const std::vector<double> q = to_doubles(cone_poly(p, Rational(a)));
  const std::vector<double> dq = poly_derivative(q);
  for (double t : grid) {
    if (poly_eval(q, t) <= 0.0) return false;
    if (poly_eval(dq, t) <= 0.0) return false;
  }
  return true;
}

}  // namespace

ConeConfig calibrate_cone(const WickPolynomial& p, double t_max, const std::vector<double>& eps_list) {
  if (t_max < 10.0) throw ValidationError("calibrate_cone: t_max must be >= 10");
  for (double e : eps_list)
    if (!(e > 0.0 && e < 1.0)) throw ValidationError("calibrate_cone: eps must lie in (0,1)");

  const std::vector<double> grid = calibration_grid(t_max);
  std::vector<double> envelope(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) envelope[i] = zero_envelope(p, grid[i]);

  constexpr int kMaxA = 10000;
  int a = 0;
  for (a = 1; a <= kMaxA; ++a)
    if (cone_checks_pass(p, a, grid, envelope)) break;
  if (a > kMaxA)
    throw NumericalError("calibrate_cone: no A <= 10^4 satisfies the cone checks");
  // +1 safety margin; re-verify in case the checks are not monotone in A
  for (a = a + 1; a <= kMaxA; ++a)
    if (cone_checks_pass(p, a, grid, envelope)) break;
  if (a > kMaxA)
    throw NumericalError("calibrate_cone: margin step found no valid A <= 10^4");

  ConeConfig cfg;
  cfg.A = static_cast<double>(a);
  cfg.t_check_max = t_max;
  for (double e : eps_list) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, envelope[i] - e * grid[i]);
    cfg.eps_table.emplace_back(e, std::ceil(worst));
  }
  return cfg;
}

std::string ConeConfig::to_json() const {
  nlohmann::json j;
  j["A"] = A;
  j["t_check_max"] = t_check_max;
  j["eps_table"] = nlohmann::json::array();
  for (const auto& [e, ap] : eps_table) j["eps_table"].push_back({{"eps", e}, {"A_prime", ap}});
  return j.dump(2);
}

ConeConfig ConeConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ConeConfig cfg;
  cfg.A = j.at("A").get<double>();
  cfg.t_check_max = j.at("t_check_max").get<double>();
  for (const auto& row : j.at("eps_table"))
    cfg.eps_table.emplace_back(row.at("eps").get<double>(), row.at("A_prime").get<double>());
  return cfg;
}

ConeConfig ConeConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open cone config '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

void ConeConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write cone config '" + path + "'");
  out << to_json() << "\n";
}

}  // namespace wickmart
