// wickmart: stochastic verification toolkit for Wick-ordered polynomial
// functionals of scale-decomposed Gaussian fields.
//
// Subcommands map onto the library modules: wick (polynomial calculus),
// envelope / cone-calibrate (zero-set geometry), paths (single-site stopping
// time simulation), coupling (two-motion experiments and closed forms), gff
// (field sampling and kernel diagnostics), moments (estimators), verify-all
// (the acceptance suite).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "wickmart/acceptance.hpp"
#include "wickmart/coupling.hpp"
#include "wickmart/envelope.hpp"
#include "wickmart/errors.hpp"
#include "wickmart/estimators.hpp"
#include "wickmart/gff.hpp"
#include "wickmart/parallel.hpp"
#include "wickmart/paths.hpp"
#include "wickmart/stats.hpp"
#include "wickmart/wickpoly.hpp"

using nlohmann::json;
using namespace wickmart;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw ValidationError("cannot write '" + out_path + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

// "-0.2:0.05:0.2" (start:step:stop) or a plain comma list
std::vector<double> parse_alphas(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_list(text);
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
    throw ValidationError("alpha range must be start:step:stop");
  const double start = std::stod(a), step = std::stod(b), stop = std::stod(c);
  if (step <= 0.0) throw ValidationError("alpha step must be positive");
  std::vector<double> out;
  for (double v = start; v <= stop + 1e-12; v += step) out.push_back(std::abs(v) < 1e-15 ? 0.0 : v);
  return out;
}

WickPolynomial wick_from_flag(const std::string& poly) {
  if (poly.empty()) throw ValidationError("--poly is required");
  return wick_order(Polynomial::from_string(poly));
}

ConeConfig cone_from_flags(const std::string& cone_file, const WickPolynomial& p, double tmax) {
  if (!cone_file.empty()) return ConeConfig::load(cone_file);
  return calibrate_cone(p, tmax, {});
}

// Config file support: JSON object whose keys mirror long flag names. Values
// become option defaults, so explicit flags always win.
void apply_config_defaults(CLI::App* app, const json& cfg) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    for (CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty()) continue;
      if (opt->get_lnames()[0] != it.key()) continue;
      std::string value;
      if (it.value().is_string())
        value = it.value().get<std::string>();
      else
        value = it.value().dump();
      opt->default_val(value);
    }
  }
  for (CLI::App* sub : app->get_subcommands({})) apply_config_defaults(sub, cfg);
}


// Tabular output rendered as CSV (default) or a JSON array of row objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footnotes;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string render(const std::string& format) const {
    if (format == "json") {
      json arr = json::array();
      for (const auto& row : rows) {
        json obj;
        for (std::size_t c = 0; c < columns.size() && c < row.size(); ++c) obj[columns[c]] = row[c];
        arr.push_back(obj);
      }
      json out;
      out["rows"] = arr;
      if (!footnotes.empty()) out["notes"] = footnotes;
      return out.dump(2);
    }
    if (format != "csv") throw ValidationError("unknown --format '" + format + "' (csv or json)");
    std::ostringstream os;
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << "\n";
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
      os << "\n";
    }
    for (const auto& note : footnotes) os << "# " << note << "\n";
    return os.str();
  }
};

void enable_fallthrough(CLI::App* app) {
  for (CLI::App* sub : app->get_subcommands({})) {
    sub->fallthrough();
    enable_fallthrough(sub);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wickmart: Wick polynomial martingale simulation toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool seed_given_default = false;
  if (const char* env = std::getenv("WICKMART_SEED")) {
    try {
      seed = static_cast<std::uint64_t>(std::stoull(env));
      seed_given_default = true;
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring unparsable WICKMART_SEED\n";
    }
  }
  (void)seed_given_default;

  int threads = 0;
  std::string config_path;
  std::string format = "csv";
  app.add_option("--config", config_path, "JSON config file mirroring long flag names");
  app.add_option("--seed", seed, "RNG seed (fallback: WICKMART_SEED)")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = hardware count)")->capture_default_str();
  app.add_option("--format", format, "tabular output format: csv | json")->capture_default_str();

  std::string poly, out_path, cone_file;
  double flag_x = 0.0, flag_t = 1.0, dt = 1e-3, tmax = 40.0;
  std::int64_t n_paths = 10000;

  // ---- wick ----
  CLI::App* wick = app.add_subcommand("wick", "Wick-order polynomials, evaluate them");
  CLI::App* wick_expand = wick->add_subcommand("expand", "print the bivariate expansion as JSON");
  wick_expand->add_option("--poly", poly, "degree-ascending coefficients, e.g. 0,0,0,0,1")->required();
  wick_expand->add_option("--out", out_path, "output file (default stdout)");

  CLI::App* wick_eval = wick->add_subcommand("eval", "evaluate P(x; t)");
  wick_eval->add_option("--poly", poly)->required();
  wick_eval->add_option("--x", flag_x)->required();
  wick_eval->add_option("--t", flag_t)->required();
  CLI::App* wick_eval_dx = wick->add_subcommand("eval-dx", "evaluate dP/dx (x; t)");
  wick_eval_dx->add_option("--poly", poly)->required();
  wick_eval_dx->add_option("--x", flag_x)->required();
  wick_eval_dx->add_option("--t", flag_t)->required();

  // ---- envelope ----
  CLI::App* env_cmd = app.add_subcommand("envelope", "outermost zero magnitude f(t)");
  env_cmd->add_option("--poly", poly)->required();
  env_cmd->add_option("--t", flag_t)->required();
  env_cmd->add_option("--out", out_path);

  // ---- cone-calibrate ----
  std::string eps_flag;
  CLI::App* cone_cmd = app.add_subcommand("cone-calibrate", "calibrate the cone offset A and A'(eps)");
  cone_cmd->add_option("--poly", poly)->required();
  cone_cmd->add_option("--tmax", tmax, "calibration horizon")->capture_default_str();
  cone_cmd->add_option("--eps", eps_flag, "comma list of eps in (0,1)");
  cone_cmd->add_option("--out", out_path, "also usable later via --cone");

  // ---- paths ----
  CLI::App* paths_cmd = app.add_subcommand("paths", "single-site Brownian experiments");
  CLI::App* paths_sim = paths_cmd->add_subcommand("simulate", "per-path functionals CSV");
  int mmax = 4;
  std::string m_flag = "1,2,4";
  for (CLI::App* sub : {paths_sim}) {
    sub->add_option("--poly", poly)->required();
    sub->add_option("--cone", cone_file, "cone config JSON (default: calibrate)");
    sub->add_option("--dt", dt)->capture_default_str();
    sub->add_option("--tmax", tmax)->capture_default_str();
    sub->add_option("--paths", n_paths)->capture_default_str();
    sub->add_option("--out", out_path);
  }
  CLI::App* paths_hit = paths_cmd->add_subcommand("hitting-stats", "hit counts per (m-1, m] vs the bound");
  paths_hit->add_option("--poly", poly)->required();
  paths_hit->add_option("--cone", cone_file);
  paths_hit->add_option("--dt", dt)->capture_default_str();
  paths_hit->add_option("--tmax", tmax, "horizon (>= mmax)")->capture_default_str();
  paths_hit->add_option("--paths", n_paths)->capture_default_str();
  paths_hit->add_option("--mmax", mmax)->capture_default_str();
  paths_hit->add_option("--out", out_path);
  CLI::App* paths_sup = paths_cmd->add_subcommand("sup-tail", "P[sup |B| >= m] estimates");
  paths_sup->add_option("--m", m_flag, "comma list of m values")->capture_default_str();
  paths_sup->add_option("--dt", dt)->capture_default_str();
  paths_sup->add_option("--paths", n_paths)->capture_default_str();
  paths_sup->add_option("--out", out_path);

  // ---- coupling ----
  double gap = 0.1, flag_z = -0.5, flag_l = 0.0, t_offset = 1.0, z1 = -2.8, z2 = -2.6;
  std::string zgrid_flag, gaps_flag;
  CLI::App* coup = app.add_subcommand("coupling", "two-motion couplings and diffusion identities");
  CLI::App* coup_tau = coup->add_subcommand("tau", "P[tau > T_cap] for one gap or a gap grid");
  coup_tau->add_option("--gap", gap)->capture_default_str();
  coup_tau->add_option("--gaps", gaps_flag, "comma list; overrides --gap");
  coup_tau->add_option("--poly", poly)->required();
  coup_tau->add_option("--cone", cone_file);
  coup_tau->add_option("--t", t_offset, "time offset of the shifted barriers")->capture_default_str();
  coup_tau->add_option("--dt", dt)->capture_default_str();
  coup_tau->add_option("--paths", n_paths)->capture_default_str();
  coup_tau->add_option("--out", out_path);
  CLI::App* coup_exit = coup->add_subcommand("exit", "drifted line-hit / two-boundary closed forms vs MC");
  coup_exit->add_option("--z", flag_z)->required();
  coup_exit->add_option("--L", flag_l, "second boundary (< 0) enables the two-boundary form");
  coup_exit->add_option("--dt", dt)->capture_default_str();
  coup_exit->add_option("--paths", n_paths)->capture_default_str();
  coup_exit->add_option("--horizon", tmax)->capture_default_str();
  coup_exit->add_option("--out", out_path);
  CLI::App* coup_lip = coup->add_subcommand("lipschitz", "finite-difference slopes of the high-value sum");
  coup_lip->add_option("--poly", poly)->required();
  coup_lip->add_option("--cone", cone_file);
  coup_lip->add_option("--t", t_offset)->capture_default_str();
  coup_lip->add_option("--zgrid", zgrid_flag, "comma list of start points")->required();
  coup_lip->add_option("--dt", dt)->capture_default_str();
  coup_lip->add_option("--tmax", tmax, "hit-sum horizon")->capture_default_str();
  coup_lip->add_option("--paths", n_paths)->capture_default_str();
  coup_lip->add_option("--out", out_path);
  CLI::App* coup_par = coup->add_subcommand("parallel", "translation coupling exit statistics");
  coup_par->add_option("--poly", poly)->required();
  coup_par->add_option("--cone", cone_file);
  coup_par->add_option("--z1", z1)->capture_default_str();
  coup_par->add_option("--z2", z2)->capture_default_str();
  coup_par->add_option("--t", t_offset)->capture_default_str();
  coup_par->add_option("--dt", dt)->capture_default_str();
  coup_par->add_option("--tmax", tmax)->capture_default_str();
  coup_par->add_option("--paths", n_paths)->capture_default_str();
  coup_par->add_option("--out", out_path);

  // ---- gff ----
  int grid = 8;
  std::int64_t replicas = 1000;
  std::string t_list_flag = "1";
  std::string dump_prefix;
  CLI::App* gff_cmd = app.add_subcommand("gff", "field sampling and kernel diagnostics");
  CLI::App* gff_kernel = gff_cmd->add_subcommand("kernel-check", "log-window constant, PSD, beta integrals");
  gff_kernel->add_option("--tmax", tmax, "largest t in the (t, r) grid")->capture_default_str();
  gff_kernel->add_option("--grid", grid)->capture_default_str();
  gff_kernel->add_option("--report,--out", out_path);
  CLI::App* gff_sim = gff_cmd->add_subcommand("simulate", "CSV of D_t samples over replicas");
  gff_sim->add_option("--poly", poly)->required();
  gff_sim->add_option("--grid", grid)->capture_default_str();
  gff_sim->add_option("--t", t_list_flag, "comma list of snapshot times")->capture_default_str();
  gff_sim->add_option("--replicas", replicas)->capture_default_str();
  gff_sim->add_option("--dump-field", dump_prefix, "also dump replica 0 snapshots as binary+json");
  gff_sim->add_option("--out", out_path);

  // ---- moments ----
  std::string input_path, alphas_flag = "-0.2:0.05:0.2";
  double alpha = 0.05, lambda = 1.0;
  std::int64_t n_samples = 1000000;
  CLI::App* mom = app.add_subcommand("moments", "estimator layer");
  CLI::App* mom_mgf = mom->add_subcommand("mgf", "log-MGF curve of a sample file");
  mom_mgf->add_option("--input", input_path, "one sample per line")->required();
  mom_mgf->add_option("--alphas", alphas_flag, "start:step:stop or comma list")->capture_default_str();
  mom_mgf->add_option("--out", out_path);
  CLI::App* mom_neg = mom->add_subcommand("negexp", "E[exp(-alpha D_t)] across t");
  mom_neg->add_option("--poly", poly)->required();
  mom_neg->add_option("--alpha", alpha)->capture_default_str();
  mom_neg->add_option("--grid", grid)->capture_default_str();
  mom_neg->add_option("--t", t_list_flag)->capture_default_str();
  mom_neg->add_option("--replicas", replicas)->capture_default_str();
  mom_neg->add_option("--out", out_path);
  CLI::App* mom_exp = mom->add_subcommand("expmart", "exponential martingale mean check");
  mom_exp->add_option("--lambda", lambda)->capture_default_str();
  mom_exp->add_option("--t", flag_t)->capture_default_str();
  mom_exp->add_option("--n", n_samples)->capture_default_str();
  mom_exp->add_option("--out", out_path);

  // ---- verify-all ----
  std::string profile_flag = "quick";
  CLI::App* verify = app.add_subcommand("verify-all", "run the full verification suite");
  verify->add_option("--profile", profile_flag, "quick | full")->capture_default_str();
  verify->add_option("--out", out_path, "also write a JSON report");

  enable_fallthrough(&app);

  // two-phase parse so --config can install defaults first
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        std::cerr << "error: cannot open config '" << argv[i + 1] << "'\n";
        return 1;
      }
      try {
        json cfg = json::parse(in);
        apply_config_defaults(&app, cfg);
      } catch (const json::exception& e) {
        std::cerr << "error: bad config: " << e.what() << "\n";
        return 1;
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // prints usage; exit code 0 for --help, nonzero otherwise
  }

  try {
    if (threads > 0) set_default_threads(threads);

    if (wick_expand->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      json j;
      j["terms"] = json::array();
      for (const auto& term : p.terms())
        j["terms"].push_back({{"xpow", term.xpow}, {"tpow", term.tpow}, {"coef", to_double(term.coef)}});
      write_output(j.dump(2), out_path);
    } else if (wick_eval->parsed()) {
      std::cout << fmt_double(wick_from_flag(poly).eval(flag_x, flag_t)) << "\n";
    } else if (wick_eval_dx->parsed()) {
      std::cout << fmt_double(wick_from_flag(poly).eval_dx(flag_x, flag_t)) << "\n";
    } else if (env_cmd->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      json j;
      j["t"] = flag_t;
      j["f"] = zero_envelope(p, flag_t);
      write_output(j.dump(2), out_path);
    } else if (cone_cmd->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      std::vector<double> eps;
      if (!eps_flag.empty()) eps = parse_list(eps_flag);
      const ConeConfig cfg = calibrate_cone(p, tmax, eps);
      write_output(cfg.to_json(), out_path);
    } else if (paths_sim->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      SimConfig cfg{dt, tmax, n_paths, seed, threads};
      const ConeConfig cone = cone_from_flags(cone_file, p, 50.0);
      const auto fns = simulate_functionals(cfg, p, cone);
      Table tbl;
      tbl.columns = {"path", "d_t", "d_l", "d_h", "q", "n_hits"};
      for (std::size_t i = 0; i < fns.size(); ++i)
        tbl.add_row({std::to_string(i), fmt_double(fns[i].d_t), fmt_double(fns[i].d_l),
                     fmt_double(fns[i].d_h), fmt_double(fns[i].q),
                     std::to_string(fns[i].n_hits)});
      write_output(tbl.render(format), out_path);
    } else if (paths_hit->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      SimConfig cfg{dt, tmax, n_paths, seed, threads};
      const ConeConfig cone = cone_from_flags(cone_file, p, 50.0);
      const HittingStats st = hitting_counts(cfg, p, cone, mmax);
      Table tbl;
      tbl.columns = {"m", "mean", "stderr", "paper_bound"};
      for (std::size_t i = 0; i < st.m.size(); ++i)
        tbl.add_row({std::to_string(st.m[i]), fmt_double(st.mean_count[i].mean),
                     fmt_double(st.mean_count[i].stderr_), fmt_double(st.paper_bound[i])});
      tbl.footnotes.push_back("halving k=1: " + fmt_double(st.halving_k1.value) + " +- " +
                              fmt_double(st.halving_k1.stderr_) +
                              " denom=" + std::to_string(st.halving_k1.denom));
      tbl.footnotes.push_back("halving k=2: " + fmt_double(st.halving_k2.value) + " +- " +
                              fmt_double(st.halving_k2.stderr_) +
                              " denom=" + std::to_string(st.halving_k2.denom));
      write_output(tbl.render(format), out_path);
    } else if (paths_sup->parsed()) {
      Table tbl;
      tbl.columns = {"m", "estimate", "stderr", "paper_bound"};
      for (double m : parse_list(m_flag)) {
        SimConfig cfg{dt, std::max(m, 1.0), n_paths, seed, threads};
        const McEstimate est = sup_tail(cfg, m);
        tbl.add_row({fmt_double(m), fmt_double(est.mean), fmt_double(est.stderr_),
                     fmt_double(sup_tail_bound(m))});
      }
      write_output(tbl.render(format), out_path);
    } else if (coup_tau->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      const ConeConfig cone = cone_from_flags(cone_file, p, 50.0);
      SimConfig cfg{dt, 1.0, n_paths, seed, threads};
      std::vector<double> gaps = gaps_flag.empty() ? std::vector<double>{gap} : parse_list(gaps_flag);
      const TauScaling ts = tau_scaling(gaps, cfg, p, cone, t_offset);
      json j;
      j["t"] = t_offset;
      j["gaps"] = json::array();
      for (std::size_t i = 0; i < ts.gaps.size(); ++i)
        j["gaps"].push_back({{"gap", ts.gaps[i]},
                             {"p_tau_gt_cap", ts.p_exceed[i].mean},
                             {"stderr", ts.p_exceed[i].stderr_}});
      if (ts.gaps.size() >= 2) {
        j["fit"] = {{"slope", ts.fit.slope},
                    {"intercept", ts.fit.intercept},
                    {"r2", ts.fit.r2},
                    {"se_intercept", ts.fit.se_intercept}};
      }
      write_output(j.dump(2), out_path);
    } else if (coup_exit->parsed()) {
      SimConfig cfg{dt, tmax, n_paths, seed, threads};
      json j;
      j["z"] = flag_z;
      if (coup_exit->count("--L") > 0) {
        j["L"] = flag_l;
        j["closed_form"] = two_boundary_prob(flag_z, flag_l);
        const McEstimate mc = mc_two_boundary(flag_z, flag_l, cfg);
        j["mc"] = mc.mean;
        j["stderr"] = mc.stderr_;
      } else {
        j["closed_form"] = line_hit_prob(flag_z);
        const McEstimate mc = mc_line_hit(flag_z, cfg);
        j["mc"] = mc.mean;
        j["stderr"] = mc.stderr_;
      }
      write_output(j.dump(2), out_path);
    } else if (coup_lip->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      const ConeConfig cone = cone_from_flags(cone_file, p, 50.0);
      SimConfig cfg{dt, tmax, n_paths, seed, threads};
      const LipschitzProbe probe = lipschitz_probe(t_offset, parse_list(zgrid_flag), cfg, p, cone);
      Table tbl;
      tbl.columns = {"z", "F", "stderr", "slope_to_next", "slope_stderr"};
      for (std::size_t i = 0; i < probe.z.size(); ++i) {
        std::vector<std::string> row = {fmt_double(probe.z[i]),
                                        fmt_double(probe.value[i].mean),
                                        fmt_double(probe.value[i].stderr_)};
        if (i + 1 < probe.z.size()) {
          row.push_back(fmt_double(probe.slope[i]));
          row.push_back(fmt_double(probe.slope_se[i]));
        } else {
          row.push_back("");
          row.push_back("");
        }
        tbl.add_row(std::move(row));
      }
      tbl.footnotes.push_back("max_slope=" + fmt_double(probe.max_slope) +
                              " c_fit=" + fmt_double(probe.c_fit));
      write_output(tbl.render(format), out_path);
    } else if (coup_par->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      const ConeConfig cone = cone_from_flags(cone_file, p, 50.0);
      SimConfig cfg{dt, tmax, n_paths, seed, threads};
      const ParallelExitStats st = parallel_exit_stats(z1, z2, cfg, p, cone, t_offset);
      json j;
      j["n"] = st.n;
      j["n_s1_first"] = st.n_s1_first;
      j["n_lower_given_first"] = st.n_lower_given_first;
      j["n_next_event"] = st.n_next_event;
      j["max_gap_error"] = st.gap_error.mean;
      write_output(j.dump(2), out_path);
    } else if (gff_kernel->parsed()) {
      KernelDecomposition kd;
      const GridDomain dom = GridDomain::unit_square(grid);
      double c_meas = 0.0;
      for (double t = 0.25; t <= tmax; t *= 1.5) {
        for (double r = 1e-4; r <= dom.diameter(); r *= 2.0) {
          const double k = k_cumulative(kd, t, r);
          const double target = std::min(t, std::max(0.0, std::log(1.0 / r)));
          c_meas = std::max(c_meas, std::abs(k - target));
        }
      }
      const GramReport rep = gram_psd_report(kd, dom, std::min(tmax, 2.0));
      json j;
      j["grid"] = grid;
      j["t_max"] = tmax;
      j["c_meas"] = c_meas;
      j["psd_min_eigenvalue"] = rep.min_eigenvalue;
      j["n_scales_checked"] = rep.n_scales_checked;
      j["beta_integrals"] = json::array();
      for (double beta : {0.5, 1.0, 1.99}) {
        const BetaIntegrability bi = beta_integrability(kd, beta, dom);
        j["beta_integrals"].push_back(
            {{"beta", beta}, {"value", bi.value}, {"rel_change", bi.rel_change}});
      }
      write_output(j.dump(2), out_path);
    } else if (gff_sim->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      KernelDecomposition kd;
      const GridDomain dom = GridDomain::unit_square(grid);
      const std::vector<double> t_list = parse_list(t_list_flag);
      const auto samples = sample_field_functionals(kd, dom, p, t_list, replicas, seed, threads);
      if (!dump_prefix.empty()) {
        for (double t : t_list) {
          const FieldSnapshot snap = sample_field(kd, dom, t, seed, 0);
          dump_snapshot(snap, dom, dump_prefix + "_t" + fmt_double(t));
        }
      }
      Table tbl;
      tbl.columns = {"replica"};
      for (double t : t_list) tbl.columns.push_back("D_t" + fmt_double(t));
      for (std::int64_t r = 0; r < replicas; ++r) {
        std::vector<std::string> row = {std::to_string(r)};
        for (std::size_t k = 0; k < t_list.size(); ++k)
          row.push_back(fmt_double(samples[k][static_cast<std::size_t>(r)]));
        tbl.add_row(std::move(row));
      }
      write_output(tbl.render(format), out_path);
    } else if (mom_mgf->parsed()) {
      std::ifstream in(input_path);
      if (!in) throw ValidationError("cannot open '" + input_path + "'");
      std::vector<double> samples;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
          samples.push_back(std::stod(line));
        } catch (const std::exception&) {
          continue;  // header or comment line
        }
      }
      const MgfCurve curve = mgf_curve(samples, parse_alphas(alphas_flag));
      json j;
      j["points"] = json::array();
      for (const auto& pt : curve.points)
        j["points"].push_back({{"alpha", pt.alpha},
                               {"log_mgf", pt.log_mgf},
                               {"stderr", pt.stderr_},
                               {"dropped", pt.dropped}});
      j["c_hat"] = curve.c_hat;
      j["residual_max"] = curve.residual_max;
      j["linear_term"] = curve.linear_term;
      j["quad_term"] = curve.quad_term;
      j["c2"] = curve.c2;
      j["c4"] = curve.c4;
      j["quartic_ratio"] = curve.quartic_ratio;
      j["quadratic_rejected"] = curve.quadratic_rejected;
      write_output(j.dump(2), out_path);
    } else if (mom_neg->parsed()) {
      const WickPolynomial p = wick_from_flag(poly);
      KernelDecomposition kd;
      const GridDomain dom = GridDomain::unit_square(grid);
      const auto rows = neg_exp_moment(alpha, parse_list(t_list_flag), kd, dom, p, replicas, seed, threads);
      Table tbl;
      tbl.columns = {"t", "alpha", "mean", "stderr", "ci_low", "ci_high", "ess", "reliable"};
      for (const auto& row : rows)
        tbl.add_row({fmt_double(row.t), fmt_double(row.alpha),
                     fmt_double(row.estimate.mean), fmt_double(row.estimate.stderr_),
                     fmt_double(row.ci_low), fmt_double(row.ci_high),
                     fmt_double(row.ess), row.reliable ? "yes" : "UNRELIABLE"});
      write_output(tbl.render(format), out_path);
    } else if (mom_exp->parsed()) {
      const McEstimate est = exp_martingale_check(lambda, flag_t, n_samples, seed, threads);
      json j;
      j["lambda"] = lambda;
      j["t"] = flag_t;
      j["mean"] = est.mean;
      j["stderr"] = est.stderr_;
      j["n"] = est.n;
      write_output(j.dump(2), out_path);
    } else if (verify->parsed()) {
      const Profile profile = profile_from_string(profile_flag);
      const auto results = run_acceptance(profile, seed, std::cout);
      if (!out_path.empty()) {
        json j = json::array();
        for (const auto& r : results)
          j.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
        std::ofstream out(out_path);
        out << j.dump(2) << "\n";
      }
      return all_passed(results) ? 0 : 2;
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
