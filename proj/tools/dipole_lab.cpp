#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dipole/acceptance.hpp"
#include "dipole/convolution.hpp"
#include "dipole/diagnostics.hpp"
#include "dipole/experiment.hpp"
#include "dipole/fundamental.hpp"
#include "dipole/heat_reference.hpp"
#include "dipole/stationary.hpp"

namespace fs = std::filesystem;
using namespace dipole;

namespace {

constexpr int kChecksFailed = 1;
constexpr int kUsageError = 2;

struct Globals {
  std::string config;
  std::string out;
  int threads = 0;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + tok + "'");
    }
  }
  return v;
}

std::set<int> parse_ids(const std::string& text) {
  std::set<int> ids;
  for (double v : parse_list(text)) {
    if (v != std::floor(v) || v < 1 || v > 11) throw std::invalid_argument("criterion ids are integers 1..11");
    ids.insert(static_cast<int>(v));
  }
  return ids;
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) std::cout << j.dump(2) << "\n";
  else write_json(out, j);
}

void print_check(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS  " : "FAIL  ") << name << ": " << detail << "\n";
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// ---- stationary

struct StationaryArgs {
  std::string kernel = "biweight";
  double d = 1.0;
  double h = 1.0 / 64.0;
  double x_max = 40.0;
  double tol = 1e-10;
};

int cmd_stationary(const StationaryArgs& a, const Globals& g) {
  KernelSpec spec{a.kernel, a.d, ""};
  if (a.kernel.find('.') != std::string::npos) spec = KernelSpec{"tabulated", a.d, a.kernel};
  const Kernel k = spec.build();
  const PhiSolution phi = solve_phi(k, a.x_max, a.h, a.tol);
  const fs::path out = g.out.empty() ? fs::path("phi.csv") : fs::path(g.out);
  write_phi_csv(out, phi);

  double worst = 0.0;
  for (std::size_t i = 0; i < phi.field.size(); ++i) {
    const double x = phi.field.x(i), v = phi.field.values[i];
    if (x >= 0.0) worst = std::max({worst, x - v, v - x - k.support()});
  }
  const double res = residual_L(k, phi);
  const bool ok = worst <= 1e-8 && res <= 1e-7;
  print_check("bounds x <= phi <= x + d", worst <= 1e-8, "worst violation " + num(worst));
  print_check("residual", res <= 1e-7, num(res));
  std::cout << "offset at edge " << format_number(phi.offset_at_edge) << ", n = " << phi.n_used << ", wrote " << out.string() << "\n";
  return ok ? 0 : kChecksFailed;
}

// ---- evolve

int cmd_evolve(const Globals& g) {
  if (g.config.empty()) throw std::invalid_argument("evolve needs --config");
  ExperimentConfig cfg = ExperimentConfig::from_json(read_json(g.config));
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (cfg.out_dir.empty()) throw std::invalid_argument("evolve needs an output directory (--out or output.dir)");
  const ExperimentResult res = run_experiment(cfg);
  double drift = 0.0;
  for (const auto& r : res.momenta) drift = std::max(drift, std::abs(r.M_phi / res.momenta.front().M_phi - 1.0));
  print_check("M_phi conservation", drift <= 1e-5, "relative drift " + num(drift));
  std::cout << "M1* = " << format_number(res.m1star) << (res.phi_from_cache ? " (phi from cache)" : "") << "\n"
            << "manifest " << res.manifest_hash << " in " << cfg.out_dir << "\n";
  return drift <= 1e-5 ? 0 : kChecksFailed;
}

// ---- omega

struct OmegaArgs {
  double t = 5.0;
  std::string method = "both";
  double h = 1.0 / 64.0;
  std::string kernel = "biweight";
  double d = 1.0;
};

int cmd_omega(const OmegaArgs& a, const Globals& g) {
  const Kernel k = KernelSpec{a.kernel, a.d, ""}.build();
  const double q = kernel_q(k), d = k.support();
  const bool series = a.method != "fourier", fourier = a.method != "series";
  double half = std::ceil((12.0 * std::sqrt(2.0 * q * a.t) + 2.0 * d) / d) * d;
  if (series) half = std::max(half, static_cast<double>(series_terms_needed(k, a.t, 1e-14)) * d);
  const Grid grid = Grid::node_aligned(-half, half, a.h);

  std::vector<std::string> headers{"x"};
  std::vector<std::vector<double>> cols(1);
  for (std::size_t i = 0; i < grid.size(); ++i) cols[0].push_back(grid.x(i));
  std::optional<OmegaProfile> s, f;
  if (series) {
    s = omega_series(k, grid, a.t);
    headers.push_back("omega_series");
    cols.push_back(s->field.values);
  }
  if (fourier) {
    f = omega_fourier(k, grid, a.t);
    headers.push_back("omega_fourier");
    cols.push_back(f->field.values);
  }
  headers.push_back("gamma_q");
  cols.emplace_back();
  for (double x : cols[0]) cols.back().push_back(gamma_q(x, a.t, q));
  const fs::path out = g.out.empty() ? fs::path("omega.csv") : fs::path(g.out);
  write_columns_csv(out, headers, cols);

  bool ok = true;
  const Field& w = s ? s->field : f->field;
  const double mass_err = std::abs(whole_line_moment(w, 0) - (1.0 - std::exp(-a.t)));
  const double m2_rel = std::abs(whole_line_moment(w, 2) / (2.0 * q * a.t) - 1.0);
  print_check("mass 1 - e^{-t}", mass_err <= 1e-8, num(mass_err));
  print_check("second moment 2qt", m2_rel <= 1e-6, "relative " + num(m2_rel));
  ok = mass_err <= 1e-8 && m2_rel <= 1e-6;
  if (s && f) {
    const double diff = sup_distance(s->field, f->field);
    // series and Fourier agree to the O(h^4) accuracy of the discrete taps
    const double bound = std::max(1e-8, 1e4 * std::pow(a.h / d, 4));
    print_check("series vs fourier", diff <= bound, num(diff) + " (bound " + num(bound) + ")");
    ok = ok && diff <= bound;
  }
  std::cout << "wrote " << out.string() << "\n";
  return ok ? 0 : kChecksFailed;
}

// ---- verify

struct VerifyArgs {
  std::string traj;
  std::string phi;
  std::string report;
};

int cmd_verify(const VerifyArgs& a, const Globals& g) {
  ExperimentConfig cfg;
  ExperimentResult res;
  res.trajectory = load_trajectory(a.traj, &cfg);
  const Kernel k = cfg.kernel.build();
  res.phi = a.phi.empty() ? cached_phi(k, cfg.kernel, cfg.h, cfg.resolved_x_max(), cfg.phi_tol, cfg.cache_dir) : phi_from_csv(a.phi);
  res.m1star = mstar(res.trajectory.snapshots.front().u, res.phi);
  res.momenta = momenta_series(res.trajectory, res.phi);
  res.report = asymptotic_report(k, res.trajectory, res.phi, res.m1star, cfg.report);

  const auto checks = evaluate_run(cfg, res);
  bool ok = true;
  json flags = json::array();
  for (const auto& c : checks) {
    std::cout << format_result_line(c) << "\n";
    ok = ok && c.passed;
    flags.push_back(json{{"criterion", c.id}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"data", c.data}});
  }
  json report{{"m1star", res.m1star}, {"asymptotics", report_to_json(*res.report)}, {"momenta", momenta_to_json(res.momenta)}, {"checks", flags},
              {"passed", ok}};
  fs::path out = !a.report.empty() ? fs::path(a.report) : !g.out.empty() ? fs::path(g.out) : fs::path("report.json");
  write_json(out, report);

  // companion series for plotting, one row per snapshot with t > 0
  std::map<double, std::size_t> at;
  for (std::size_t i = 0; i < res.report->times.size(); ++i) at[res.report->times[i]] = i;
  std::vector<std::vector<double>> cols(8);
  for (const auto& m : res.momenta) {
    const auto it = at.find(m.t);
    if (it == at.end()) continue;
    const std::size_t i = it->second;
    const double row[] = {m.t, res.report->E_outer[i], res.report->E_global[i], res.report->E_inner[i], m.M, m.M1, m.M2, m.M_phi};
    for (std::size_t c = 0; c < 8; ++c) cols[c].push_back(row[c]);
  }
  const fs::path csv = out.parent_path() / (out.stem().string() + "_series.csv");
  write_columns_csv(csv, {"t", "E_outer", "E_global", "E_inner", "M", "M1", "M2", "M_phi"}, cols);
  std::cout << "wrote " << out.string() << " and " << csv.string() << "\n";
  return ok ? 0 : kChecksFailed;
}

// ---- heat

struct HeatArgs {
  std::string u0 = "hat:1:0.1";
  std::string times = "16,64,256,1024";
  double h = 1.0 / 1024.0;
  double kappa = 0.1, gamma = 0.9, K = 1.0;
};

int cmd_heat(const HeatArgs& a, const Globals& g) {
  const InitialDataSpec spec = InitialDataSpec::parse(a.u0);
  const double top = std::ceil(spec.support_right()) + 1.0;
  HeatSolution hs{make_initial_data(spec, Grid::cell_centred(0.0, top, a.h)).u0, 1.0};
  const double m1 = heat_initial_first_moment(hs);
  const auto times = parse_list(a.times);
  if (times.empty()) throw std::invalid_argument("--times is empty");

  json rows = json::array();
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity(), worst_moment = 0.0;
  for (double t : times) {
    const HeatDipoleError e = heat_dipole_error(hs, t, m1);
    const double drift = std::abs(heat_first_moment(hs, t) - m1);
    worst_moment = std::max(worst_moment, drift);
    decreasing = decreasing && e.weighted < prev;
    prev = e.weighted;
    rows.push_back(json{{"t", t}, {"weighted_error", e.weighted}, {"unweighted_error", e.unweighted}, {"x_at_max", e.x_at_max},
                        {"first_moment_error", drift}, {"out_of_theorem", e.out_of_theorem}});
  }
  const HeatBarrierCheck b = heat_barrier_check(a.kappa, a.gamma, a.K);
  print_check("weighted dipole error decreasing", decreasing, std::to_string(times.size()) + " times");
  print_check("first moment conserved", worst_moment <= 1e-8, "max drift " + num(worst_moment));
  print_check("barrier sign lattice", b.passed,
              std::to_string(b.points) + " points, " + std::to_string(b.plus_violations + b.minus_violations) + " violations");
  const bool ok = decreasing && worst_moment <= 1e-8 && b.passed;
  emit(json{{"u0", a.u0}, {"M1", m1}, {"rows", rows},
            {"barrier", {{"kappa", b.kappa}, {"gamma", b.gamma}, {"K", b.K}, {"mu_star", b.mu_star}, {"points", b.points},
                         {"plus_violations", b.plus_violations}, {"minus_violations", b.minus_violations}, {"min_plus", b.min_plus},
                         {"max_minus", b.max_minus}}},
            {"passed", ok}},
       g.out);
  return ok ? 0 : kChecksFailed;
}

// ---- barriers

struct BarrierArgs {
  BarrierParams p;
  double h = 1.0 / 32.0;
  double x_max = 200.0;
  double t_lo = 16.0;
  double t_cap = 1e4;
  std::string times;  // explicit times instead of a t* search
};

int cmd_barriers(const BarrierArgs& a, const Globals& g) {
  a.p.validate(false);
  const Kernel k = Kernel::biweight(1.0);
  const PhiSolution phi = solve_phi(k, a.x_max, a.h, 1e-10);
  const LzCheck lz = lz_bound_check(k, a.p.gamma, a.h, a.x_max);
  print_check("Lz pointwise bound", lz.holds, "worst margin " + num(lz.worst_margin) + " at x = " + num(lz.x_at_worst));
  json out{{"params", {{"kappa", a.p.kappa}, {"gamma", a.p.gamma}, {"beta", a.p.beta}, {"mu", a.p.mu}, {"K", a.p.K}}},
           {"Lz", {{"holds", lz.holds}, {"worst_margin", lz.worst_margin}, {"x_at_worst", lz.x_at_worst}}}};
  bool ok = lz.holds;
  if (!a.times.empty()) {
    json rows = json::array();
    for (double t : parse_list(a.times)) {
      const OmegaProfile om = omega_for_halfline(k, phi.field.grid, t, a.p.mu * std::pow(t, a.p.beta));
      const BarrierResidual rp = barrier_residual(k, phi, om, t, a.p, BarrierSign::plus);
      const BarrierResidual rm = barrier_residual(k, phi, om, t, a.p, BarrierSign::minus);
      const bool good = rp.min_residual >= 0.0 && rm.max_residual <= 0.0;
      ok = ok && good;
      print_check("t = " + num(t), good, "min plus " + num(rp.min_residual) + " at x = " + num(rp.x_at_min) + ", max minus " + num(rm.max_residual));
      rows.push_back(json{{"t", t}, {"min_plus", rp.min_residual}, {"x_at_min_plus", rp.x_at_min}, {"max_minus", rm.max_residual},
                          {"x_at_max_minus", rm.x_at_max}, {"nodes", rp.nodes}});
    }
    out["times"] = rows;
  } else {
    const TStarSearch s = find_t_star(k, phi, a.p, a.t_lo, a.t_cap);
    ok = ok && s.found;
    print_check("t* search up to " + num(a.t_cap), s.found, s.found ? "t* = " + num(s.t_star) : "no t* found");
    json probes = json::array();
    for (std::size_t i = 0; i < s.probed_t.size(); ++i)
      probes.push_back(json{{"t", s.probed_t[i]}, {"min_plus", s.probed_min_plus[i]}, {"max_minus", s.probed_max_minus[i]}});
    out["t_star"] = {{"found", s.found}, {"t_star", s.t_star}, {"t_cap", s.t_cap}, {"probes", probes}};
  }
  out["passed"] = ok;
  emit(out, g.out);
  return ok ? 0 : kChecksFailed;
}

// ---- acceptance

struct AcceptanceArgs {
  std::string only;
  std::string expect_fail;
};

int cmd_acceptance(const AcceptanceArgs& a, const Globals& g) {
  AcceptanceOptions opts;
  if (!a.only.empty()) opts.only = parse_ids(a.only);
  const std::set<int> expected = a.expect_fail.empty() ? std::set<int>{} : parse_ids(a.expect_fail);
  const auto results = run_acceptance(opts, [](const CriterionResult& r) { std::cout << format_result_line(r) << std::endl; });
  std::set<int> failed;
  json rows = json::array();
  for (const auto& r : results) {
    if (!r.passed) failed.insert(r.id);
    rows.push_back(json{{"criterion", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}, {"data", r.data}});
  }
  std::set<int> expected_run;
  for (int id : expected)
    if (opts.only.empty() || opts.only.count(id)) expected_run.insert(id);
  const std::size_t passed = results.size() - failed.size();
  std::cout << passed << "/" << results.size() << " criteria passed";
  if (!expected_run.empty()) std::cout << (failed == expected_run ? "; failures match the expected set" : "; failures differ from the expected set");
  std::cout << "\n";
  if (!g.out.empty()) write_json(g.out, json{{"criteria", rows}, {"failed", failed}, {"expected_failures", expected_run}});
  return failed == expected_run ? 0 : kChecksFailed;
}

// ---- sweep

int cmd_sweep(const Globals& g) {
  if (g.config.empty()) throw std::invalid_argument("sweep needs --config (base config, parameter, values)");
  const SweepSpec spec = SweepSpec::from_json(read_json(g.config));
  const fs::path out = g.out.empty() ? fs::path("sweep") : fs::path(g.out);
  const std::size_t failures = run_sweep(spec, out);
  std::cout << spec.values.size() - failures << "/" << spec.values.size() << " runs completed; summary in " << (out / "sweep.json").string() << "\n";
  return failures == 0 ? 0 : kChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for nonlocal diffusion with a dipole limit on the half-line"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON config (evolve, sweep)");
  app.add_option("--out", g.out, "output file or directory");
  app.add_option("--threads", g.threads, "OpenMP threads (default: runtime choice)")->check(CLI::NonNegativeNumber);

  StationaryArgs st;
  auto* c_st = app.add_subcommand("stationary", "stationary profile phi; writes x, phi, phi - x");
  c_st->add_option("--kernel", st.kernel, "biweight | epanechnikov | smooth_bump | path to a tabulated kernel CSV");
  c_st->add_option("--d", st.d, "kernel support radius");
  c_st->add_option("--h", st.h, "grid spacing");
  c_st->add_option("--xmax", st.x_max, "right end of the stored profile");
  c_st->add_option("--tol", st.tol, "refinement tolerance");

  auto* c_ev = app.add_subcommand("evolve", "run an experiment from --config into --out");

  OmegaArgs om;
  auto* c_om = app.add_subcommand("omega", "regular part of the fundamental solution");
  c_om->add_option("--t", om.t, "time")->check(CLI::PositiveNumber);
  c_om->add_option("--method", om.method, "series | fourier | both")->check(CLI::IsMember({"series", "fourier", "both"}));
  c_om->add_option("--h", om.h, "grid spacing");
  c_om->add_option("--kernel", om.kernel, "kernel family");
  c_om->add_option("--d", om.d, "kernel support radius");

  VerifyArgs ve;
  auto* c_ve = app.add_subcommand("verify", "recompute diagnostics and checks for a stored trajectory");
  c_ve->add_option("--traj", ve.traj, "trajectory directory written by evolve")->required()->check(CLI::ExistingDirectory);
  c_ve->add_option("--phi", ve.phi, "phi CSV (default: solve or read from cache)")->check(CLI::ExistingFile);
  c_ve->add_option("--report", ve.report, "report JSON to write");

  HeatArgs he;
  auto* c_he = app.add_subcommand("heat", "half-line heat reference and its dipole limit");
  c_he->add_option("--u0", he.u0, "initial data, e.g. hat:1:0.1");
  c_he->add_option("--times", he.times, "comma-separated times");
  c_he->add_option("--h", he.h, "sampling grid for u0");
  c_he->add_option("--kappa", he.kappa);
  c_he->add_option("--gamma", he.gamma);
  c_he->add_option("--K", he.K);

  BarrierArgs ba;
  auto* c_ba = app.add_subcommand("barriers", "barrier residuals and the Lz bound");
  c_ba->add_option("--kappa", ba.p.kappa);
  c_ba->add_option("--gamma", ba.p.gamma);
  c_ba->add_option("--beta", ba.p.beta);
  c_ba->add_option("--mu", ba.p.mu);
  c_ba->add_option("--K", ba.p.K);
  c_ba->add_option("--h", ba.h, "grid spacing");
  c_ba->add_option("--xmax", ba.x_max, "extent of the stationary profile");
  c_ba->add_option("--t-lo", ba.t_lo, "start of the t* search");
  c_ba->add_option("--t-cap", ba.t_cap, "end of the t* search");
  c_ba->add_option("--times", ba.times, "evaluate these times instead of searching");

  AcceptanceArgs ac;
  auto* c_ac = app.add_subcommand("acceptance", "run the acceptance criteria");
  c_ac->add_option("--only", ac.only, "comma-separated criterion ids");
  c_ac->add_option("--expect-fail", ac.expect_fail, "criteria known to fail; exit 0 iff the failures are exactly these");

  auto* c_sw = app.add_subcommand("sweep", "run a parameter sweep (--config holds base, parameter, values)");

  CLI11_PARSE(app, argc, argv);
  if (g.threads > 0) omp_set_num_threads(g.threads);

  try {
    if (*c_st) return cmd_stationary(st, g);
    if (*c_ev) return cmd_evolve(g);
    if (*c_om) return cmd_omega(om, g);
    if (*c_ve) return cmd_verify(ve, g);
    if (*c_he) return cmd_heat(he, g);
    if (*c_ba) return cmd_barriers(ba, g);
    if (*c_ac) return cmd_acceptance(ac, g);
    if (*c_sw) return cmd_sweep(g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
