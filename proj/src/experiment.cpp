#include "dipole/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include <unistd.h>

namespace dipole {

namespace fs = std::filesystem;

namespace {

std::string integrator_name(Integrator i) { return i == Integrator::rk4 ? "rk4" : "exp_integrating_factor"; }

Integrator integrator_from(const std::string& s) {
  if (s == "rk4") return Integrator::rk4;
  if (s == "exp_integrating_factor") return Integrator::exp_integrating_factor;
  throw std::invalid_argument("unknown integrator '" + s + "'");
}

std::string convolution_name(ConvolutionMethod m) {
  switch (m) {
    case ConvolutionMethod::direct: return "direct";
    case ConvolutionMethod::direct_serial: return "direct_serial";
    case ConvolutionMethod::spectral: return "spectral";
  }
  return "direct";
}

ConvolutionMethod convolution_from(const std::string& s) {
  if (s == "direct") return ConvolutionMethod::direct;
  if (s == "direct_serial") return ConvolutionMethod::direct_serial;
  if (s == "spectral") return ConvolutionMethod::spectral;
  throw std::invalid_argument("unknown convolution method '" + s + "'");
}

bool multiple_of(double a, double h) {
  const double r = a / h;
  return std::abs(r - std::round(r)) < 1e-9;
}

std::string snapshot_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u_%04zu.csv", i);
  return buf;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where, std::vector<std::string>& bad) {
  if (!j.is_object()) {
    bad.push_back(where + " must be an object");
    return;
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end())
      bad.push_back("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

Kernel KernelSpec::build() const {
  if (family == "tabulated") {
    if (csv_path.empty()) throw std::invalid_argument("tabulated kernel needs a CSV path");
    return Kernel::from_csv(csv_path);
  }
  switch (kernel_family_from_string(family)) {
    case KernelFamily::epanechnikov: return Kernel::epanechnikov(d);
    case KernelFamily::biweight: return Kernel::biweight(d);
    case KernelFamily::smooth_bump: return Kernel::smooth_bump(d);
    case KernelFamily::tabulated: break;
  }
  throw std::invalid_argument("unknown kernel family");
}

KernelSpec KernelSpec::from_json(const json& j) {
  KernelSpec s;
  s.family = j.value("family", s.family);
  s.d = j.value("d", s.d);
  s.csv_path = j.value("path", std::string{});
  return s;
}

json KernelSpec::to_json() const {
  json j{{"family", family}, {"d", d}};
  if (!csv_path.empty()) j["path"] = csv_path;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  std::vector<std::string> bad;
  check_keys(j, {"kernel", "grid", "initial_data", "integrator", "stationary", "diagnostics", "output", "rng_seed"}, "config", bad);
  ExperimentConfig c;
  try {
    if (j.contains("kernel")) c.kernel = KernelSpec::from_json(j.at("kernel"));
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      check_keys(g, {"h", "x_max"}, "grid", bad);
      c.h = g.value("h", c.h);
      if (g.contains("x_max") && !(g.at("x_max").is_string() && g.at("x_max").get<std::string>() == "auto")) c.x_max = g.at("x_max").get<double>();
    }
    if (j.contains("initial_data")) c.initial = InitialDataSpec::from_json(j.at("initial_data"));
    if (j.contains("integrator")) {
      const auto& i = j.at("integrator");
      check_keys(i, {"method", "dt", "t_final", "snapshot_t0", "convolution", "leak_tol"}, "integrator", bad);
      c.integrator = integrator_from(i.value("method", std::string("rk4")));
      c.dt = i.value("dt", c.dt);
      c.t_final = i.value("t_final", c.t_final);
      c.snapshot_t0 = i.value("snapshot_t0", c.snapshot_t0);
      c.convolution = convolution_from(i.value("convolution", std::string("direct")));
      c.leak_tol = i.value("leak_tol", c.leak_tol);
    }
    if (j.contains("stationary")) c.phi_tol = j.at("stationary").value("tol", c.phi_tol);
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      check_keys(d, {"report", "mu", "beta", "fit_window"}, "diagnostics", bad);
      c.compute_report = d.value("report", c.compute_report);
      c.report.mu = d.value("mu", c.report.mu);
      c.report.beta = d.value("beta", c.report.beta);
      if (d.contains("fit_window")) {
        const auto w = d.at("fit_window").get<std::vector<double>>();
        if (w.size() != 2) throw std::invalid_argument("fit_window needs two entries");
        c.report.fit_lo = w[0];
        c.report.fit_hi = w[1];
      }
    }
    if (j.contains("output")) {
      c.out_dir = j.at("output").value("dir", std::string{});
      c.cache_dir = j.at("output").value("cache_dir", std::string{});
    }
    c.rng_seed = j.value("rng_seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    bad.push_back(std::string("malformed config: ") + e.what());
  }
  if (!bad.empty()) {
    std::string msg = "invalid config:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw std::invalid_argument(msg);
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["kernel"] = kernel.to_json();
  j["grid"] = json{{"h", h}};
  if (x_max) j["grid"]["x_max"] = *x_max;
  else j["grid"]["x_max"] = "auto";
  j["initial_data"] = initial.to_json();
  j["integrator"] = json{{"method", integrator_name(integrator)}, {"dt", dt}, {"t_final", t_final}, {"snapshot_t0", snapshot_t0},
                         {"convolution", convolution_name(convolution)}, {"leak_tol", leak_tol}};
  j["stationary"] = json{{"tol", phi_tol}};
  j["diagnostics"] = json{{"report", compute_report}, {"mu", report.mu}, {"beta", report.beta}, {"fit_window", {report.fit_lo, report.fit_hi}}};
  j["output"] = json{{"dir", out_dir}, {"cache_dir", cache_dir}};
  j["rng_seed"] = rng_seed;
  return j;
}

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> v;
  std::optional<Kernel> k;
  try {
    k = kernel.build();
    const auto inv = check_kernel_invariants(*k);
    for (const auto& s : inv) v.push_back("kernel: " + s);
  } catch (const std::exception& e) {
    v.push_back(std::string("kernel: ") + e.what());
  }
  if (!(h > 0.0)) v.push_back("grid spacing h must be positive");
  else if (k && !multiple_of(k->support(), h)) v.push_back("kernel support d must be an integer multiple of h");
  if (!(dt > 0.0) || dt > 0.25) v.push_back("dt must lie in (0, 0.25]");
  if (!(t_final > 0.0)) v.push_back("t_final must be positive");
  if (!(snapshot_t0 > 0.0) || snapshot_t0 > t_final) v.push_back("snapshot_t0 must lie in (0, t_final]");
  if (!(leak_tol > 0.0)) v.push_back("leak_tol must be positive");
  if (!(phi_tol > 0.0)) v.push_back("stationary tol must be positive");
  if (compute_report) {
    if (!(report.mu > 0.0)) v.push_back("diagnostics mu must be positive");
    if (!(report.beta > 0.25 && report.beta < 0.5)) v.push_back("diagnostics beta must lie in (1/4, 1/2)");
    if (!(report.fit_hi > report.fit_lo)) v.push_back("fit window must be increasing");
  }
  for (const auto& s : initial.violations()) v.push_back("initial data: " + s);
  if (k && h > 0.0 && x_max) {
    if (*x_max < 10.0 * k->support()) v.push_back("x_max must be at least 10 d");
    if (!multiple_of(*x_max, h)) v.push_back("x_max must be a multiple of h");
  }
  if (initial.violations().empty() && k && h > 0.0 && multiple_of(k->support(), h)) {
    try {
      const double xm = resolved_x_max();
      if (initial.support_right() >= xm) v.push_back("initial data support exceeds x_max");
      const Grid g = Grid::half_line(k->support(), xm, h);
      const InitialData init = make_initial_data(initial, g);
      for (double val : init.u0.values)
        if (!std::isfinite(val)) {
          v.push_back("initial data must be finite (L-infinity)");
          break;
        }
    } catch (const std::exception& e) {
      v.push_back(std::string("initial data: ") + e.what());
    }
  }
  return v;
}

void ExperimentConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid config:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw std::invalid_argument(msg);
}

double ExperimentConfig::resolved_x_max() const {
  if (x_max) return *x_max;
  const Kernel k = kernel.build();
  const double d = k.support();
  return std::max(10.0 * d, sized_domain(initial.support_right(), kernel_q(k), t_final, d));
}

std::vector<double> ExperimentConfig::snapshot_times() const {
  std::vector<double> t{0.0};
  for (double s : geometric_times(snapshot_t0, t_final)) t.push_back(s);
  return t;
}

void write_phi_csv(const fs::path& path, const PhiSolution& phi) {
  std::vector<double> xs(phi.field.size()), dev(phi.field.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = phi.field.x(i);
    dev[i] = phi.field.values[i] - xs[i];
  }
  write_columns_csv(path, {"x", "phi", "phi_minus_x"}, {xs, phi.field.values, dev});
}

PhiSolution phi_from_csv(const fs::path& path) {
  PhiSolution p;
  p.field = read_field_csv(path);
  p.field.extension = Extension::linear_slope_one;
  p.field.extension_offset = p.field.values.back() - p.field.grid.x_max();
  p.offset_at_edge = p.field.extension_offset;
  return p;
}

PhiSolution cached_phi(const Kernel& k, const KernelSpec& spec, double h, double x_max, double tol, const std::string& cache_dir, bool* hit) {
  if (hit) *hit = false;
  if (cache_dir.empty()) return solve_phi(k, x_max, h, tol);
  json key{{"kernel", spec.to_json()}, {"h", h}, {"x_max", x_max}, {"tol", tol}, {"schema", 1}};
  if (!spec.csv_path.empty()) key["kernel"]["content"] = sha256_file(spec.csv_path);
  const std::string digest = sha256_hex(key.dump());
  const fs::path csv = fs::path(cache_dir) / ("phi_" + digest + ".csv");
  const fs::path meta = fs::path(cache_dir) / ("phi_" + digest + ".json");
  if (fs::exists(csv) && fs::exists(meta)) {
    PhiSolution p = phi_from_csv(csv);
    const json m = read_json(meta);
    p.n_used = m.at("n_used").get<double>();
    p.iterations = m.at("iterations").get<std::size_t>();
    p.offsets_by_level = m.at("offsets_by_level").get<std::vector<double>>();
    if (hit) *hit = true;
    return p;
  }
  PhiSolution p = solve_phi(k, x_max, h, tol);
  // write-once: stage under a unique name, publish with a rename
  fs::create_directories(cache_dir);
  const std::string tag = ".tmp" + std::to_string(::getpid()) + "_" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  write_phi_csv(csv.string() + tag, p);
  write_json(meta.string() + tag,
             json{{"key", key}, {"offset_at_edge", p.offset_at_edge}, {"n_used", p.n_used}, {"iterations", p.iterations}, {"offsets_by_level", p.offsets_by_level}});
  std::error_code ec;
  fs::rename(csv.string() + tag, csv, ec);
  fs::rename(meta.string() + tag, meta, ec);
  fs::remove(csv.string() + tag, ec);
  fs::remove(meta.string() + tag, ec);
  return p;
}

json report_to_json(const AsymptoticReport& rep) {
  json fits = json::object();
  for (const auto& [name, f] : rep.fitted_exponents) fits[name] = json{{"slope", f.slope}, {"r2", f.r2}, {"points", f.points}};
  return json{{"times", rep.times}, {"E_outer", rep.E_outer}, {"E_global", rep.E_global}, {"E_inner", rep.E_inner}, {"fitted_exponents", fits}};
}

json momenta_to_json(const std::vector<MomentaRecord>& m) {
  json a = json::array();
  for (const auto& r : m) a.push_back(json{{"t", r.t}, {"M", r.M}, {"M1", r.M1}, {"M2", r.M2}, {"M_phi", r.M_phi}});
  return a;
}

namespace {

void write_momenta_csv(const fs::path& path, const std::vector<MomentaRecord>& m) {
  std::vector<double> t, M, M1, M2, Mp;
  for (const auto& r : m) {
    t.push_back(r.t);
    M.push_back(r.M);
    M1.push_back(r.M1);
    M2.push_back(r.M2);
    Mp.push_back(r.M_phi);
  }
  write_columns_csv(path, {"t", "M", "M1", "M2", "M_phi"}, {t, M, M1, M2, Mp});
}

void write_errors_csv(const fs::path& path, const AsymptoticReport& rep) {
  write_columns_csv(path, {"t", "E_outer", "E_global", "E_inner"}, {rep.times, rep.E_outer, rep.E_global, rep.E_inner});
}

json manifest_for(const ExperimentConfig& cfg, const fs::path& dir, const Grid& g, const std::vector<double>& times) {
  json c = cfg.to_json();
  c.erase("output");  // location-independent
  json files = json::array();
  std::vector<fs::path> paths;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") paths.push_back(fs::relative(e.path(), dir));
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) files.push_back(json{{"path", p.generic_string()}, {"sha256", sha256_file(dir / p)}});
  json snaps = json::array();
  for (std::size_t i = 0; i < times.size(); ++i) snaps.push_back(json{{"t", times[i]}, {"file", "snapshots/" + snapshot_name(i)}});
  return json{{"config", c}, {"grid", grid_to_json(g)}, {"snapshots", snaps}, {"files", files}};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Kernel k = cfg.kernel.build();
  const double d = k.support();
  const double xm = cfg.resolved_x_max();
  const Grid g = Grid::half_line(d, xm, cfg.h);
  const InitialData init = make_initial_data(cfg.initial, g);

  ExperimentResult res;
  res.exact_moments = init.exact;
  res.phi = cached_phi(k, cfg.kernel, cfg.h, xm, cfg.phi_tol, cfg.cache_dir, &res.phi_from_cache);
  res.m1star = mstar(init.u0, res.phi);

  EvolutionConfig ec;
  ec.mode = EvolutionMode::halfline_dirichlet;
  ec.dt = cfg.dt;
  ec.t_final = cfg.t_final;
  ec.snapshot_times = cfg.snapshot_times();
  ec.integrator = cfg.integrator;
  ec.convolution = cfg.convolution;
  ec.leak_tol = cfg.leak_tol;
  res.trajectory = evolve(k, init.u0, ec);
  res.momenta = momenta_series(res.trajectory, res.phi);
  if (cfg.compute_report) res.report = asymptotic_report(k, res.trajectory, res.phi, res.m1star, cfg.report);

  if (cfg.out_dir.empty()) return res;
  const fs::path out(cfg.out_dir);
  const fs::path partial = out.string() + ".partial";
  fs::remove_all(partial);
  try {
    fs::create_directories(partial / "snapshots");
    write_phi_csv(partial / "phi.csv", res.phi);
    std::vector<double> times;
    for (std::size_t i = 0; i < res.trajectory.snapshots.size(); ++i) {
      const auto& s = res.trajectory.snapshots[i];
      times.push_back(s.t);
      write_field_csv(partial / "snapshots" / snapshot_name(i), s.u, "u");
    }
    write_momenta_csv(partial / "momenta.csv", res.momenta);
    json report{{"m1star", res.m1star},
                {"phi", json{{"offset_at_edge", res.phi.offset_at_edge}, {"n_used", res.phi.n_used}, {"residual_L", residual_L(k, res.phi)}}},
                {"mass_leak_at_edge", res.trajectory.mass_leak_at_edge},
                {"momenta", momenta_to_json(res.momenta)}};
    if (init.exact) report["initial_exact_moments"] = json{{"M", init.exact->M}, {"M1", init.exact->M1}, {"M2", init.exact->M2}};
    if (res.report) {
      report["asymptotics"] = report_to_json(*res.report);
      write_errors_csv(partial / "errors.csv", *res.report);
    }
    write_json(partial / "report.json", report);
    const json manifest = manifest_for(cfg, partial, g, times);
    const std::string text = manifest.dump(2) + "\n";
    write_text(partial / "manifest.json", text);
    res.manifest_hash = sha256_hex(text);
    fs::remove_all(out);
    fs::rename(partial, out);
  } catch (...) {
    std::error_code ec2;
    fs::remove_all(partial, ec2);
    throw;
  }
  return res;
}

Trajectory load_trajectory(const fs::path& dir, ExperimentConfig* cfg) {
  const json manifest = read_json(dir / "manifest.json");
  const ExperimentConfig c = ExperimentConfig::from_json(manifest.at("config"));
  if (cfg) *cfg = c;
  const Grid g = grid_from_json(manifest.at("grid"));
  Trajectory traj;
  traj.config.t_final = c.t_final;
  traj.config.dt = c.dt;
  traj.config.integrator = c.integrator;
  for (const auto& s : manifest.at("snapshots")) {
    Field u = read_field_csv(dir / s.at("file").get<std::string>());
    if (!(u.grid == g)) throw std::runtime_error("snapshot grid does not match the manifest grid");
    traj.snapshots.push_back({s.at("t").get<double>(), std::move(u)});
    traj.config.snapshot_times.push_back(traj.snapshots.back().t);
  }
  return traj;
}

SweepSpec SweepSpec::from_json(const json& j) {
  SweepSpec s;
  s.base = j.at("base");
  s.parameter = j.at("parameter").get<std::string>();
  for (const auto& v : j.at("values")) s.values.push_back(v);
  if (s.values.empty()) throw std::invalid_argument("sweep needs at least one value");
  return s;
}

std::size_t run_sweep(const SweepSpec& spec, const fs::path& out_dir) {
  const std::size_t n = spec.values.size();
  std::vector<json> rows(n);
  std::size_t failures = 0;
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : failures)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu", idx);
    json row{{"run", name}, {"value", spec.values[idx]}};
    try {
      json cfg_json = spec.base;
      cfg_json[json::json_pointer("/" + [&] {
        std::string p = spec.parameter;
        std::replace(p.begin(), p.end(), '.', '/');
        return p;
      }())] = spec.values[idx];
      cfg_json["output"]["dir"] = (out_dir / name).string();
      const ExperimentConfig cfg = ExperimentConfig::from_json(cfg_json);
      const ExperimentResult r = run_experiment(cfg);
      row["status"] = "ok";
      row["manifest_sha256"] = r.manifest_hash;
      row["m1star"] = r.m1star;
      if (r.report) row["fitted_exponents"] = report_to_json(*r.report)["fitted_exponents"];
    } catch (const std::exception& e) {
      row["status"] = "failed";
      row["error"] = e.what();
      ++failures;
    }
    rows[idx] = row;
  }
  write_json(out_dir / "sweep.json", json{{"parameter", spec.parameter}, {"runs", rows}});
  return failures;
}

}  // namespace dipole
