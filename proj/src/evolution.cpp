#include "dipole/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dipole {

void EvolutionConfig::validate() const {
  if (!(dt > 0.0) || dt > 0.25) throw std::invalid_argument("dt must lie in (0, 0.25]");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("t_final must be finite and nonnegative");
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) throw std::invalid_argument("snapshot_times must be sorted");
  for (double t : snapshot_times)
    if (t < 0.0 || t > t_final * (1 + 1e-12)) throw std::invalid_argument("snapshot_times must lie in [0, t_final]");
  if (!(leak_tol > 0.0)) throw std::invalid_argument("leak_tol must be positive");
}

const Snapshot& Trajectory::at(double t) const {
  for (const auto& s : snapshots)
    if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, t)) return s;
  throw std::out_of_range("no snapshot at the requested time");
}

namespace {

bool halfline(const EvolutionConfig& cfg) { return cfg.mode == EvolutionMode::halfline_dirichlet; }

void project(Field& v, const EvolutionConfig& cfg) {
  if (halfline(cfg)) zero_exterior(v);
}

Field lu(const Taps& taps, const Field& u, const EvolutionConfig& cfg) {
  Field r = apply_L(taps, u, cfg.convolution);
  project(r, cfg);
  return r;
}

void axpy(Field& y, double a, const Field& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y.values[i] += a * x.values[i];
}

double edge_value(const Field& u, std::size_t m, const EvolutionConfig& cfg) {
  const std::size_t n = u.size();
  double s = 0.0;
  for (std::size_t i = n - std::min(n, m + 1); i < n; ++i) s = std::max(s, std::abs(u.values[i]));
  if (!halfline(cfg))
    for (std::size_t i = 0; i <= std::min(n - 1, m); ++i) s = std::max(s, std::abs(u.values[i]));
  return s;
}

}  // namespace

Field step(const Taps& taps, const Field& u, double dt, const EvolutionConfig& cfg) {
  if (cfg.integrator == Integrator::rk4) {
    const Field k1 = lu(taps, u, cfg);
    Field y = u;
    axpy(y, 0.5 * dt, k1);
    const Field k2 = lu(taps, y, cfg);
    y = u;
    axpy(y, 0.5 * dt, k2);
    const Field k3 = lu(taps, y, cfg);
    y = u;
    axpy(y, dt, k3);
    const Field k4 = lu(taps, y, cfg);
    Field out = u;
    for (std::size_t i = 0; i < out.size(); ++i)
      out.values[i] += dt / 6.0 * (k1.values[i] + 2.0 * k2.values[i] + 2.0 * k3.values[i] + k4.values[i]);
    project(out, cfg);
    return out;
  }
  // e^{-dt} sum_n dt^n (PJ)^n u / n!, stopped once dt^n / n! < 1e-14 (|J*| <= 1)
  Field term = u;
  Field sum = u;
  double coef = 1.0;
  for (int n = 1; n < 64 && coef >= 1e-14; ++n) {
    term = convolve(taps, term, cfg.convolution);
    project(term, cfg);
    for (auto& v : term.values) v *= dt / n;
    coef *= dt / n;
    axpy(sum, 1.0, term);
  }
  const double decay = std::exp(-dt);
  for (auto& v : sum.values) v *= decay;
  return sum;
}

Trajectory evolve(const Kernel& k, const Field& u0, const EvolutionConfig& cfg) {
  cfg.validate();
  const double d = k.support();
  if (halfline(cfg)) {
    if (!u0.grid.cell_centred_layout() || u0.grid.lower_edge() > -d + 1e-9 * u0.grid.h())
      throw std::invalid_argument("half-line evolution needs a half-line grid covering the strip (-d, 0)");
    if (!vanishes_on_exterior(u0)) throw std::invalid_argument("initial data must vanish on the exterior strip");
  }
  if (u0.extension != Extension::zero) throw std::invalid_argument("evolved fields use the zero extension");
  const Taps taps = make_taps(k, u0.grid.h());
  const double norm0 = sup_norm(u0.values);

  Trajectory traj;
  traj.config = cfg;
  Field u = u0;
  double t = 0.0;
  traj.mass_leak_at_edge = edge_value(u, taps.m, cfg);

  std::vector<double> targets = cfg.snapshot_times;
  if (targets.empty() || targets.back() < cfg.t_final) targets.push_back(cfg.t_final);
  std::size_t next_snapshot = 0;
  auto record = [&](double target) {
    while (next_snapshot < cfg.snapshot_times.size() && cfg.snapshot_times[next_snapshot] <= target * (1 + 1e-12)) {
      traj.snapshots.push_back({cfg.snapshot_times[next_snapshot], u});
      ++next_snapshot;
    }
  };
  record(0.0);
  for (double target : targets) {
    if (target <= t) continue;
    const auto steps = static_cast<std::size_t>(std::ceil((target - t) / cfg.dt - 1e-9));
    const double h_t = (target - t) / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) {
      u = step(taps, u, h_t, cfg);
      const double tn = t + h_t * static_cast<double>(s + 1);
      const double norm = sup_norm(u.values);
      if (!std::isfinite(norm) || norm > norm0 * std::exp(2.0 * tn) * (1 + 1e-12) + 1e-300)
        throw std::runtime_error("evolution unstable: sup norm exceeds the e^{2t} bound");
      traj.mass_leak_at_edge = std::max(traj.mass_leak_at_edge, edge_value(u, taps.m, cfg));
    }
    t = target;
    if (traj.mass_leak_at_edge > cfg.leak_tol) throw std::runtime_error("edge leak exceeds tolerance: domain too narrow");
    record(t);
  }
  return traj;
}

Field antisym_extend(const Field& u, Pivot pivot, double d) {
  const Grid& g = u.grid;
  if (!g.cell_centred_layout() || g.lower_edge() > -d + 1e-9 * g.h()) throw std::invalid_argument("antisym_extend needs a half-line grid");
  if (!vanishes_on_exterior(u)) throw std::invalid_argument("antisym_extend: u is nonzero on the exterior strip");
  const double top = g.upper_edge();
  const double shift = pivot == Pivot::origin ? 0.0 : 2.0 * d;
  const Grid out_grid = Grid::cell_centred(-shift - top, top, g.h());
  Field w(out_grid);
  for (std::size_t i = 0; i < out_grid.size(); ++i) {
    const double x = out_grid.x(i);
    if (x > 0.0) {
      w.values[i] = u.at_node(x);
    } else if (x < -shift) {
      w.values[i] = -u.at_node(-shift - x);
    }
  }
  return w;
}

SandwichReport sandwich_check(const Kernel& k, const Field& u0, double t0, double t_final, const EvolutionConfig& cfg) {
  if (!(t0 >= 0.0) || !(t_final > t0)) throw std::invalid_argument("sandwich_check needs 0 <= t0 < t_final");
  for (double v : u0.values)
    if (v < 0.0) throw std::invalid_argument("sandwich_check needs nonnegative initial data");
  const double d = k.support();

  std::vector<double> times{t0};
  for (double t : cfg.snapshot_times)
    if (t > t0 && t < t_final) times.push_back(t);
  times.push_back(t_final);

  EvolutionConfig half = cfg;
  half.mode = EvolutionMode::halfline_dirichlet;
  half.t_final = t_final;
  half.snapshot_times = times;
  const Trajectory base = evolve(k, u0, half);

  const Field& ut0 = base.at(t0).u;
  EvolutionConfig whole = cfg;
  whole.mode = EvolutionMode::cauchy;
  whole.t_final = t_final - t0;
  whole.snapshot_times.clear();
  for (double t : times) whole.snapshot_times.push_back(t - t0);
  Trajectory upper, lower;
  {
    const Field up0 = antisym_extend(ut0, Pivot::minus_d, d);
    const Field lo0 = antisym_extend(ut0, Pivot::origin, d);
#pragma omp parallel sections
    {
#pragma omp section
      upper = evolve(k, up0, whole);
#pragma omp section
      lower = evolve(k, lo0, whole);
    }
  }

  SandwichReport rep;
  rep.t0 = t0;
  rep.t_final = t_final;
  rep.slack = 5.0 * u0.grid.h() * u0.grid.h();
  rep.min_upper_gap = rep.min_lower_gap = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < times.size(); ++s) {
    const Field& u = base.snapshots[s].u;
    const Field& up = upper.snapshots[s].u;
    const Field& lo = lower.snapshots[s].u;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = u.x(i);
      if (x < 0.0) continue;
      rep.min_upper_gap = std::min(rep.min_upper_gap, up.at_node(x) - u.values[i]);
      rep.min_lower_gap = std::min(rep.min_lower_gap, u.values[i] - lo.at_node(x));
    }
  }
  rep.passed = rep.min_upper_gap >= -rep.slack && rep.min_lower_gap >= -rep.slack;
  return rep;
}

std::vector<double> geometric_times(double t0, double t_final) {
  if (!(t0 > 0.0) || t_final < t0) throw std::invalid_argument("geometric_times needs 0 < t0 <= t_final");
  std::vector<double> out;
  for (int kk = 0;; ++kk) {
    const double t = t0 * std::exp2(0.5 * kk);
    if (t > t_final * (1 + 1e-12)) break;
    // even k are exact powers of two times t0
    out.push_back(kk % 2 == 0 ? t0 * std::exp2(kk / 2) : t);
  }
  if (std::abs(out.back() - t_final) > 1e-12 * t_final) out.push_back(t_final);
  return out;
}

double sized_domain(double supp_right, double q, double t_final, double d) {
  const double raw = supp_right + 8.0 * std::sqrt(q * t_final) + 4.0 * d;
  return std::ceil(raw / d - 1e-12) * d;
}

}  // namespace dipole
