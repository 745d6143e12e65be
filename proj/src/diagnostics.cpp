#include "dipole/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dipole/convolution.hpp"

namespace dipole {

namespace {

void require_aligned(const Field& a, const Field& b, const char* what) {
  if (!a.grid.aligned_with(b.grid)) throw std::invalid_argument(std::string(what) + ": grids are not aligned");
}

double round_up(double x, double step) { return std::ceil(x / step - 1e-12) * step; }

}  // namespace

std::vector<MomentaRecord> momenta_series(const Trajectory& traj, const PhiSolution& phi) {
  std::vector<MomentaRecord> out;
  for (const auto& s : traj.snapshots) {
    require_aligned(s.u, phi.field, "momenta_series");
    out.push_back({s.t, moment(s.u, 0), moment(s.u, 1), moment(s.u, 2), weighted_mass(s.u, phi.field)});
  }
  return out;
}

double mstar(const Field& u0, const PhiSolution& phi) {
  require_aligned(u0, phi.field, "mstar");
  return weighted_mass(u0, phi.field);
}

double outer_error(const Field& u, double t, double m1star, double q) {
  if (!(t > 0.0)) throw std::invalid_argument("outer_error needs t > 0");
  double e = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    if (x < 0.0) continue;
    e = std::max(e, std::abs(u.values[i] + 2.0 * m1star * dipole_q(x, t, q)));
  }
  return t * e;
}

double global_error(const Field& u, double t, double m1star, double q, const PhiSolution& phi) {
  if (!(t > 0.0)) throw std::invalid_argument("global_error needs t > 0");
  require_aligned(u, phi.field, "global_error");
  const double scale = std::pow(t, 1.5);
  double e = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    if (x < 0.0) continue;
    const double comparison = m1star * phi.field.at_node(x) * gamma_q(x, t, q) / (q * t);
    e = std::max(e, scale / (x + 1.0) * std::abs(u.values[i] - comparison));
  }
  return e;
}

double inner_error(const Field& u, double t, double m1star, double q, const PhiSolution& phi, const OmegaProfile& omega,
                   double mu, double beta) {
  if (std::abs(omega.t - t) > 1e-12 * std::max(1.0, t)) throw std::invalid_argument("inner_error: omega computed at a different time");
  if (!(beta > 0.25 && beta < 0.5)) throw std::invalid_argument("inner_error needs 1/4 < beta < 1/2");
  require_aligned(u, phi.field, "inner_error");
  require_aligned(u, omega.field, "inner_error");
  const double x_hi = mu * std::pow(t, beta);
  if (omega.field.grid.x_max() < std::min(x_hi, u.grid.x_max())) throw std::invalid_argument("inner_error: omega grid too short");
  const double scale = std::pow(t, 1.5);
  double e = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    if (x < 0.0 || x > x_hi) continue;
    const double comparison = m1star * phi.field.at_node(x) * omega.field.at_node(x) / (q * t);
    e = std::max(e, scale / (x + 1.0) * std::abs(u.values[i] - comparison));
  }
  return e;
}

RatioRange inner_ratio(const Field& u, double t, double m1star, double q, const PhiSolution& phi, const OmegaProfile& omega,
                       double x_lo, double x_hi) {
  require_aligned(u, omega.field, "inner_ratio");
  RatioRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    if (x < x_lo || x > x_hi) continue;
    const double v = u.values[i] * q * t / (m1star * phi.field.at_node(x) * omega.field.at_node(x));
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
    ++r.nodes;
  }
  if (r.nodes == 0) throw std::invalid_argument("inner_ratio: no nodes in range");
  return r;
}

RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& values, double t_lo, double t_hi) {
  if (times.size() != values.size()) throw std::invalid_argument("fit_rate: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo * (1 - 1e-12) || times[i] > t_hi * (1 + 1e-12)) continue;
    if (!(values[i] > 0.0)) throw std::invalid_argument("fit_rate: nonpositive value in window");
    lx.push_back(std::log(times[i]));
    ly.push_back(std::log(values[i]));
  }
  const auto n = static_cast<double>(lx.size());
  if (lx.size() < 4) throw std::invalid_argument("fit_rate: fewer than four points in window");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  RateFit f;
  f.slope = sxy / sxx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.points = lx.size();
  return f;
}

OmegaProfile omega_for_halfline(const Kernel& k, const Grid& g, double t, double x_hi) {
  const double d = k.support();
  const double w = round_up(std::max(x_hi, 0.0) + 3.0 * d, d);
  const Grid og = g.cell_centred_layout() ? Grid::cell_centred(-w, w, g.h()) : Grid::node_aligned(-w, w, g.h());
  return omega_profile(k, og, t);
}

AsymptoticReport asymptotic_report(const Kernel& k, const Trajectory& traj, const PhiSolution& phi, double m1star,
                                   const ReportOptions& opts) {
  const double q = kernel_q(k);
  AsymptoticReport rep;
  std::vector<const Snapshot*> snaps;
  for (const auto& s : traj.snapshots)
    if (s.t > 0.0) snaps.push_back(&s);
  const std::size_t n = snaps.size();
  rep.times.resize(n);
  rep.E_outer.resize(n);
  rep.E_global.resize(n);
  rep.E_inner.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Snapshot& s = *snaps[i];
    const double x_hi = opts.mu * std::pow(s.t, opts.beta);
    const OmegaProfile om = omega_for_halfline(k, s.u.grid, s.t, x_hi);
    rep.times[i] = s.t;
    rep.E_outer[i] = outer_error(s.u, s.t, m1star, q);
    rep.E_global[i] = global_error(s.u, s.t, m1star, q, phi);
    rep.E_inner[i] = inner_error(s.u, s.t, m1star, q, phi, om, opts.mu, opts.beta);
  }

  const auto records = momenta_series(traj, phi);
  std::vector<double> tm, M, dM1, M2;
  for (const auto& r : records) {
    if (r.t <= 0.0) continue;
    tm.push_back(r.t);
    M.push_back(r.M);
    dM1.push_back(std::abs(r.M1 - m1star));
    M2.push_back(r.M2);
  }
  auto fit = [&](const std::string& name, const std::vector<double>& t, const std::vector<double>& v) {
    try {
      rep.fitted_exponents[name] = fit_rate(t, v, opts.fit_lo, opts.fit_hi);
    } catch (const std::invalid_argument&) {
      // too few snapshots in the window; the exponent is simply not reported
    }
  };
  fit("M", tm, M);
  fit("M1_deficit", tm, dM1);
  fit("M2", tm, M2);
  fit("E_outer", rep.times, rep.E_outer);
  fit("E_global", rep.times, rep.E_global);
  fit("E_inner", rep.times, rep.E_inner);
  return rep;
}

double BarrierParams::beta_bound() const { return (1.0 - kappa) / (2.0 * (2.0 - gamma)); }

void BarrierParams::validate(bool inner_matching) const {
  std::ostringstream err;
  if (!(kappa > 0.0 && kappa < 1.0)) err << "kappa must lie in (0, 1); ";
  if (!(gamma > 0.0 && gamma < 1.0)) err << "gamma must lie in (0, 1); ";
  if (!(mu > 0.0)) err << "mu must be positive; ";
  if (!(K >= 1.0)) err << "K must be >= 1; ";
  if (!(beta < beta_bound())) err << "beta must be below (1 - kappa)/(2(2 - gamma)); ";
  if (inner_matching && !(beta > 0.25)) err << "beta must exceed 1/4; ";
  if (!err.str().empty()) throw std::invalid_argument("inadmissible barrier parameters: " + err.str());
}

BarrierResidual barrier_residual(const Kernel& k, const PhiSolution& phi, const OmegaProfile& omega, double t,
                                 const BarrierParams& p, BarrierSign sign) {
  p.validate(false);
  if (!(t > 0.0)) throw std::invalid_argument("barrier_residual needs t > 0");
  if (std::abs(omega.t - t) > 1e-12 * std::max(1.0, t)) throw std::invalid_argument("barrier_residual: omega computed at a different time");
  const double d = k.support();
  const double h = phi.field.grid.h();
  const double x_hi = p.mu * std::pow(t, p.beta);
  if (!omega.field.grid.aligned_with(phi.field.grid)) throw std::invalid_argument("barrier_residual: omega grid not aligned with phi");
  if (omega.field.grid.lower_edge() > -2.0 * d + 1e-9 * h || omega.field.grid.upper_edge() < x_hi + 2.0 * d - 1e-9 * h)
    throw std::invalid_argument("barrier_residual: omega grid must cover [-2d, mu t^beta + 2d]");

  const Taps taps = make_taps(k, h);
  const Field l_omega = apply_L(taps, omega.field);

  const Grid g = Grid::half_line(d, round_up(x_hi + 2.0 * d, d), h);
  Field phi_omega(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    if (x > 0.0) phi_omega.values[i] = phi.field.at_node(x) * omega.field.at_node(x);
  }
  const Field l_phi_omega = apply_L(taps, phi_omega);

  const double a = 0.5 * (3.0 + p.kappa);
  const double s = sign == BarrierSign::plus ? 1.0 : -1.0;
  const double ta = p.K * std::pow(t, -a);
  auto z = [&](double x) { return std::pow(x + 2.0 * d, p.gamma); };

  BarrierResidual r;
  r.x_hi = x_hi;
  r.min_residual = std::numeric_limits<double>::infinity();
  r.max_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    if (x < 0.0 || x > x_hi) continue;
    double lz = -z(x);
    for (std::ptrdiff_t kk = -static_cast<std::ptrdiff_t>(taps.m); kk <= static_cast<std::ptrdiff_t>(taps.m); ++kk)
      lz += taps[kk] * z(x - static_cast<double>(kk) * h);
    const double ph = phi.field.at_node(x);
    const double dt_v = ph * (l_omega.at_node(x) + std::exp(-t) * k(x)) / t - ph * omega.field.at_node(x) / (t * t) - s * a * ta / t * z(x);
    const double l_v = l_phi_omega.values[i] / t + s * ta * lz;
    const double res = dt_v - l_v;
    if (res < r.min_residual) {
      r.min_residual = res;
      r.x_at_min = x;
    }
    if (res > r.max_residual) {
      r.max_residual = res;
      r.x_at_max = x;
    }
    ++r.nodes;
  }
  if (r.nodes == 0) throw std::invalid_argument("barrier_residual: empty region");
  return r;
}

LzCheck lz_bound_check(const Kernel& k, double gamma, double h, double x_max) {
  const double d = k.support();
  const double q = kernel_q(k);
  const Taps taps = make_taps(k, h);
  const Grid g = Grid::half_line(d, round_up(x_max, h), h);
  auto z = [&](double x) { return std::pow(x + 2.0 * d, gamma); };
  LzCheck c;
  c.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    if (x < 0.0) continue;
    double lz = -z(x);
    for (std::ptrdiff_t kk = -static_cast<std::ptrdiff_t>(taps.m); kk <= static_cast<std::ptrdiff_t>(taps.m); ++kk)
      lz += taps[kk] * z(x - static_cast<double>(kk) * h);
    const double bound = -0.5 * q * gamma * (1.0 - gamma) * std::pow(x + 3.0 * d, gamma - 2.0);
    const double margin = lz - bound;
    if (margin > c.worst_margin) {
      c.worst_margin = margin;
      c.x_at_worst = x;
    }
    ++c.nodes;
  }
  c.holds = c.worst_margin <= 0.0;
  return c;
}

TStarSearch find_t_star(const Kernel& k, const PhiSolution& phi, const BarrierParams& p, double t_lo, double t_cap,
                        std::size_t samples) {
  p.validate(false);
  if (!(t_lo > 0.0) || t_cap < t_lo || samples < 2) throw std::invalid_argument("find_t_star: bad search range");
  TStarSearch out;
  out.t_cap = t_cap;
  const Grid& g = phi.field.grid;

  auto holds_at = [&](double t) {
    const OmegaProfile om = omega_for_halfline(k, g, t, p.mu * std::pow(t, p.beta));
    const auto plus = barrier_residual(k, phi, om, t, p, BarrierSign::plus);
    const auto minus = barrier_residual(k, phi, om, t, p, BarrierSign::minus);
    out.probed_t.push_back(t);
    out.probed_min_plus.push_back(plus.min_residual);
    out.probed_max_minus.push_back(minus.max_residual);
    return plus.min_residual >= 0.0 && minus.max_residual <= 0.0;
  };
  auto window_holds = [&](double t) {
    for (std::size_t j = 0; j < samples; ++j) {
      const double tj = t * std::pow(4.0, static_cast<double>(j) / static_cast<double>(samples - 1));
      if (!holds_at(tj)) return false;
    }
    return true;
  };

  double fail = 0.0;
  for (double t = t_lo; t <= t_cap * (1 + 1e-12); t *= std::sqrt(2.0)) {
    if (window_holds(t)) {
      double lo = fail > 0.0 ? fail : t;
      double hi = t;
      for (int it = 0; it < 6 && lo < hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (window_holds(mid)) hi = mid;
        else lo = mid;
      }
      out.found = true;
      out.t_star = hi;
      return out;
    }
    fail = t;
  }
  return out;
}

}  // namespace dipole
