#pragma once

#include <map>
#include <string>
#include <vector>

#include "dipole/evolution.hpp"
#include "dipole/fundamental.hpp"
#include "dipole/stationary.hpp"

namespace dipole {

struct MomentaRecord {
  double t;
  double M;
  double M1;
  double M2;
  double M_phi;
};

std::vector<MomentaRecord> momenta_series(const Trajectory& traj, const PhiSolution& phi);

/// M1* = int u0 phi.
double mstar(const Field& u0, const PhiSolution& phi);

/// t max_{x>=0} |u + 2 M1* D_q|.
double outer_error(const Field& u, double t, double m1star, double q);

/// max_{x>=0} t^{3/2}/(x+1) |u - M1* phi Gamma_q / (q t)|; the product
/// phi(x)/x * D_q is never formed.
double global_error(const Field& u, double t, double m1star, double q, const PhiSolution& phi);

/// max over 0 <= x <= mu t^beta of t^{3/2}/(x+1) |u - M1* phi omega / (q t)|.
double inner_error(const Field& u, double t, double m1star, double q, const PhiSolution& phi, const OmegaProfile& omega,
                   double mu, double beta);

struct RatioRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t nodes = 0;
};

/// Range of u q t / (M1* phi omega) over nodes in [x_lo, x_hi].
RatioRange inner_ratio(const Field& u, double t, double m1star, double q, const PhiSolution& phi, const OmegaProfile& omega,
                       double x_lo, double x_hi);

struct RateFit {
  double slope = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log(value) against log(t) over t in [t_lo, t_hi].
RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& values, double t_lo, double t_hi);

struct AsymptoticReport {
  std::vector<double> times;
  std::vector<double> E_outer;
  std::vector<double> E_global;
  std::vector<double> E_inner;
  std::map<std::string, RateFit> fitted_exponents;
};

struct ReportOptions {
  double mu = 1.0;
  double beta = 0.3;
  double fit_lo = 256.0;
  double fit_hi = 4096.0;
};

/// Evaluates every functional at each snapshot with t > 0 and fits the decay
/// exponents of M, |M1 - M1*|, M2 and the three errors over the fit window.
AsymptoticReport asymptotic_report(const Kernel& k, const Trajectory& traj, const PhiSolution& phi, double m1star,
                                   const ReportOptions& opts = {});

/// omega(., t) on a symmetric grid aligned with the half-line grid g, wide
/// enough to apply L at every node of [0, x_hi].
OmegaProfile omega_for_halfline(const Kernel& k, const Grid& g, double t, double x_hi);

struct BarrierParams {
  double kappa = 0.1;
  double gamma = 0.9;
  double beta = 0.3;
  double mu = 1.0;
  double K = 1.0;

  /// (1 - kappa) / (2 (2 - gamma)).
  double beta_bound() const;
  /// Throws std::invalid_argument listing every violated constraint.
  void validate(bool inner_matching = true) const;
};

enum class BarrierSign { plus, minus };

struct BarrierResidual {
  double min_residual = 0.0;
  double max_residual = 0.0;
  double x_at_min = 0.0;
  double x_at_max = 0.0;
  double x_hi = 0.0;  // mu t^beta
  std::size_t nodes = 0;
};

/// Extremes of d_t v - L v over nodes 0 <= x <= mu t^beta, where
/// v = phi omega / t +/- K t^{-(3 + kappa)/2} (x + 2d)^gamma and d_t omega
/// is replaced by L omega + e^{-t} J.
BarrierResidual barrier_residual(const Kernel& k, const PhiSolution& phi, const OmegaProfile& omega, double t,
                                 const BarrierParams& p, BarrierSign sign);

struct LzCheck {
  double worst_margin = 0.0;  // max of Lz - bound; <= 0 when the bound holds
  double x_at_worst = 0.0;
  std::size_t nodes = 0;
  bool holds = false;
};

/// Lz <= -(q gamma (1 - gamma) / 2)(x + 3d)^{gamma - 2} at nodes of [0, x_max].
LzCheck lz_bound_check(const Kernel& k, double gamma, double h, double x_max);

struct TStarSearch {
  bool found = false;
  double t_star = 0.0;
  double t_cap = 0.0;
  std::vector<double> probed_t;
  std::vector<double> probed_min_plus;
  std::vector<double> probed_max_minus;
};

/// Smallest t (up to t_cap, located by a geometric scan and bisection on
/// log t) such that both barrier inequalities hold at `samples` geometric
/// times in [t, 4t].
TStarSearch find_t_star(const Kernel& k, const PhiSolution& phi, const BarrierParams& p, double t_lo, double t_cap,
                        std::size_t samples = 5);

}  // namespace dipole
