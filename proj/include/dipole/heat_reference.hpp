#pragma once

#include <vector>

#include "dipole/grid_field.hpp"

namespace dipole {

/// Half-line heat equation u_t = c u_xx, u(0, t) = 0, solved by the method of
/// images. u0 is read on the nodes of its grid with x > 0.
struct HeatSolution {
  Field u0;
  double diffusivity = 1.0;
};

/// sum_j w_j u0(y_j) (G(x - y_j, t) - G(x + y_j, t)) with the Gaussian G of variance 2 c t.
double heat_eval(const HeatSolution& hs, double x, double t);

/// First moment of u(., t) by composite Gauss-Legendre quadrature in x.
double heat_first_moment(const HeatSolution& hs, double t);

/// First moment of the (discrete) initial data; the conserved value.
double heat_initial_first_moment(const HeatSolution& hs);

struct HeatDipoleError {
  double weighted = 0.0;    // max t^{3/2}/(x+1) |u + 2 M1* D|
  double unweighted = 0.0;  // t^{3/2} max |u + 2 M1* D|
  double x_at_max = 0.0;
  bool out_of_theorem = false;  // M1* == 0: no dipole limit is asserted
};

/// Evaluated on `nodes` equispaced points of [0, supp u0 + 12 sqrt(c t)].
HeatDipoleError heat_dipole_error(const HeatSolution& hs, double t, double m1star, std::size_t nodes = 2001);

/// (m / (2 sqrt(pi))) x / (x + 1).
double v_infinity(double x, double m1star);

struct HeatBarrierCheck {
  double kappa = 0.1;
  double gamma = 0.9;
  double K = 1.0;
  double mu_star = 0.0;
  std::size_t points = 0;
  std::size_t plus_violations = 0;   // residual of v+ < 0
  std::size_t minus_violations = 0;  // residual of v- > 0
  double min_plus = 0.0;
  double max_minus = 0.0;
  bool passed = false;
};

/// Closed-form sign check of d_t v - v_xx for v = -D +/- K t^{-(3+kappa)/2}(x+1)^gamma
/// on an nx by nt lattice with 0 < x < mu* sqrt(t) and t from 1/mu*^2 to 1e4/mu*^2.
HeatBarrierCheck heat_barrier_check(double kappa, double gamma, double K, std::size_t nx = 100, std::size_t nt = 100);

}  // namespace dipole
