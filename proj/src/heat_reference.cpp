#include "dipole/heat_reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "dipole/fundamental.hpp"

namespace dipole {

namespace {

double gauss_kernel(double x, double t, double c) { return gamma_q(x, t, c); }

double support_right(const Field& u0) {
  double s = 0.0;
  for (std::size_t i = 0; i < u0.size(); ++i)
    if (u0.values[i] != 0.0) s = u0.x(i);
  return s + u0.grid.h();
}

}  // namespace

double heat_eval(const HeatSolution& hs, double x, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_eval needs t > 0");
  const Field& u0 = hs.u0;
  double sum = 0.0;
  for (std::size_t j = 0; j < u0.size(); ++j) {
    const double y = u0.x(j);
    const double w = u0.grid.weight(j, 0.0);
    if (y <= 0.0 || w == 0.0 || u0.values[j] == 0.0) continue;
    sum += w * u0.values[j] * (gauss_kernel(x - y, t, hs.diffusivity) - gauss_kernel(x + y, t, hs.diffusivity));
  }
  return sum;
}

double heat_initial_first_moment(const HeatSolution& hs) {
  double s = 0.0;
  for (std::size_t j = 0; j < hs.u0.size(); ++j) {
    const double y = hs.u0.x(j);
    if (y > 0.0) s += hs.u0.grid.weight(j, 0.0) * hs.u0.values[j] * y;
  }
  return s;
}

double heat_first_moment(const HeatSolution& hs, double t) {
  using boost::math::quadrature::gauss;
  const double top = support_right(hs.u0) + 14.0 * std::sqrt(hs.diffusivity * t);
  const double panel = std::max(0.05, 0.25 * std::sqrt(hs.diffusivity * t)) / 4.0;
  const auto panels = static_cast<std::size_t>(std::ceil(top / panel));
  double s = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = top * static_cast<double>(p) / static_cast<double>(panels);
    const double b = top * static_cast<double>(p + 1) / static_cast<double>(panels);
    s += gauss<double, 15>::integrate([&](double x) { return x * heat_eval(hs, x, t); }, a, b);
  }
  return s;
}

HeatDipoleError heat_dipole_error(const HeatSolution& hs, double t, double m1star, std::size_t nodes) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_dipole_error needs t > 0");
  if (nodes < 2) throw std::invalid_argument("heat_dipole_error needs at least two nodes");
  const double top = support_right(hs.u0) + 12.0 * std::sqrt(hs.diffusivity * t);
  const double scale = std::pow(t, 1.5);
  HeatDipoleError e;
  e.out_of_theorem = m1star == 0.0;
  double plain = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const double x = top * static_cast<double>(i) / static_cast<double>(nodes - 1);
    const double diff = std::abs(heat_eval(hs, x, t) + 2.0 * m1star * dipole_q(x, t, hs.diffusivity));
    const double w = scale / (x + 1.0) * diff;
    if (w > e.weighted) {
      e.weighted = w;
      e.x_at_max = x;
    }
    plain = std::max(plain, diff);
  }
  e.unweighted = scale * plain;
  return e;
}

double v_infinity(double x, double m1star) {
  if (x < 0.0) throw std::invalid_argument("v_infinity needs x >= 0");
  return m1star / (2.0 * std::sqrt(std::numbers::pi)) * x / (x + 1.0);
}

HeatBarrierCheck heat_barrier_check(double kappa, double gamma, double K, std::size_t nx, std::size_t nt) {
  if (!(kappa > 0.0 && kappa < 1.0) || !(gamma > 0.0 && gamma < 1.0) || !(K >= 1.0)) throw std::invalid_argument("heat_barrier_check: inadmissible parameters");
  if (nx < 1 || nt < 2) throw std::invalid_argument("heat_barrier_check: lattice too small");
  HeatBarrierCheck c;
  c.kappa = kappa;
  c.gamma = gamma;
  c.K = K;
  c.mu_star = std::sqrt(gamma * (1.0 - gamma) / (2.0 * (3.0 + kappa)));
  const double a = 0.5 * (3.0 + kappa);
  const double t_min = 1.0 / (c.mu_star * c.mu_star);
  c.min_plus = std::numeric_limits<double>::infinity();
  c.max_minus = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < nt; ++it) {
    // open at the lower end: t = 1/mu*^2 makes the margin vanish at x -> 0
    const double t = t_min * std::pow(1e4, static_cast<double>(it + 1) / static_cast<double>(nt));
    const double G = gamma_q(0.0, t, 1.0);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double x = c.mu_star * std::sqrt(t) * static_cast<double>(ix + 1) / static_cast<double>(nx + 1);
      const double g = G * std::exp(-x * x / (4.0 * t));
      // D = Gamma_x; D_t from the t-derivative of -x Gamma / (2t), D_xx = Gamma_xxx
      const double d_t = g * (3.0 * x / (4.0 * t * t) - x * x * x / (8.0 * t * t * t));
      const double d_xx = g * (-x * x * x / (8.0 * t * t * t) + 3.0 * x / (4.0 * t * t));
      const double zt = -a * std::pow(t, -a - 1.0) * std::pow(x + 1.0, gamma);
      const double zxx = std::pow(t, -a) * gamma * (gamma - 1.0) * std::pow(x + 1.0, gamma - 2.0);
      const double plus = -(d_t - d_xx) + K * (zt - zxx);
      const double minus = -(d_t - d_xx) - K * (zt - zxx);
      c.min_plus = std::min(c.min_plus, plus);
      c.max_minus = std::max(c.max_minus, minus);
      if (plus < 0.0) ++c.plus_violations;
      if (minus > 0.0) ++c.minus_violations;
      ++c.points;
    }
  }
  c.passed = c.plus_violations == 0 && c.minus_violations == 0;
  return c;
}

}  // namespace dipole
