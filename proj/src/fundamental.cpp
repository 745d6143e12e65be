#include "dipole/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "dipole/convolution.hpp"

namespace dipole {

namespace {

constexpr double kFourierFloor = 1e-14;
constexpr double kSeriesCrossover = 30.0;

// e^{-t}(e^{t Jhat} - 1 - t Jhat), the part of omega-hat left after removing e^{-t} t Jhat
double remainder_hat(double jhat, double t) {
  if (t <= kSeriesCrossover) return std::exp(-t) * (std::expm1(t * jhat) - t * jhat);
  return std::exp(t * (jhat - 1.0)) - std::exp(-t) * (1.0 + t * jhat);
}

}  // namespace

std::size_t series_terms_needed(const Kernel& k, double t, double tol) {
  if (!(t > 0.0)) throw std::invalid_argument("omega needs t > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double target = tol / k.max_value();
  // P(Poisson(t) > N) = P(N + 1, t), the regularised lower incomplete gamma,
  // decreasing in N; bracket then bisect
  auto tail = [&](std::size_t n) { return boost::math::gamma_p(static_cast<double>(n + 1), t); };
  if (tail(1) < target) return 1;
  std::size_t lo = 1, hi = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(t)));
  while (tail(hi) >= target) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (tail(mid) >= target ? lo : hi) = mid;
  }
  return hi;
}

OmegaProfile omega_series(const Kernel& k, const Grid& g, double t, double tol) {
  const std::size_t terms = series_terms_needed(k, t, tol);
  const double d = k.support();
  if (g.cell_centred_layout()) throw std::invalid_argument("omega_series needs a node-aligned grid");
  const double reach = static_cast<double>(terms) * d;
  if (g.x_min() > -reach + 1e-9 * g.h() || g.x_max() < reach - 1e-9 * g.h())
    throw std::invalid_argument("grid too narrow for the series truncation index");
  const Taps taps = make_taps(k, g.h());

  Field power(g);  // J^{*n}
  for (std::ptrdiff_t s = -static_cast<std::ptrdiff_t>(taps.m); s <= static_cast<std::ptrdiff_t>(taps.m); ++s)
    power.values[g.index_of(static_cast<double>(s) * g.h())] = taps[s] / g.h();
  OmegaProfile prof{Field(g), t, OmegaMethod::series, terms, 0.0, 0.0};
  double coef = std::exp(-t);
  for (std::size_t n = 1; n <= terms; ++n) {
    if (n > 1) power = convolve(taps, power, ConvolutionMethod::direct_serial);
    coef *= t / static_cast<double>(n);
    for (std::size_t i = 0; i < g.size(); ++i) prof.field.values[i] += coef * power.values[i];
  }
  return prof;
}

OmegaProfile omega_fourier(const Kernel& k, const Grid& g, double t, double xi_cutoff, double d_xi) {
  if (!(t > 0.0)) throw std::invalid_argument("omega needs t > 0");
  const double d = k.support();
  const double q = kernel_q(k);
  double reach = 0.0;
  for (double x : {g.x_min(), g.x_max()}) reach = std::max(reach, std::abs(x));

  if (d_xi <= 0.0) {
    // omega is negligible beyond R; keep the aliasing period above reach + R
    const double bennett = 15.0 * d + std::sqrt(225.0 * d * d + 180.0 * q * t);
    const double poisson = static_cast<double>(series_terms_needed(k, t, 1e-20)) * d;
    d_xi = 2.0 * std::numbers::pi / (reach + std::min(bennett, poisson));
  }
  auto integrand = [&](double xi) { return remainder_hat(kernel_hat(k, xi), t); };

  std::vector<double> samples;
  if (xi_cutoff > 0.0) {
    const auto count = static_cast<std::size_t>(std::ceil(xi_cutoff / d_xi - 1e-9));
    samples.resize(count + 1);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t j = 0; j <= static_cast<std::ptrdiff_t>(count); ++j) samples[static_cast<std::size_t>(j)] = integrand(static_cast<double>(j) * d_xi);
    if (std::abs(samples.back()) >= kFourierFloor) throw std::runtime_error("Fourier cutoff gate unmet: integrand at the cutoff exceeds 1e-14");
    xi_cutoff = static_cast<double>(count) * d_xi;
  } else {
    const double xi_max = 1e5 / d;
    std::size_t j = 0;
    for (;;) {
      const double xi = static_cast<double>(j) * d_xi;
      if (xi > xi_max) throw std::runtime_error("Fourier cutoff gate unmet below xi_max");
      const double v = integrand(xi);
      samples.push_back(v);
      if (j > 0 && std::abs(v) < kFourierFloor) {
        bool quiet = true;
        for (int p = 1; p <= 32 && quiet; ++p) quiet = std::abs(integrand(xi + p * std::numbers::pi / (32.0 * d))) < kFourierFloor;
        if (quiet) break;
      }
      ++j;
    }
    xi_cutoff = static_cast<double>(j) * d_xi;
  }

  OmegaProfile prof{Field(g), t, OmegaMethod::fourier, 0, xi_cutoff, d_xi};
  const std::size_t count = samples.size();
  const double single = std::exp(-t) * t;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(g.size()); ++i) {
    const double x = g.x(static_cast<std::size_t>(i));
    double sum = 0.5 * samples[0];
    for (std::size_t j = 1; j < count; ++j) sum += samples[j] * std::cos(static_cast<double>(j) * d_xi * x);
    prof.field.values[static_cast<std::size_t>(i)] = sum * d_xi / std::numbers::pi + single * k(x);
  }
  return prof;
}

OmegaProfile omega_profile(const Kernel& k, const Grid& g, double t) {
  if (t <= kSeriesCrossover && !g.cell_centred_layout()) {
    const double reach = static_cast<double>(series_terms_needed(k, t, 1e-14)) * k.support();
    if (g.x_min() <= -reach && g.x_max() >= reach) return omega_series(k, g, t);
  }
  return omega_fourier(k, g, t);
}

double gamma_q(double x, double t, double q) {
  if (!(t > 0.0) || !(q > 0.0)) throw std::invalid_argument("gamma_q needs t > 0 and q > 0");
  return std::exp(-x * x / (4.0 * q * t)) / std::sqrt(4.0 * std::numbers::pi * q * t);
}

double dipole_q(double x, double t, double q) { return -x / (2.0 * q * t) * gamma_q(x, t, q); }

OmegaTailReport omega_tail_check(const OmegaProfile& prof, const Kernel& k, double x0) {
  const Field& w = prof.field;
  OmegaTailReport rep;
  rep.x0 = x0 >= 0.0 ? x0 : k.support();
  rep.min_value = *std::min_element(w.values.begin(), w.values.end());
  rep.nonnegative = rep.min_value >= -1e-12;
  if (prof.method == OmegaMethod::series) {
    const double reach = static_cast<double>(prof.terms_used) * k.support();
    for (std::size_t i = 0; i < w.size(); ++i)
      if (std::abs(w.x(i)) > reach + 1e-9 * w.grid.h() && w.values[i] != 0.0) rep.zero_beyond_support = false;
  }
  for (std::size_t i = 1; i + 1 < w.size(); ++i) {
    if (std::abs(w.x(i)) < rep.x0) continue;
    const double a = w.values[i - 1], b = w.values[i], c = w.values[i + 1];
    if (std::min({a, b, c}) < 1e-13) continue;
    ++rep.tail_nodes;
    if (std::log(a) - 2.0 * std::log(b) + std::log(c) > 1e-9) ++rep.concavity_violations;
  }
  return rep;
}

Field semigroup_apply(const OmegaProfile& omega, const Field& u0) {
  const Grid& g = u0.grid;
  if (std::abs(g.h() - omega.field.grid.h()) > 1e-12 * g.h()) throw std::invalid_argument("semigroup_apply: spacing mismatch");
  const double decay = std::exp(-omega.t);
  Field out(g);
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < g.size(); ++j)
    if (u0.values[j] != 0.0) support.push_back(j);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(g.size()); ++i) {
    const double x = g.x(static_cast<std::size_t>(i));
    double sum = 0.0;
    for (std::size_t j : support) sum += g.weight(j) * u0.values[j] * omega.field.at_node(x - g.x(j));
    out.values[static_cast<std::size_t>(i)] = decay * u0.values[static_cast<std::size_t>(i)] + sum;
  }
  return out;
}

}  // namespace dipole
