#include "dipole/stationary.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "dipole/convolution.hpp"

namespace dipole {

namespace {

void require_covering_grid(const Grid& g, double d, double n) {
  if (!g.cell_centred_layout()) throw std::invalid_argument("stationary solver needs a half-line (cell-centred) grid");
  if (g.lower_edge() > -d + 1e-9 * g.h() || g.upper_edge() < n + d - 1e-9 * g.h()) throw std::invalid_argument("grid must cover [-d, n + d]");
  const double cells = n / g.h();
  if (std::abs(cells - std::round(cells)) > 1e-9) throw std::invalid_argument("truncation level n must be a multiple of h");
}

enum class NodeRole { exterior, unknown, pinned };

NodeRole role_of(double x, double n) {
  if (x < 0.0) return NodeRole::exterior;
  if (x < n) return NodeRole::unknown;
  return NodeRole::pinned;
}

// Solves (I - W) phi = far-field forcing on the unknown nodes of P_n, once per
// requested far-field offset, sharing one banded LU factorisation.
std::vector<Field> solve_truncated(const Taps& taps, double n, const Grid& g, const std::vector<double>& offsets) {
  const std::size_t m = taps.m;
  std::vector<std::size_t> unknown;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (role_of(g.x(i), n) == NodeRole::unknown) unknown.push_back(i);
  const std::size_t nu = unknown.size();
  if (nu == 0) throw std::invalid_argument("truncated problem has no unknowns");
  const std::size_t first = unknown.front();

  const auto kl = static_cast<lapack_int>(m);
  const auto ku = static_cast<lapack_int>(m);
  const auto ldab = 2 * kl + ku + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * nu, 0.0);
  // column-major band storage: A(r, c) at ab[(kl + ku + r - c) + c * ldab]
  auto at = [&](std::size_t r, std::size_t c) -> double& {
    return ab[static_cast<std::size_t>(kl + ku) + r - c + c * static_cast<std::size_t>(ldab)];
  };
  for (std::size_t r = 0; r < nu; ++r) {
    const std::size_t lo = r >= m ? r - m : 0;
    const std::size_t hi = std::min(nu - 1, r + m);
    for (std::size_t c = lo; c <= hi; ++c) {
      const auto k = static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(c);
      at(r, c) = (r == c ? 1.0 : 0.0) - taps[k];
    }
  }

  // Unknowns are r = phi - x. Since the taps annihilate affine functions,
  // (I - W) r = sum_pinned w_k offset - sum_exterior w_k x_j, an O(1) forcing
  // confined to the two ends of the interval.
  const auto nrhs = static_cast<lapack_int>(offsets.size());
  std::vector<double> b(nu * offsets.size(), 0.0);
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    for (std::size_t r = 0; r < nu; ++r) {
      const std::size_t i = unknown[r];
      double sum = 0.0;
      for (std::ptrdiff_t k = -static_cast<std::ptrdiff_t>(m); k <= static_cast<std::ptrdiff_t>(m); ++k) {
        const auto j = static_cast<std::ptrdiff_t>(i) - k;
        const double xj = g.x_min() + g.h() * static_cast<double>(j);
        switch (role_of(xj, n)) {
          case NodeRole::pinned: sum += taps[k] * offsets[s]; break;
          case NodeRole::exterior: sum -= taps[k] * xj; break;
          case NodeRole::unknown: break;
        }
      }
      b[s * nu + r] = sum;
    }
  }
  std::vector<double> rhs = b;

  std::vector<lapack_int> ipiv(nu);
  const auto nn = static_cast<lapack_int>(nu);
  lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, nn, nn, kl, ku, ab.data(), ldab, ipiv.data());
  if (info != 0) throw std::runtime_error("banded factorisation of the stationary problem failed");
  info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', nn, kl, ku, nrhs, ab.data(), ldab, ipiv.data(), b.data(), nn);
  if (info != 0) throw std::runtime_error("banded solve of the stationary problem failed");

  // one step of iterative refinement with the residual accumulated in long double
  std::vector<double> corr(b.size());
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    for (std::size_t r = 0; r < nu; ++r) {
      long double res = rhs[s * nu + r];
      const std::size_t lo = r >= m ? r - m : 0;
      const std::size_t hi = std::min(nu - 1, r + m);
      for (std::size_t c = lo; c <= hi; ++c) {
        const auto k = static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(c);
        const long double a = (r == c ? 1.0L : 0.0L) - static_cast<long double>(taps[k]);
        res -= a * static_cast<long double>(b[s * nu + c]);
      }
      corr[s * nu + r] = static_cast<double>(res);
    }
  }
  info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', nn, kl, ku, nrhs, ab.data(), ldab, ipiv.data(), corr.data(), nn);
  if (info != 0) throw std::runtime_error("banded refinement of the stationary problem failed");

  std::vector<Field> out;
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    Field phi(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      switch (role_of(g.x(i), n)) {
        case NodeRole::exterior: phi.values[i] = 0.0; break;
        case NodeRole::pinned: phi.values[i] = g.x(i) + offsets[s]; break;
        case NodeRole::unknown: {
          const std::size_t r = i - first;
          phi.values[i] = g.x(i) + (b[s * nu + r] + corr[s * nu + r]);
          break;
        }
      }
    }
    out.push_back(std::move(phi));
  }
  return out;
}

}  // namespace

Field apply_T(const Taps& taps, const Field& phi, double n, double boundary_offset) {
  Field src = phi;
  for (std::size_t i = 0; i < src.size(); ++i) {
    switch (role_of(src.x(i), n)) {
      case NodeRole::exterior: src.values[i] = 0.0; break;
      case NodeRole::pinned: src.values[i] = src.x(i) + boundary_offset; break;
      case NodeRole::unknown: break;
    }
  }
  src.extension = Extension::zero;
  Field out = convolve(taps, src, ConvolutionMethod::direct);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (role_of(out.x(i), n) != NodeRole::unknown) out.values[i] = src.values[i];
  return out;
}

FixedPointTrace iterate_T(const Kernel& k, double n, const Grid& g, double tol, std::size_t max_iter, double boundary_offset) {
  require_covering_grid(g, k.support(), n);
  const Taps taps = make_taps(k, g.h());
  FixedPointTrace trace;
  trace.result = Field::sample(g, [](double x) { return std::max(x, 0.0); });
  trace.result = apply_T(taps, trace.result, n, boundary_offset);  // fixes exterior/pinned nodes
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Field next = apply_T(taps, trace.result, n, boundary_offset);
    double step = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double diff = next.values[i] - trace.result.values[i];
      if (diff < -1e-13 * std::max(1.0, std::abs(next.values[i]))) trace.monotone = false;
      step = std::max(step, std::abs(diff));
    }
    trace.result = std::move(next);
    trace.iterations = it;
    if (step < tol) return trace;
  }
  throw std::runtime_error("fixed-point iteration for phi_n did not converge");
}

Field solve_phi_n(const Kernel& k, double n, const Grid& g, double tol, const PhiOptions& opts) {
  require_covering_grid(g, k.support(), n);
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (opts.method == PhiMethod::fixed_point) return iterate_T(k, n, g, tol, opts.max_iter, opts.boundary_offset).result;
  const Taps taps = make_taps(k, g.h());
  Field phi = std::move(solve_truncated(taps, n, g, {opts.boundary_offset}).front());
  // the direct solution must be a fixed point of T to the requested tolerance
  const Field check = apply_T(taps, phi, n, opts.boundary_offset);
  if (sup_distance(check, phi) > std::max(tol, 1e-12 * (n + k.support()))) throw std::runtime_error("direct solution of P_n is not a fixed point of T");
  return phi;
}

PhiSolution solve_phi(const Kernel& k, double x_max, double h, double tol) {
  const double d = k.support();
  if (x_max < 10.0 * d) throw std::invalid_argument("solve_phi needs X_max >= 10 d");
  const Taps taps = make_taps(k, h);
  const Grid target = Grid::half_line(d, x_max, h);

  PhiSolution sol;
  Field previous;
  for (int level = 0; level < 8; ++level) {
    const double n = x_max * std::pow(2.0, level);
    const Grid g = Grid::half_line(d, n + d, h);
    // phi_n with far-field data x + c is affine in c; pick the c for which the
    // solution continues the far-field data without a jump at x = n.
    auto sols = solve_truncated(taps, n, g, {0.0, 1.0});
    const Field& base = sols[0];
    std::size_t last = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (role_of(g.x(i), n) == NodeRole::unknown) last = i;
    const double xl = g.x(last);
    const double slope = sols[1].values[last] - base.values[last];
    const double c = (base.values[last] - xl) / (1.0 - slope);
    Field phi(g);
    for (std::size_t i = 0; i < g.size(); ++i) phi.values[i] = base.values[i] + c * (sols[1].values[i] - base.values[i]);
    sol.iterations += 1;

    Field restricted = resample_aligned(phi, target);
    restricted.extension = Extension::linear_slope_one;
    restricted.extension_offset = restricted.values.back() - target.x_max();
    sol.offsets_by_level.push_back(restricted.extension_offset);
    if (level > 0) {
      double diff = 0.0;
      for (std::size_t i = 0; i < target.size(); ++i)
        if (target.x(i) >= 0.0) diff = std::max(diff, std::abs(restricted.values[i] - previous.values[i]));
      if (diff < tol) {
        sol.field = std::move(restricted);
        sol.offset_at_edge = sol.field.extension_offset;
        sol.n_used = n;
        return sol;
      }
    }
    previous = std::move(restricted);
  }
  throw std::runtime_error("stationary solution did not converge in the truncation level");
}

double residual_L(const Kernel& k, const Field& psi) {
  const Field lphi = apply_L(k, psi);
  const double hi = psi.grid.upper_edge() - k.support();
  double r = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double x = psi.x(i);
    if (x >= 0.0 && x <= hi + 1e-12) r = std::max(r, std::abs(lphi.values[i]));
  }
  return r;
}

double residual_L(const Kernel& k, const PhiSolution& phi) { return residual_L(k, phi.field); }

double uniqueness_c0(const Kernel& k) {
  using boost::math::quadrature::gauss;
  const double d = k.support();
  auto tail = [&](double w) {
    double s = 0.0;
    const std::size_t panels = 16;
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = w + (d - w) * static_cast<double>(p) / panels;
      const double b = w + (d - w) * static_cast<double>(p + 1) / panels;
      s += gauss<double, 10>::integrate([&](double z) { return k(z); }, a, b);
    }
    return s;
  };
  double total = 0.0;
  const std::size_t panels = 64;
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = d * static_cast<double>(p) / panels;
    const double b = d * static_cast<double>(p + 1) / panels;
    total += gauss<double, 10>::integrate([&](double w) { return w * tail(w); }, a, b);
  }
  return 2.0 * total;
}

UniquenessDiagnostic uniqueness_diagnostic_F(const Kernel& k, const Field& psi) {
  const Taps taps = make_taps(k, psi.grid.h());
  const std::size_t m = taps.m;
  const double h = psi.grid.h();
  // first differences D_k = h sum_{j>k} w_j, then H_k = sum_{j>=k} D_j
  std::vector<double> D(m, 0.0), H(m + 1, 0.0);
  for (std::size_t kk = m; kk-- > 0;) D[kk] = (kk + 1 < m ? D[kk + 1] : 0.0) + h * taps[static_cast<std::ptrdiff_t>(kk + 1)];
  for (std::size_t kk = m; kk-- > 0;) H[kk] = H[kk + 1] + D[kk];
  std::vector<double> stencil(2 * m + 1);
  double total = 0.0;
  for (std::size_t s = 0; s <= 2 * m; ++s) {
    const auto off = static_cast<std::ptrdiff_t>(s) - static_cast<std::ptrdiff_t>(m);
    stencil[s] = H[static_cast<std::size_t>(std::abs(off))];
    total += stencil[s];
  }
  for (auto& w : stencil) w /= total;

  const auto padded = pad_for_convolution(psi, m);
  std::vector<double> all(psi.size());
  stencil_serial(stencil, padded, all);

  const std::size_t lo = m;
  const std::size_t hi = psi.extension == Extension::linear_slope_one ? psi.size() : psi.size() - m;
  if (hi <= lo + 1) throw std::invalid_argument("uniqueness diagnostic: domain shorter than 2 d");
  const Grid sub(psi.grid.x(lo), h, hi - lo);
  Field F(sub, std::vector<double>(all.begin() + static_cast<std::ptrdiff_t>(lo), all.begin() + static_cast<std::ptrdiff_t>(hi)));
  return {std::move(F), h * total, uniqueness_c0(k)};
}

double affine_deviation(const Field& F, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double x = F.x(i);
    if (x < lo || x > hi) continue;
    sx += x;
    sy += F.values[i];
    sxx += x * x;
    sxy += x * F.values[i];
    cnt += 1;
  }
  if (cnt < 3) throw std::invalid_argument("affine_deviation: fewer than three nodes in range");
  const double xbar = sx / cnt, ybar = sy / cnt;
  const double slope = (sxy - cnt * xbar * ybar) / (sxx - cnt * xbar * xbar);
  const double icpt = ybar - slope * xbar;
  double dev = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double x = F.x(i);
    if (x < lo || x > hi) continue;
    dev = std::max(dev, std::abs(F.values[i] - (icpt + slope * x)));
  }
  return dev;
}

}  // namespace dipole
