#pragma once

#include <cstddef>

#include "dipole/grid_field.hpp"
#include "dipole/kernel.hpp"

namespace dipole {

enum class OmegaMethod { series, fourier };

/// Regular part of the whole-line fundamental solution, e^{-t} delta + omega.
struct OmegaProfile {
  Field field;
  double t = 0.0;
  OmegaMethod method = OmegaMethod::series;
  std::size_t terms_used = 0;  // series
  double xi_cutoff = 0.0;      // fourier
  double d_xi = 0.0;           // fourier
};

/// Smallest N with e^{-t} sum_{n>N} t^n / n! < tol / max J.
std::size_t series_terms_needed(const Kernel& k, double t, double tol);

/// e^{-t} sum_{n>=1} t^n J^{*n} / n! on a node-aligned grid covering [-N d, N d].
OmegaProfile omega_series(const Kernel& k, const Grid& g, double t, double tol = 1e-14);

/// Inverse cosine transform of e^{-t}(e^{t Jhat} - 1). The e^{-t} t J part is
/// added in closed form and only the remainder is integrated. Nonpositive
/// xi_cutoff / d_xi select them automatically.
OmegaProfile omega_fourier(const Kernel& k, const Grid& g, double t, double xi_cutoff = 0.0, double d_xi = 0.0);

/// Series for t <= 30 when the grid allows it, Fourier otherwise.
OmegaProfile omega_profile(const Kernel& k, const Grid& g, double t);

double gamma_q(double x, double t, double q);
double dipole_q(double x, double t, double q);

struct OmegaTailReport {
  double min_value = 0.0;
  bool nonnegative = true;            // omega >= -1e-12
  bool zero_beyond_support = true;    // series only: omega == 0 for |x| > N d
  std::size_t tail_nodes = 0;         // nodes tested for concavity of log omega
  std::size_t concavity_violations = 0;
  double x0 = 0.0;
};

/// Qualitative tail check: log omega concave on |x| >= x0 above the 1e-13 floor.
OmegaTailReport omega_tail_check(const OmegaProfile& prof, const Kernel& k, double x0 = -1.0);

/// e^{-t} u0 + omega * u0 on the grid of u0 (same spacing as omega).
Field semigroup_apply(const OmegaProfile& omega, const Field& u0);

}  // namespace dipole
