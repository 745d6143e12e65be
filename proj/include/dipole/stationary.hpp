#pragma once

#include <cstddef>
#include <vector>

#include "dipole/grid_field.hpp"
#include "dipole/kernel.hpp"

namespace dipole {

/// Stationary profile phi: J*phi = phi on x >= 0, phi = 0 on (-d, 0),
/// phi(x) - x bounded. Stored on the half-line grid [-d, X_max] and continued
/// as x + offset_at_edge beyond it.
struct PhiSolution {
  Field field;
  double offset_at_edge = 0.0;
  double n_used = 0.0;
  std::size_t iterations = 0;
  std::vector<double> offsets_by_level;  // offset_at_edge for each truncation level tried
};

enum class PhiMethod {
  banded_direct,  // solve the truncated fixed-point equation exactly
  fixed_point,    // iterate T from max(x, 0)
};

struct PhiOptions {
  PhiMethod method = PhiMethod::banded_direct;
  std::size_t max_iter = 200000;
  /// Far-field data on (n, n + d): phi = x + boundary_offset.
  double boundary_offset = 0.0;
};

struct FixedPointTrace {
  Field result;
  std::size_t iterations = 0;
  bool monotone = true;  // every iterate >= the previous one, nodewise
};

/// The map T of the truncated problem: integral over [0, n] of J(x-y) phi(y)
/// plus the far-field contribution of (x + offset) on (n, n + d). Nodes with
/// x > n are pinned to the far-field data.
Field apply_T(const Taps& taps, const Field& phi, double n, double boundary_offset = 0.0);

/// Fixed-point iteration of T from max(x, 0) until the sup-norm step < tol.
FixedPointTrace iterate_T(const Kernel& k, double n, const Grid& g, double tol, std::size_t max_iter,
                          double boundary_offset = 0.0);

/// Solution of the truncated problem P_n on a half-line grid covering [-d, n + d].
Field solve_phi_n(const Kernel& k, double n, const Grid& g, double tol, const PhiOptions& opts = {});

/// phi on [-d, x_max] with cell width h.
PhiSolution solve_phi(const Kernel& k, double x_max, double h, double tol = 1e-10);

/// sup over nodes in [0, X_max - d] of |J*phi - phi|.
double residual_L(const Kernel& k, const PhiSolution& phi);
double residual_L(const Kernel& k, const Field& psi);

struct UniquenessDiagnostic {
  Field F;          // on the admissible nodes
  double c0;        // normalising constant from the discrete double average
  double c0_nested; // the same constant by nested quadrature of the kernel
};

/// F(x) = (1/C0) int_0^d int_{x-w}^{x+w} psi(y) int_w^d J(z) dz dy dw,
/// realised as a convolution of psi with the discrete double antiderivative
/// of J - delta; its second difference equals h^2 (L psi) / C0 exactly.
UniquenessDiagnostic uniqueness_diagnostic_F(const Kernel& k, const Field& psi);

/// C0 = 2 int_0^d w int_w^d J(z) dz dw by nested Gauss quadrature.
double uniqueness_c0(const Kernel& k);

/// Largest deviation of F from its least-squares affine fit over [lo, hi].
double affine_deviation(const Field& F, double lo, double hi);

}  // namespace dipole
