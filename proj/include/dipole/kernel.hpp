#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dipole {

class Grid;
struct Field;

enum class KernelFamily { epanechnikov, biweight, smooth_bump, tabulated };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Compactly supported, even, nonincreasing-on-R+ probability density.
///
/// Instances are immutable and cheap to copy (tabulated data is shared).
class Kernel {
 public:
  static Kernel epanechnikov(double d);
  static Kernel biweight(double d);
  static Kernel smooth_bump(double d);
  /// Piecewise-linear kernel through the nodes (|z|, J). Nodes may be given
  /// on [0, d] or on [-d, d]; negative-z entries must mirror the positive ones.
  static Kernel tabulated(std::vector<double> z, std::vector<double> values);
  static Kernel from_csv(const std::string& path);

  double operator()(double z) const;

  KernelFamily family() const { return family_; }
  double support() const { return d_; }
  double max_value() const { return (*this)(0.0); }

  /// Abscissae on [0, d] where J or its low derivatives may jump.
  std::vector<double> breakpoints() const;

 private:
  struct Table {
    std::vector<double> z;  // ascending, z.front() == 0
    std::vector<double> j;
  };

  Kernel(KernelFamily family, double d) : family_(family), d_(d) {}

  KernelFamily family_;
  double d_;
  double bump_norm_ = 1.0;
  std::shared_ptr<const Table> table_;
};

struct KernelMoments {
  double mass;
  double q;           // half the second moment
  double second_raw;  // == 2 q
};

/// Quadrature of f(z) J(z) over [-d, d] using Gauss-Legendre panels split at
/// the kernel breakpoints.
template <class F>
double integrate_against(const Kernel& k, F&& f, std::size_t min_panels = 128);

double kernel_mass(const Kernel& k);
KernelMoments kernel_moments(const Kernel& k);

/// q = (1/2) * int J(z) z^2 dz. Throws if the kernel is not a unit-mass density.
double kernel_q(const Kernel& k);

/// Fourier transform int J(z) cos(xi z) dz.
double kernel_hat(const Kernel& k, double xi);

/// Checks support, symmetry, monotonicity, positivity and unit mass; returns
/// a list of violated invariants (empty when admissible).
std::vector<std::string> check_kernel_invariants(const Kernel& k, std::size_t samples = 2001);

/// Discrete convolution weights on a grid of spacing h with d = m h.
///
/// weights[k + m] ~ h J(k h), renormalized so that they sum to exactly one.
/// The renormalization is O(h^2) or smaller and makes the discrete operator
/// annihilate affine functions, which the conservation law depends on.
struct Taps {
  std::size_t m = 0;
  double h = 0.0;
  std::vector<double> weights;  // size 2 m + 1

  double operator[](std::ptrdiff_t k) const { return weights[static_cast<std::size_t>(k + static_cast<std::ptrdiff_t>(m))]; }
};

/// Builds the taps; throws if d is not an integer multiple of h.
Taps make_taps(const Kernel& k, double h);

/// J^{*n} sampled on a node-aligned grid covering [-n d, n d].
Field self_convolution(const Kernel& k, std::size_t n, const Grid& g);

}  // namespace dipole

#include "dipole/kernel_impl.hpp"
