#pragma once

#include <limits>
#include <vector>

#include "dipole/convolution.hpp"
#include "dipole/grid_field.hpp"
#include "dipole/kernel.hpp"

namespace dipole {

enum class EvolutionMode { halfline_dirichlet, cauchy };
enum class Integrator { rk4, exp_integrating_factor };

struct EvolutionConfig {
  EvolutionMode mode = EvolutionMode::halfline_dirichlet;
  double dt = 0.1;
  double t_final = 0.0;
  std::vector<double> snapshot_times;  // sorted, within [0, t_final]
  Integrator integrator = Integrator::rk4;
  ConvolutionMethod convolution = ConvolutionMethod::direct;
  /// Hard gate on max |u| within d of a domain edge; infinity disables it.
  double leak_tol = 1e-9;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

struct Snapshot {
  double t;
  Field u;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  EvolutionConfig config;
  double mass_leak_at_edge = 0.0;

  /// Snapshot recorded at time t (to 1e-9 relative); throws if absent.
  const Snapshot& at(double t) const;
};

/// Integrates u_t = J*u - u. In half-line mode the strip x < 0 is re-zeroed
/// after every stage.
Trajectory evolve(const Kernel& k, const Field& u0, const EvolutionConfig& cfg);

/// One step of the chosen integrator (exposed for order tests).
Field step(const Taps& taps, const Field& u, double dt, const EvolutionConfig& cfg);

enum class Pivot { origin, minus_d };

/// Odd reflection of half-line data onto a symmetric whole-line grid.
/// Requires a half-line (cell-centred) grid and u = 0 on x < 0.
Field antisym_extend(const Field& u, Pivot pivot, double d);

struct SandwichReport {
  double t0 = 0.0;
  double t_final = 0.0;
  double min_upper_gap = 0.0;  // min over x >= 0, sampled t of u+ - u
  double min_lower_gap = 0.0;  // min of u - u-
  double slack = 0.0;          // 5 h^2
  bool passed = false;
};

/// Evolves u on the half-line, builds u+ (pivot -d) and u- (pivot 0) from
/// u(t0) and checks u- <= u <= u+ on x >= 0 at the snapshot times of cfg
/// falling in [t0, t_final] (t0 and t_final are always included).
SandwichReport sandwich_check(const Kernel& k, const Field& u0, double t0, double t_final, const EvolutionConfig& cfg);

/// t_k = t0 2^{k/2} up to t_final (t_final appended if not hit).
std::vector<double> geometric_times(double t0, double t_final);

/// X_max = supp_right + 8 sqrt(q t_final) + 4 d, rounded up to a multiple of d.
double sized_domain(double supp_right, double q, double t_final, double d);

}  // namespace dipole
