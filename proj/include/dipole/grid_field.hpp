#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dipole {

/// Uniform 1-D grid x_i = x_min + i h, i = 0 .. n-1.
///
/// Two layouts are used. Node-aligned grids have x = 0 (and every integer
/// multiple of h) as a node and integrate with the trapezoid rule.
/// Cell-centred grids have nodes at (j + 1/2) h; they integrate with the
/// midpoint rule and are used for half-line fields, so that no node sits on
/// the jump at x = 0 and reflections about 0 and -d map nodes onto nodes.
class Grid {
 public:
  Grid() = default;
  Grid(double x_min, double h, std::size_t n);

  /// Node-aligned grid over [lo, hi]; both endpoints must be multiples of h.
  static Grid node_aligned(double lo, double hi, double h);
  /// Cell-centred grid whose cells tile [lo, hi] exactly.
  static Grid cell_centred(double lo, double hi, double h);
  /// Half-line layout: cells tile [-d, x_max].
  static Grid half_line(double d, double x_max, double h) { return cell_centred(-d, x_max, h); }

  double x_min() const { return x_min_; }
  double x_max() const { return x_min_ + h_ * static_cast<double>(n_ - 1); }
  double h() const { return h_; }
  std::size_t size() const { return n_; }
  double x(std::size_t i) const { return x_min_ + h_ * static_cast<double>(i); }
  bool cell_centred_layout() const;

  /// Lower edge of the covered interval (x_min - h/2 for cell-centred grids).
  double lower_edge() const;
  double upper_edge() const;

  /// Quadrature weight of node i for integrals over [max(lower, lower_edge), upper_edge].
  double weight(std::size_t i, double lower = -1e300) const;

  /// Index of the node at x; throws unless x is a node (to 1e-9 h).
  std::size_t index_of(double x) const;
  /// True if the two grids share spacing and node lattice.
  bool aligned_with(const Grid& other) const;

  /// Number of kernel steps m with d = m h; throws if not integral.
  std::size_t steps_per(double d) const;

  bool operator==(const Grid& other) const;

 private:
  double x_min_ = 0.0;
  double h_ = 1.0;
  std::size_t n_ = 0;
};

/// Behaviour of a field to the right of x_max.
enum class Extension { zero, linear_slope_one };

/// Sampled function with its extension rule. Values left of x_min are zero.
struct Field {
  Grid grid;
  std::vector<double> values;
  Extension extension = Extension::zero;
  /// For linear_slope_one: u(x) = x + extension_offset beyond x_max.
  double extension_offset = 0.0;

  Field() = default;
  explicit Field(Grid g) : grid(g), values(g.size(), 0.0) {}
  Field(Grid g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return grid.x(i); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  /// Value at an arbitrary lattice point, honouring the extension rule.
  double at_node(double x) const;

  template <class F>
  static Field sample(const Grid& g, F&& f) {
    Field out(g);
    for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = f(g.x(i));
    return out;
  }
};

/// Restriction/extension of a field onto an aligned grid.
Field resample_aligned(const Field& u, const Grid& target);

/// Sets every node with x < 0 to exactly zero.
void zero_exterior(Field& u);
bool vanishes_on_exterior(const Field& u);

double sup_norm(std::span<const double> v);
double sup_distance(const Field& a, const Field& b);

struct MomentResult {
  double value;
  bool truncation_warning;  // |u| at the right edge exceeds 1e-12
};

/// Quadrature of u(x) x^p over x >= 0.
double moment(const Field& u, int p);
MomentResult moment_checked(const Field& u, int p);

/// Quadrature of u w over x >= 0. The weight field may live on a different
/// aligned grid; it is read through its extension rule.
double weighted_mass(const Field& u, const Field& w);

/// Quadrature of u(x) x^p over the whole grid.
double whole_line_moment(const Field& u, int p, double centre = 0.0);

}  // namespace dipole
