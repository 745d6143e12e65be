#include "dipole/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dipole {

namespace {

constexpr double kLatticeTol = 1e-9;

bool is_integer(double v) { return std::abs(v - std::round(v)) < kLatticeTol; }

}  // namespace

Grid::Grid(double x_min, double h, std::size_t n) : x_min_(x_min), h_(h), n_(n) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid spacing must be positive");
  if (n < 2) throw std::invalid_argument("grid needs at least two nodes");
}

Grid Grid::node_aligned(double lo, double hi, double h) {
  if (!is_integer(lo / h) || !is_integer(hi / h) || hi <= lo) throw std::invalid_argument("node-aligned grid ends must be ordered multiples of h");
  const auto i0 = std::llround(lo / h);
  const auto i1 = std::llround(hi / h);
  return Grid(static_cast<double>(i0) * h, h, static_cast<std::size_t>(i1 - i0 + 1));
}

Grid Grid::cell_centred(double lo, double hi, double h) {
  const double cells = (hi - lo) / h;
  if (!is_integer(cells) || cells < 2.0) throw std::invalid_argument("cell-centred grid: interval must hold an integer number (>= 2) of cells");
  if (!is_integer(lo / h)) throw std::invalid_argument("cell-centred grid: cell edges must be multiples of h");
  return Grid(static_cast<double>(std::llround(lo / h)) * h + 0.5 * h, h, static_cast<std::size_t>(std::llround(cells)));
}

bool Grid::cell_centred_layout() const { return !is_integer(x_min_ / h_); }

double Grid::lower_edge() const { return cell_centred_layout() ? x_min_ - 0.5 * h_ : x_min_; }
double Grid::upper_edge() const { return cell_centred_layout() ? x_max() + 0.5 * h_ : x_max(); }

double Grid::weight(std::size_t i, double lower) const {
  const double xi = x(i);
  if (cell_centred_layout()) return xi > lower ? h_ : 0.0;
  if (xi < lower - kLatticeTol * h_) return 0.0;
  const bool at_lower = std::abs(xi - lower) < kLatticeTol * h_;
  if (at_lower || i == 0 || i + 1 == n_) return 0.5 * h_;
  return h_;
}

std::size_t Grid::index_of(double xv) const {
  const double r = (xv - x_min_) / h_;
  if (!is_integer(r) || r < -0.5 || r > static_cast<double>(n_) - 0.5) throw std::out_of_range("x is not a node of the grid");
  return static_cast<std::size_t>(std::llround(r));
}

bool Grid::aligned_with(const Grid& other) const {
  return std::abs(h_ - other.h_) <= 1e-12 * h_ && is_integer((x_min_ - other.x_min_) / h_);
}

std::size_t Grid::steps_per(double d) const {
  const double r = d / h_;
  if (!is_integer(r) || r < 0.5) throw std::invalid_argument("kernel support is not an integer multiple of the grid spacing");
  return static_cast<std::size_t>(std::llround(r));
}

bool Grid::operator==(const Grid& other) const {
  return n_ == other.n_ && aligned_with(other) && std::abs(x_min_ - other.x_min_) < kLatticeTol * h_;
}

Field::Field(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("field values do not match grid size");
}

double Field::at_node(double xv) const {
  const double r = (xv - grid.x_min()) / grid.h();
  const auto i = std::llround(r);
  if (i < 0) return 0.0;
  if (static_cast<std::size_t>(i) < values.size()) return values[static_cast<std::size_t>(i)];
  return extension == Extension::linear_slope_one ? xv + extension_offset : 0.0;
}

Field resample_aligned(const Field& u, const Grid& target) {
  if (!u.grid.aligned_with(target)) throw std::invalid_argument("grids are not aligned");
  Field out(target);
  for (std::size_t i = 0; i < target.size(); ++i) out.values[i] = u.at_node(target.x(i));
  out.extension = u.extension;
  out.extension_offset = u.extension_offset;
  return out;
}

void zero_exterior(Field& u) {
  for (std::size_t i = 0; i < u.size() && u.x(i) < 0.0; ++i) u.values[i] = 0.0;
}

bool vanishes_on_exterior(const Field& u) {
  for (std::size_t i = 0; i < u.size() && u.x(i) < 0.0; ++i)
    if (u.values[i] != 0.0) return false;
  return true;
}

double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s = std::max(s, std::abs(a));
  return s;
}

double sup_distance(const Field& a, const Field& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a.values[i] - b.values[i]));
  return s;
}

double moment(const Field& u, int p) { return moment_checked(u, p).value; }

MomentResult moment_checked(const Field& u, int p) {
  if (p < 0 || p > 2) throw std::invalid_argument("moment order must be 0, 1 or 2");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = u.grid.weight(i, 0.0);
    if (w == 0.0) continue;
    const double x = u.x(i);
    sum += w * u.values[i] * (p == 0 ? 1.0 : p == 1 ? x : x * x);
  }
  const bool warn = u.extension == Extension::zero && std::abs(u.values.back()) > 1e-12;
  return {sum, warn};
}

double weighted_mass(const Field& u, const Field& w) {
  if (!u.grid.aligned_with(w.grid)) throw std::invalid_argument("weighted_mass: grids are not aligned");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double q = u.grid.weight(i, 0.0);
    if (q == 0.0) continue;
    sum += q * u.values[i] * w.at_node(u.x(i));
  }
  return sum;
}

double whole_line_moment(const Field& u, int p, double centre) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.x(i) - centre;
    sum += u.grid.weight(i) * u.values[i] * std::pow(x, p);
  }
  return sum;
}

}  // namespace dipole
