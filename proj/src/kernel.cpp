#include "dipole/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dipole/convolution.hpp"
#include "dipole/grid_field.hpp"

namespace dipole {

namespace {

double bump_shape(double s) {
  const double r = 1.0 - s * s;
  if (r <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / r);
}

// The bump and all its derivatives vanish at +-1, so the trapezoid rule
// converges spectrally.
double bump_integral() {
  constexpr std::size_t n = 1 << 14;
  const double h = 2.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 1; i < n; ++i) sum += bump_shape(-1.0 + h * static_cast<double>(i));
  return sum * h;
}

void require_positive_support(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("kernel support radius must be positive");
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::biweight: return "biweight";
    case KernelFamily::smooth_bump: return "smooth_bump";
    case KernelFamily::tabulated: return "tabulated";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "epanechnikov") return KernelFamily::epanechnikov;
  if (name == "biweight") return KernelFamily::biweight;
  if (name == "smooth_bump" || name == "bump") return KernelFamily::smooth_bump;
  if (name == "tabulated") return KernelFamily::tabulated;
  throw std::invalid_argument("unknown kernel family: " + std::string(name));
}

Kernel Kernel::epanechnikov(double d) {
  require_positive_support(d);
  return Kernel(KernelFamily::epanechnikov, d);
}

Kernel Kernel::biweight(double d) {
  require_positive_support(d);
  return Kernel(KernelFamily::biweight, d);
}

Kernel Kernel::smooth_bump(double d) {
  require_positive_support(d);
  Kernel k(KernelFamily::smooth_bump, d);
  static const double unit = bump_integral();
  k.bump_norm_ = 1.0 / (unit * d);
  return k;
}

Kernel Kernel::tabulated(std::vector<double> z, std::vector<double> values) {
  if (z.size() != values.size() || z.size() < 2) throw std::invalid_argument("tabulated kernel needs matching (z, J) columns with >= 2 rows");
  std::vector<std::size_t> order(z.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return z[a] < z[b]; });

  auto table = std::make_shared<Table>();
  for (auto i : order) {
    if (!std::isfinite(z[i]) || !std::isfinite(values[i])) throw std::invalid_argument("tabulated kernel has non-finite entries");
    if (values[i] < 0.0) throw std::invalid_argument("tabulated kernel must be nonnegative");
    if (z[i] < 0.0) continue;
    if (!table->z.empty() && z[i] == table->z.back()) throw std::invalid_argument("tabulated kernel has duplicate abscissae");
    table->z.push_back(z[i]);
    table->j.push_back(values[i]);
  }
  if (table->z.size() < 2 || table->z.front() != 0.0) throw std::invalid_argument("tabulated kernel must include z = 0 and at least one positive abscissa");

  Kernel k(KernelFamily::tabulated, table->z.back());
  k.table_ = table;
  // mirrored entries must agree with the positive half
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0.0 && std::abs(k(-z[i]) - values[i]) > 1e-12 * std::max(1.0, values[i])) throw std::invalid_argument("tabulated kernel is not symmetric");
  }
  auto problems = check_kernel_invariants(k);
  if (!problems.empty()) {
    std::string msg = "tabulated kernel rejected:";
    for (auto& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
  return k;
}

Kernel Kernel::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel table " + path);
  std::vector<double> z, j;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (!(row >> a >> b)) continue;  // header
    z.push_back(a);
    j.push_back(b);
  }
  return tabulated(std::move(z), std::move(j));
}

double Kernel::operator()(double z) const {
  const double a = std::abs(z);
  if (a > d_) return 0.0;
  const double s = a / d_;
  switch (family_) {
    case KernelFamily::epanechnikov: return 0.75 / d_ * (1.0 - s * s);
    case KernelFamily::biweight: {
      const double r = 1.0 - s * s;
      return 15.0 / 16.0 / d_ * r * r;
    }
    case KernelFamily::smooth_bump: return bump_norm_ * bump_shape(s);
    case KernelFamily::tabulated: {
      const auto& t = *table_;
      auto it = std::upper_bound(t.z.begin(), t.z.end(), a);
      if (it == t.z.end()) return t.j.back();
      const auto i = static_cast<std::size_t>(it - t.z.begin());
      const double w = (a - t.z[i - 1]) / (t.z[i] - t.z[i - 1]);
      return (1.0 - w) * t.j[i - 1] + w * t.j[i];
    }
  }
  return 0.0;
}

std::vector<double> Kernel::breakpoints() const {
  if (family_ == KernelFamily::tabulated) return table_->z;
  return {0.0, d_};
}

double kernel_mass(const Kernel& k) {
  return integrate_against(k, [](double) { return 1.0; }, 256);
}

KernelMoments kernel_moments(const Kernel& k) {
  KernelMoments m{};
  m.mass = kernel_mass(k);
  m.second_raw = integrate_against(k, [](double z) { return z * z; }, 256);
  m.q = 0.5 * m.second_raw;
  return m;
}

double kernel_q(const Kernel& k) {
  const auto m = kernel_moments(k);
  if (std::abs(m.mass - 1.0) > 1e-10) throw std::invalid_argument("kernel does not have unit mass");
  return m.q;
}

double kernel_hat(const Kernel& k, double xi) {
  // resolve about four panels per oscillation of cos(xi z)
  const double oscillations = std::abs(xi) * k.support() / std::numbers::pi;
  const auto panels = std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(4.0 * oscillations)));
  return integrate_against(k, [xi](double z) { return std::cos(xi * z); }, panels);
}

std::vector<std::string> check_kernel_invariants(const Kernel& k, std::size_t samples) {
  std::vector<std::string> problems;
  const double d = k.support();
  double prev = k(0.0);
  bool monotone = true, symmetric = true, nonnegative = true, support = true;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double z = d * static_cast<double>(i) / static_cast<double>(samples);
    const double v = k(z);
    if (v < 0.0) nonnegative = false;
    if (v > prev * (1.0 + 1e-14) + 1e-300) monotone = false;
    if (k(-z) != v) symmetric = false;
    prev = v;
    const double outside = d * (1.0 + static_cast<double>(i + 1) / static_cast<double>(samples));
    if (k(outside) != 0.0 || k(-outside) != 0.0) support = false;
  }
  if (!nonnegative) problems.emplace_back("negative values");
  if (!monotone) problems.emplace_back("not nonincreasing on [0, d]");
  if (!symmetric) problems.emplace_back("not even");
  if (!support) problems.emplace_back("nonzero outside [-d, d]");
  const double mass = kernel_mass(k);
  if (std::abs(mass - 1.0) > 1e-10) problems.emplace_back("mass " + std::to_string(mass) + " differs from 1");
  return problems;
}

Taps make_taps(const Kernel& k, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  const double ratio = k.support() / h;
  const double m = std::round(ratio);
  if (m < 1.0 || std::abs(ratio - m) > 1e-9 * std::max(1.0, ratio)) throw std::invalid_argument("kernel support is not an integer multiple of the grid spacing");
  Taps taps;
  taps.m = static_cast<std::size_t>(m);
  taps.h = h;
  taps.weights.resize(2 * taps.m + 1);
  const auto mi = static_cast<std::ptrdiff_t>(taps.m);
  double sum = 0.0;
  for (std::ptrdiff_t j = -mi; j <= mi; ++j) {
    // fold symmetric pairs so the weights are exactly even
    const double v = k(h * static_cast<double>(std::abs(j)));
    taps.weights[static_cast<std::size_t>(j + mi)] = v;
  }
  for (std::ptrdiff_t j = mi; j >= 1; --j) sum += 2.0 * taps.weights[static_cast<std::size_t>(j + mi)];
  sum += taps.weights[taps.m];
  for (auto& w : taps.weights) w /= sum;
  return taps;
}

Field self_convolution(const Kernel& k, std::size_t n, const Grid& g) {
  if (n == 0) throw std::invalid_argument("self_convolution needs n >= 1");
  if (g.cell_centred_layout()) throw std::invalid_argument("self_convolution needs a node-aligned grid");
  const Taps taps = make_taps(k, g.h());
  const double reach = static_cast<double>(n) * k.support();
  if (g.x_min() > -reach + 1e-9 * g.h() || g.x_max() < reach - 1e-9 * g.h()) throw std::invalid_argument("grid too small to hold the support of J^{*n}");

  // J itself, scaled so that h * sum = 1 like the taps
  Field out = Field::sample(g, [&](double x) {
    const double r = std::round(x / g.h());
    const auto j = static_cast<std::ptrdiff_t>(r);
    if (std::abs(j) > static_cast<std::ptrdiff_t>(taps.m)) return 0.0;
    return taps[j] / g.h();
  });
  for (std::size_t s = 1; s < n; ++s) out = convolve(taps, out);
  return out;
}

}  // namespace dipole
