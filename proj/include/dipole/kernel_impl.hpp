#pragma once

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace dipole {

template <class F>
double integrate_against(const Kernel& k, F&& f, std::size_t min_panels) {
  using boost::math::quadrature::gauss;
  std::vector<double> cuts = k.breakpoints();
  const double d = k.support();
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    const auto panels = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(static_cast<double>(min_panels) * (b - a) / d)));
    const double w = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = a + w * static_cast<double>(p);
      const double hi = lo + w;
      // the kernel is even: fold [-d, 0] onto [0, d]
      total += gauss<double, 10>::integrate(
          [&](double z) { return k(z) * (f(z) + f(-z)); }, lo, hi);
    }
  }
  return total;
}

}  // namespace dipole
