#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "dipole/fundamental.hpp"

using namespace dipole;
using doctest::Approx;

namespace {

Grid covering(const Kernel& k, double t, double h) {
  const double r = static_cast<double>(series_terms_needed(k, t, 1e-14)) * k.support();
  return Grid::node_aligned(-r, r, h);
}

}  // namespace

TEST_SUITE("fundamental") {
  TEST_CASE("series moments and lower bound") {
    const Kernel k = Kernel::biweight(1.0);
    const double q = 1.0 / 14.0;
    for (double t : {1.0, 5.0}) {
      const OmegaProfile w = omega_series(k, covering(k, t, 1.0 / 64.0), t);
      CHECK(std::abs(whole_line_moment(w.field, 0) - (1.0 - std::exp(-t))) < 1e-10);
      CHECK(whole_line_moment(w.field, 2) == Approx(2.0 * q * t).epsilon(1e-6));
      if (t == 1.0)
        for (std::size_t i = 0; i < w.field.size(); ++i) CHECK(w.field.values[i] >= std::exp(-t) * t * k(w.field.x(i)) - 1e-15);
    }
  }

  TEST_CASE("series and Fourier agree") {
    const Kernel k = Kernel::biweight(1.0);
    for (double t : {1.0, 5.0, 10.0}) {
      const Grid g = covering(k, t, 1.0 / 64.0);
      const OmegaProfile s = omega_series(k, g, t);
      const OmegaProfile f = omega_fourier(k, g, t);
      CHECK(sup_distance(s.field, f.field) < 5e-8);
      const std::size_t n = f.field.size();
      for (std::size_t i = 0; i < n; ++i) CHECK(f.field.values[i] == Approx(f.field.values[n - 1 - i]).epsilon(1e-12));
    }
  }

  TEST_CASE("large t approaches the Gaussian") {
    const Kernel k = Kernel::biweight(1.0);
    const double t = 100.0, q = 1.0 / 14.0;
    const Grid g = Grid::node_aligned(-40.0, 40.0, 1.0 / 16.0);
    const OmegaProfile f = omega_fourier(k, g, t);
    double dev = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(f.field.values[i] - gamma_q(g.x(i), t, q)));
    CHECK(dev * std::sqrt(t) < 0.05);
    const OmegaProfile p = omega_profile(k, g, 40.0);
    CHECK(p.method == OmegaMethod::fourier);
  }

  TEST_CASE("dipole profile") {
    CHECK(dipole_q(0.0, 3.0, 1.0) == 0.0);
    CHECK(dipole_q(1.0, 1.0, 1.0) == Approx(-0.5 / std::sqrt(4.0 * M_PI) * std::exp(-0.25)).epsilon(1e-14));
    CHECK(dipole_q(1.0, 1.0, 1.0) == Approx(-0.1098478).epsilon(1e-6));
    for (double t : {0.5, 2.0, 30.0}) {
      using boost::math::quadrature::gauss_kronrod;
      const double v = gauss_kronrod<double, 31>::integrate([&](double x) { return dipole_q(x, t, 1.0) * x; }, 0.0,
                                                            std::numeric_limits<double>::infinity(), 10, 1e-13);
      CHECK(v == Approx(-0.5).epsilon(1e-10));
    }
  }

  TEST_CASE("tail shape") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = covering(k, 5.0, 1.0 / 64.0);
    const OmegaProfile w = omega_series(k, g, 5.0);
    const OmegaTailReport r = omega_tail_check(w, k);
    CHECK(r.nonnegative);
    CHECK(r.zero_beyond_support);
    CHECK(r.tail_nodes > 0);
    CHECK(r.concavity_violations == 0);
  }

  TEST_CASE("grid too narrow for the series") {
    const Kernel k = Kernel::biweight(1.0);
    CHECK_THROWS(omega_series(k, Grid::node_aligned(-3.0, 3.0, 1.0 / 16.0), 5.0));
  }
}
