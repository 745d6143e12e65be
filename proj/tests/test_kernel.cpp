#include <doctest.h>

#include <cmath>

#include "dipole/grid_field.hpp"
#include "dipole/kernel.hpp"

using namespace dipole;
using doctest::Approx;

TEST_SUITE("kernel") {
  TEST_CASE("biweight values") {
    const Kernel k = Kernel::biweight(1.0);
    CHECK(k(0.0) == Approx(0.9375).epsilon(1e-15));
    CHECK(k(1.5) == 0.0);
    CHECK(k(0.5) == Approx(0.52734375).epsilon(1e-15));
    CHECK(k(-0.5) == k(0.5));
  }

  TEST_CASE("q of the standard kernels") {
    CHECK(kernel_q(Kernel::biweight(1.0)) == Approx(1.0 / 14.0).epsilon(1e-12));
    CHECK(kernel_q(Kernel::epanechnikov(1.0)) == Approx(0.1).epsilon(1e-12));
    CHECK(kernel_q(Kernel::biweight(2.0)) == Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(kernel_mass(Kernel::smooth_bump(1.0)) == Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("Fourier transform") {
    const Kernel k = Kernel::biweight(1.0);
    CHECK(kernel_hat(k, 0.0) == Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(kernel_hat(k, 0.01) - (1.0 - 1e-4 / 14.0)) < 1e-8);
    CHECK(kernel_hat(k, 3.7) == kernel_hat(k, -3.7));
  }

  TEST_CASE("self-convolution") {
    const Kernel k = Kernel::biweight(1.0);
    const double h = 1.0 / 64.0;
    const Field one = self_convolution(k, 1, Grid::node_aligned(-1.0, 1.0, h));
    double dev = 0.0;
    for (std::size_t i = 0; i < one.size(); ++i) dev = std::max(dev, std::abs(one.values[i] - k(one.x(i))));
    // the discrete taps are renormalised to unit sum, an O(h^4) change for the biweight
    CHECK(dev < 1e-6);
    const Field two = self_convolution(k, 2, Grid::node_aligned(-2.0, 2.0, h));
    CHECK(whole_line_moment(two, 0) == Approx(1.0).epsilon(1e-6));
    CHECK(whole_line_moment(two, 2) == Approx(2.0 * (2.0 / 14.0)).epsilon(1e-4));
    CHECK_THROWS(self_convolution(k, 2, Grid::node_aligned(-1.0, 1.0, h)));
  }

  TEST_CASE("taps") {
    const Taps t = make_taps(Kernel::biweight(1.0), 1.0 / 32.0);
    CHECK(t.m == 32);
    double s = 0.0, s2 = 0.0;
    for (std::ptrdiff_t j = -32; j <= 32; ++j) {
      s += t[j];
      s2 += t[j] * (j * t.h) * (j * t.h);
      CHECK(t[j] == t[-j]);
    }
    CHECK(s == Approx(1.0).epsilon(1e-15));
    CHECK(s2 == Approx(1.0 / 7.0).epsilon(1e-3));
    CHECK_THROWS(make_taps(Kernel::biweight(1.0), 0.3));
  }

  TEST_CASE("invariants of a tabulated kernel") {
    const Kernel good = Kernel::tabulated({0.0, 1.0}, {1.0, 0.0});
    CHECK(check_kernel_invariants(good).empty());
    CHECK(kernel_q(good) == Approx(1.0 / 12.0).epsilon(1e-10));
    CHECK_THROWS_WITH_AS(Kernel::tabulated({0.0, 1.0}, {2.0, 0.0}), doctest::Contains("rejected"), std::invalid_argument);
    // increasing away from 0
    CHECK_THROWS_AS(Kernel::tabulated({0.0, 0.5, 1.0}, {0.5, 1.5, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::tabulated({0.0, 1.0}, {-1.0, 0.0}), std::invalid_argument);
  }
}
