#include <doctest.h>

#include <cmath>

#include "dipole/convolution.hpp"
#include "dipole/stationary.hpp"

using namespace dipole;
using doctest::Approx;

TEST_SUITE("stationary") {
  TEST_CASE("truncated problem bounds") {
    const Kernel k = Kernel::biweight(1.0);
    const double h = 1.0 / 32.0;
    for (double n : {4.0, 8.0}) {
      const Grid g = Grid::half_line(1.0, n + 1.0, h);
      const Field p = solve_phi_n(k, n, g, 1e-12);
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double x = p.x(i), v = p.values[i];
        if (x < 0.0) {
          CHECK(v == 0.0);
          continue;
        }
        CHECK(v >= -1e-12);
        CHECK(v <= x + 1.0 + 1e-12);
        CHECK(v >= x - 1e-12);
        if (x > n) CHECK(v == Approx(x).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("monotone in n") {
    const Kernel k = Kernel::biweight(1.0);
    const double h = 1.0 / 32.0;
    const Grid g = Grid::half_line(1.0, 17.0, h);
    const Field p4 = solve_phi_n(k, 4.0, g, 1e-12);
    const Field p8 = solve_phi_n(k, 8.0, g, 1e-12);
    const Field p16 = solve_phi_n(k, 16.0, g, 1e-12);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(p4.values[i] <= p8.values[i] + 1e-12);
      CHECK(p8.values[i] <= p16.values[i] + 1e-12);
    }
  }

  TEST_CASE("fixed-point iteration agrees with the direct solve") {
    const Kernel k = Kernel::biweight(1.0);
    const double h = 1.0 / 16.0;
    const Grid g = Grid::half_line(1.0, 5.0, h);
    const FixedPointTrace fp = iterate_T(k, 4.0, g, 1e-12, 100000);
    CHECK(fp.monotone);
    const Field direct = solve_phi_n(k, 4.0, g, 1e-12);
    CHECK(sup_distance(fp.result, direct) < 1e-8);
    PhiOptions opts;
    opts.method = PhiMethod::fixed_point;
    CHECK(sup_distance(solve_phi_n(k, 4.0, g, 1e-12, opts), direct) < 1e-8);
    CHECK_THROWS(iterate_T(k, 4.0, g, 1e-12, 5));
  }

  TEST_CASE("stationary profile") {
    const Kernel k = Kernel::biweight(1.0);
    const PhiSolution phi = solve_phi(k, 40.0, 1.0 / 64.0);
    for (std::size_t i = 0; i < phi.field.size(); ++i) {
      const double x = phi.field.x(i), v = phi.field.values[i];
      if (x < 0.0) continue;
      CHECK(v >= x - 1e-10);
      CHECK(v <= x + 1.0 + 1e-10);
    }
    CHECK(residual_L(k, phi) <= 1e-7);
    CHECK(phi.offset_at_edge > 0.0);
    CHECK(phi.offset_at_edge < 1.0);
  }

  TEST_CASE("profile approaches x as d shrinks") {
    double prev = 1e9;
    for (double d : {1.0, 0.5, 0.25}) {
      const Kernel k = Kernel::biweight(d);
      const PhiSolution phi = solve_phi(k, 20.0, d / 32.0);
      double dev = 0.0;
      for (std::size_t i = 0; i < phi.field.size(); ++i)
        if (phi.field.x(i) >= 0.0) dev = std::max(dev, std::abs(phi.field.values[i] - phi.field.x(i)));
      CHECK(dev <= d);
      CHECK(dev < prev);
      prev = dev;
    }
  }

  TEST_CASE("x with a zero exterior is not a solution") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = Grid::half_line(1.0, 10.0, 1.0 / 32.0);
    Field psi = Field::sample(g, [](double x) { return std::max(x, 0.0); });
    psi.extension = Extension::linear_slope_one;
    CHECK(residual_L(k, psi) > 1e-2);
    const Field l = apply_L(k, psi);
    // mass removed on the exterior strip makes J*psi exceed psi next to the boundary
    CHECK(l.values[g.index_of(1.0 / 64.0)] > 0.1);
  }

  TEST_CASE("uniqueness diagnostic") {
    const Kernel k = Kernel::biweight(1.0);
    const double h = 1.0 / 32.0;
    CHECK(uniqueness_c0(k) == Approx(1.0 / 14.0).epsilon(1e-12));

    const Grid g = Grid::cell_centred(-1.0, 20.0, h);
    const auto dc = uniqueness_diagnostic_F(k, Field::sample(g, [](double) { return 2.5; }));
    for (double v : dc.F.values) CHECK(v == Approx(2.5).epsilon(1e-13));
    const auto dx = uniqueness_diagnostic_F(k, Field::sample(g, [](double x) { return x; }));
    for (std::size_t i = 0; i < dx.F.size(); ++i) CHECK(dx.F.values[i] == Approx(dx.F.x(i)).epsilon(1e-12));
    CHECK(dx.c0 == Approx(dx.c0_nested).epsilon(1e-4));

    const PhiSolution phi = solve_phi(k, 40.0, h);
    const auto dphi = uniqueness_diagnostic_F(k, phi.field);
    CHECK(affine_deviation(dphi.F, 1.0, 38.0) <= 1e-6);
    // x^2 is far from affine after averaging
    const auto dq = uniqueness_diagnostic_F(k, Field::sample(g, [](double x) { return x * x; }));
    CHECK(affine_deviation(dq.F, 1.0, 17.0) > 1.0);
    CHECK_THROWS(affine_deviation(dphi.F, 100.0, 200.0));
    CHECK_THROWS(uniqueness_diagnostic_F(k, Field(Grid::cell_centred(-1.0, 0.5, h))));
  }
}
