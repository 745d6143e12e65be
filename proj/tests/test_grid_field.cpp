#include <doctest.h>

#include <cmath>
#include <random>

#include "dipole/convolution.hpp"
#include "dipole/initial_data.hpp"
#include "dipole/stationary.hpp"

using namespace dipole;
using doctest::Approx;

namespace {

Field indicator(const Grid& g, double a, double b) {
  InitialDataSpec s;
  s.generator = "indicator";
  s.params = {a, b};
  return make_initial_data(s, g).u0;
}

}  // namespace

TEST_SUITE("grid_field") {
  TEST_CASE("grid layouts") {
    const Grid c = Grid::half_line(1.0, 4.0, 0.25);
    CHECK(c.cell_centred_layout());
    CHECK(c.x(0) == Approx(-0.875));
    CHECK(c.size() == 20);
    CHECK(c.lower_edge() == Approx(-1.0));
    const Grid n = Grid::node_aligned(-2.0, 2.0, 0.5);
    CHECK_FALSE(n.cell_centred_layout());
    CHECK(n.index_of(0.0) == 4);
    CHECK_THROWS(n.index_of(0.1));
  }

  TEST_CASE("convolution of constants and affine functions") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = Grid::cell_centred(-4.0, 4.0, 1.0 / 32.0);
    const Field one = Field::sample(g, [](double) { return 1.0; });
    const Field lin = Field::sample(g, [](double x) { return x; });
    const Field c1 = convolve(k, one), cx = convolve(k, lin);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      if (x < -3.0 || x > 3.0) continue;
      CHECK(c1.values[i] == Approx(1.0).epsilon(1e-14));
      CHECK(cx.values[i] == Approx(x).epsilon(1e-13));
    }
  }

  TEST_CASE("convolution of an indicator") {
    const Kernel k = Kernel::biweight(1.0);
    const double h = 1.0 / 256.0;
    // node at 0.5 on a node-aligned grid, midpoint sampling with half weights at the jumps
    const Grid g = Grid::node_aligned(-2.0, 3.0, h);
    Field u = Field::sample(g, [](double x) { return x > 0.0 && x < 1.0 ? 1.0 : (x == 0.0 || x == 1.0 ? 0.5 : 0.0); });
    const Field c = convolve(k, u);
    CHECK(c.values[g.index_of(0.5)] == Approx(0.79296875).epsilon(1e-5));
    // cell-centred sampling reaches the same value
    const Field uc = indicator(Grid::cell_centred(-2.0, 3.0, h), 0.0, 1.0);
    const Field cc = convolve(k, uc);
    CHECK(cc.at_node(0.5 - h / 2) == Approx(0.79296875).epsilon(1e-4));
  }

  TEST_CASE("L of polynomials") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = Grid::cell_centred(-4.0, 4.0, 1.0 / 64.0);
    const Field l1 = apply_L(k, Field::sample(g, [](double) { return 3.0; }));
    const Field lx = apply_L(k, Field::sample(g, [](double x) { return x; }));
    const Field lx2 = apply_L(k, Field::sample(g, [](double x) { return x * x; }));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      if (std::abs(x) > 2.5) continue;
      CHECK(std::abs(l1.values[i]) < 1e-13);
      CHECK(std::abs(lx.values[i]) < 1e-13);
      CHECK(lx2.values[i] == Approx(1.0 / 7.0).epsilon(1e-3));
    }
  }

  TEST_CASE("convolution methods agree") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = Grid::half_line(1.0, 30.0, 1.0 / 32.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    Field u(g);
    for (auto& v : u.values) v = val(rng);
    zero_exterior(u);
    const Field a = convolve(k, u, ConvolutionMethod::direct_serial);
    const Field b = convolve(k, u, ConvolutionMethod::direct);
    const Field c = convolve(k, u, ConvolutionMethod::spectral);
    CHECK(sup_distance(a, b) < 1e-15);
    CHECK(sup_distance(a, c) < 1e-12);
  }

  TEST_CASE("spacing mismatch is rejected") {
    const Taps t = make_taps(Kernel::biweight(1.0), 1.0 / 16.0);
    const Field u(Grid::half_line(1.0, 4.0, 1.0 / 32.0));
    CHECK_THROWS(convolve(t, u));
  }

  TEST_CASE("moments of indicator[1,2]") {
    const Field u = indicator(Grid::half_line(1.0, 6.0, 1.0 / 64.0), 1.0, 2.0);
    CHECK(moment(u, 0) == Approx(1.0).epsilon(1e-14));
    CHECK(moment(u, 1) == Approx(1.5).epsilon(1e-14));
    CHECK(moment(u, 2) == Approx(7.0 / 3.0).epsilon(1e-4));
    const Field wide = indicator(Grid::half_line(1.0, 2.0, 1.0 / 64.0), 1.0, 2.0);
    CHECK(moment_checked(wide, 0).truncation_warning);
    CHECK_FALSE(moment_checked(u, 0).truncation_warning);
  }

  TEST_CASE("weighted mass") {
    const Grid g = Grid::half_line(1.0, 20.0, 1.0 / 32.0);
    const Field u = indicator(g, 1.0, 2.0);
    CHECK(weighted_mass(u, Field::sample(g, [](double) { return 1.0; })) == Approx(moment(u, 0)));
    CHECK(weighted_mass(u, Field::sample(g, [](double x) { return x; })) == Approx(moment(u, 1)));
    const PhiSolution phi = solve_phi(Kernel::biweight(1.0), 20.0, 1.0 / 32.0);
    const double m = weighted_mass(u, phi.field);
    CHECK(m >= 1.5);
    CHECK(m <= 2.5);
    CHECK_THROWS(weighted_mass(u, Field(Grid::half_line(1.0, 20.0, 1.0 / 16.0))));
  }
}
