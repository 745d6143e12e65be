#include <doctest.h>

#include <cmath>

#include "dipole/evolution.hpp"
#include "dipole/initial_data.hpp"
#include "dipole/stationary.hpp"

using namespace dipole;
using doctest::Approx;

namespace {

Field indicator(const Grid& g, double a, double b) { return make_initial_data(InitialDataSpec{"indicator", {a, b}, ""}, g).u0; }

EvolutionConfig config(double t_final, std::vector<double> snaps, EvolutionMode mode = EvolutionMode::halfline_dirichlet) {
  EvolutionConfig c;
  c.mode = mode;
  c.t_final = t_final;
  c.snapshot_times = std::move(snaps);
  return c;
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("whole-line mass is conserved") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = Grid::cell_centred(-30.0, 30.0, 1.0 / 16.0);
    const Field u0 = Field::sample(g, [&](double x) { return k(x); });
    const double m0 = whole_line_moment(u0, 0);
    const Trajectory tr = evolve(k, u0, config(20.0, {0.0, 1.0, 5.0, 10.0, 20.0}, EvolutionMode::cauchy));
    for (const auto& s : tr.snapshots) CHECK(std::abs(whole_line_moment(s.u, 0) - m0) < 1e-9);
  }

  TEST_CASE("half-line mass decreases and M_phi is conserved") {
    const Kernel k = Kernel::biweight(1.0);
    const double h = 1.0 / 32.0;
    const double x_max = sized_domain(2.0, kernel_q(k), 100.0, 1.0);
    CHECK(std::fmod(x_max, 1.0) == 0.0);
    const Grid g = Grid::half_line(1.0, x_max, h);
    const PhiSolution phi = solve_phi(k, x_max, h);
    std::vector<double> times;
    for (double t = 0.0; t <= 100.0; t += 5.0) times.push_back(t);
    const Trajectory tr = evolve(k, indicator(g, 1.0, 2.0), config(100.0, times));
    const double mp0 = weighted_mass(tr.snapshots.front().u, phi.field);
    for (std::size_t i = 1; i < tr.snapshots.size(); ++i) {
      CHECK(moment(tr.snapshots[i].u, 0) <= moment(tr.snapshots[i - 1].u, 0) + 1e-12);
      CHECK(std::abs(weighted_mass(tr.snapshots[i].u, phi.field) / mp0 - 1.0) < 1e-6);
    }
    CHECK(tr.mass_leak_at_edge < 1e-9);
  }

  TEST_CASE("integrators converge to each other") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = Grid::half_line(1.0, 16.0, 1.0 / 32.0);
    const Field u0 = indicator(g, 1.0, 2.0);
    auto run = [&](double dt, Integrator in) {
      EvolutionConfig c = config(4.0, {4.0});
      c.dt = dt;
      c.integrator = in;
      c.leak_tol = std::numeric_limits<double>::infinity();
      return evolve(k, u0, c).at(4.0).u;
    };
    const Field ref = run(0.0125, Integrator::rk4);
    const double e1 = sup_distance(run(0.2, Integrator::rk4), ref);
    const double e2 = sup_distance(run(0.1, Integrator::rk4), ref);
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);
    CHECK(sup_distance(run(0.1, Integrator::exp_integrating_factor), ref) < 1e-5);
  }

  TEST_CASE("antisymmetric extensions") {
    const Grid g = Grid::half_line(1.0, 10.0, 1.0 / 32.0);
    const Field u = indicator(g, 1.0, 2.0);
    const double M = moment(u, 0), M1 = moment(u, 1);
    const Field lo = antisym_extend(u, Pivot::origin, 1.0);
    const Field up = antisym_extend(u, Pivot::minus_d, 1.0);
    CHECK(std::abs(whole_line_moment(lo, 0)) < 1e-12);
    CHECK(std::abs(whole_line_moment(up, 0)) < 1e-12);
    CHECK(whole_line_moment(lo, 1) == Approx(2.0 * M1).epsilon(1e-12));
    CHECK(whole_line_moment(up, 1, -1.0) == Approx(2.0 * M1 + 2.0 * M).epsilon(1e-12));
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = u.x(i);
      if (x < 0.0) continue;
      CHECK(lo.values[lo.grid.index_of(x)] == u.values[i]);
      CHECK(up.values[up.grid.index_of(x)] == u.values[i]);
    }
    Field bad = u;
    bad.values[0] = 1.0;
    CHECK_THROWS(antisym_extend(bad, Pivot::origin, 1.0));
  }

  TEST_CASE("antisymmetry is preserved on the whole line") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = Grid::half_line(1.0, 30.0, 1.0 / 32.0);
    const Field w0 = antisym_extend(indicator(g, 1.0, 2.0), Pivot::origin, 1.0);
    const Trajectory tr = evolve(k, w0, config(10.0, {10.0}, EvolutionMode::cauchy));
    const Field& w = tr.at(10.0).u;
    const std::size_t n = w.size();
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(w.values[i] + w.values[n - 1 - i]) <= 1e-10);
      if (w.x(i) >= 0.0) CHECK(w.values[i] >= -1e-10);
    }
  }

  TEST_CASE("sandwich holds over a short window") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = Grid::half_line(1.0, sized_domain(2.0, kernel_q(k), 64.0, 1.0), 1.0 / 32.0);
    EvolutionConfig c = config(64.0, {16.0, 32.0, 48.0, 64.0});
    const SandwichReport r = sandwich_check(k, indicator(g, 1.0, 2.0), 16.0, 64.0, c);
    CHECK(r.passed);
    CHECK(r.min_upper_gap >= -r.slack);
    CHECK(r.min_lower_gap >= -r.slack);
  }

  TEST_CASE("configuration and gates") {
    const Kernel k = Kernel::biweight(1.0);
    const Grid g = Grid::half_line(1.0, 6.0, 1.0 / 16.0);
    EvolutionConfig c = config(1.0, {1.0});
    c.dt = -0.1;
    CHECK_THROWS(c.validate());
    c = config(1.0, {2.0});
    CHECK_THROWS(c.validate());
    Field u0 = indicator(g, 1.0, 2.0);
    u0.values[3] = 1.0;  // exterior strip
    CHECK_THROWS(evolve(k, u0, config(1.0, {1.0})));
    // mass reaches the right edge of a short domain
    CHECK_THROWS(evolve(k, indicator(g, 1.0, 2.0), config(50.0, {50.0})));
  }

  TEST_CASE("snapshot schedule") {
    const auto t = geometric_times(1.0, 16.0);
    REQUIRE(t.size() == 9);
    CHECK(t[1] == Approx(std::sqrt(2.0)));
    CHECK(t.back() == 16.0);
    const auto t2 = geometric_times(1.0, 10.0);
    CHECK(t2.back() == 10.0);
  }
}
