#include <doctest.h>

#include <cmath>

#include "dipole/evolution.hpp"
#include "dipole/fundamental.hpp"
#include "dipole/heat_reference.hpp"
#include "dipole/initial_data.hpp"

using namespace dipole;
using doctest::Approx;

namespace {

HeatSolution heat_from(const std::string& spec, double h) {
  const Grid g = Grid::cell_centred(0.0, 4.0, h);
  return HeatSolution{make_initial_data(InitialDataSpec::parse(spec), g).u0, 1.0};
}

double gauss(double x, double t) { return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * M_PI * t); }

}  // namespace

TEST_SUITE("heat_reference") {
  TEST_CASE("Dirichlet value and first moment") {
    const HeatSolution hs = heat_from("hat:1:0.1", 1.0 / 1024.0);
    CHECK(heat_eval(hs, 0.0, 3.0) == 0.0);
    const double m1 = heat_initial_first_moment(hs);
    CHECK(m1 == Approx(1.0).epsilon(1e-6));
    for (double t : {1.0, 10.0, 100.0}) CHECK(std::abs(heat_first_moment(hs, t) - m1) < 1e-8);
    CHECK_THROWS(heat_eval(hs, 1.0, 0.0));
    CHECK_THROWS(heat_eval(hs, 1.0, -1.0));
  }

  TEST_CASE("narrow hat approaches the point-source Green function") {
    double prev = 1e9;
    for (double w : {0.2, 0.1, 0.05}) {
      const HeatSolution hs = heat_from("hat:1:" + std::to_string(w), 1.0 / 2048.0);
      double err = 0.0;
      for (double x = 0.05; x < 6.0; x += 0.05) err = std::max(err, std::abs(heat_eval(hs, x, 1.0) - (gauss(x - 1.0, 1.0) - gauss(x + 1.0, 1.0))));
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-3);
  }

  TEST_CASE("odd extension in closed form") {
    // indicator[1, 2]: the odd extension convolved with the Gaussian, by erf
    const HeatSolution hs = heat_from("indicator:1:2", 1.0 / 2048.0);
    const double t = 1.5, s = std::sqrt(4.0 * t);
    for (double x = 0.1; x < 8.0; x += 0.3) {
      const double exact = 0.5 * (std::erf((x - 1.0) / s) - std::erf((x - 2.0) / s)) - 0.5 * (std::erf((x + 2.0) / s) - std::erf((x + 1.0) / s));
      CHECK(std::abs(heat_eval(hs, x, t) - exact) < 1e-8);
    }
  }

  TEST_CASE("dipole error") {
    const HeatSolution hs = heat_from("hat:1:0.1", 1.0 / 1024.0);
    const double m1 = heat_initial_first_moment(hs);
    double prev = 1e9;
    for (double t : {16.0, 64.0, 256.0, 1024.0}) {
      const HeatDipoleError e = heat_dipole_error(hs, t, m1);
      CHECK(e.weighted < prev);
      CHECK_FALSE(e.out_of_theorem);
      prev = e.weighted;
    }
    // M1* = 0 with signed data: reported, flagged
    const Grid g = Grid::cell_centred(0.0, 4.0, 1.0 / 256.0);
    HeatSolution signed_hs{Field::sample(g, [](double x) { return std::abs(x - 1.0) < 0.25 ? 2.0 : (std::abs(x - 2.0) < 0.25 ? -1.0 : 0.0); }), 1.0};
    CHECK(std::abs(heat_initial_first_moment(signed_hs)) < 1e-12);
    CHECK(heat_dipole_error(signed_hs, 64.0, 0.0).out_of_theorem);
  }

  TEST_CASE("exact dipole data evolves consistently") {
    // u0 = -2 m D(x, 1) evolves to -2 m D(x, 1 + t)
    const double m = 0.8;
    const Grid g = Grid::cell_centred(0.0, 30.0, 1.0 / 512.0);
    HeatSolution hs{Field::sample(g, [&](double x) { return -2.0 * m * dipole_q(x, 1.0, 1.0); }), 1.0};
    for (double t : {1.0, 4.0}) {
      double err = 0.0;
      for (double x = 0.1; x < 10.0; x += 0.1) err = std::max(err, std::abs(heat_eval(hs, x, t) + 2.0 * m * dipole_q(x, 1.0 + t, 1.0)));
      CHECK(err < 1e-7);
    }
  }

  TEST_CASE("inner profile") {
    CHECK(v_infinity(0.0, 2.0) == 0.0);
    CHECK(v_infinity(1e12, 2.0) == Approx(2.0 / (2.0 * std::sqrt(M_PI))));
    const HeatSolution hs = heat_from("hat:1:0.1", 1.0 / 1024.0);
    const double m1 = heat_initial_first_moment(hs), t = 1024.0;
    const double scaled = std::pow(t, 1.5) * heat_eval(hs, 1.0, t) / 2.0;
    CHECK(scaled == Approx(v_infinity(1.0, m1)).epsilon(0.15));
  }

  TEST_CASE("barrier sign lattice") {
    const HeatBarrierCheck b = heat_barrier_check(0.1, 0.9, 1.0, 100, 100);
    CHECK(b.points == 10000);
    CHECK(b.passed);
    CHECK(b.plus_violations == 0);
    CHECK(b.minus_violations == 0);
    CHECK(b.mu_star == Approx(std::sqrt(0.9 * 0.1 / (2.0 * 3.1))));
  }

  TEST_CASE("nonlocal solutions approach the local one as d shrinks") {
    // parabolic scaling: t = T / d^2 keeps q t fixed
    const double T = 25.0;
    double prev = 1e9;
    for (double d : {1.0, 0.5, 0.25}) {
      const double t = T / (d * d);
      const Kernel k = Kernel::biweight(d);
      const double q = kernel_q(k), h = d / 16.0;
      const double x_max = sized_domain(2.0, q, t, d);
      const Grid g = Grid::half_line(d, x_max, h);
      const Field u0 = make_initial_data(InitialDataSpec::parse("indicator:1:2"), g).u0;
      EvolutionConfig c;
      c.t_final = t;
      c.snapshot_times = {t};
      const Field u = evolve(k, u0, c).at(t).u;
      Field u0_pos(Grid::cell_centred(0.0, 4.0, h));
      u0_pos = make_initial_data(InitialDataSpec::parse("indicator:1:2"), u0_pos.grid).u0;
      const HeatSolution hs{u0_pos, q};
      double dist = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i)
        if (u.x(i) >= 0.0) dist = std::max(dist, std::abs(u.values[i] - heat_eval(hs, u.x(i), t)));
      CHECK(dist < prev);
      prev = dist;
    }
  }
}
