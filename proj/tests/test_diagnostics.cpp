#include <doctest.h>

#include <cmath>

#include "dipole/diagnostics.hpp"
#include "dipole/initial_data.hpp"

using namespace dipole;
using doctest::Approx;

namespace {

const Kernel kBiweight = Kernel::biweight(1.0);
constexpr double kQ = 1.0 / 14.0;
constexpr double kH = 1.0 / 32.0;

const PhiSolution& phi30() {
  static const PhiSolution p = solve_phi(kBiweight, 30.0, kH);
  return p;
}

Field indicator(const Grid& g, double a, double b) { return make_initial_data(InitialDataSpec{"indicator", {a, b}, ""}, g).u0; }

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("M1 star") {
    const Grid& g = phi30().field.grid;
    const double m = mstar(indicator(g, 1.0, 2.0), phi30());
    CHECK(m >= 1.5);
    CHECK(m <= 2.5);
    CHECK(mstar(Field(g), phi30()) == 0.0);
    CHECK_THROWS(mstar(Field(Grid::half_line(1.0, 30.0, kH / 2)), phi30()));
  }

  TEST_CASE("M1 star tends to M1 as d shrinks") {
    double prev = 1e9;
    for (double d : {1.0, 0.5, 0.25}) {
      const Kernel k = Kernel::biweight(d);
      const PhiSolution phi = solve_phi(k, 10.0, d / 32.0);
      const double gap = mstar(indicator(phi.field.grid, 1.0, 2.0), phi) - 1.5;
      CHECK(gap >= 0.0);
      CHECK(gap < prev);
      prev = gap;
    }
  }

  TEST_CASE("errors vanish on their own comparison functions") {
    const Grid& g = phi30().field.grid;
    const double t = 20.0, m = 1.7;
    const Field outer = Field::sample(g, [&](double x) { return x < 0 ? 0.0 : -2.0 * m * dipole_q(x, t, kQ); });
    CHECK(outer_error(outer, t, m, kQ) < 1e-14);
    Field global(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      if (x > 0) global.values[i] = -2.0 * m * phi30().field.values[i] / x * dipole_q(x, t, kQ);
    }
    CHECK(global_error(global, t, m, kQ, phi30()) < 1e-12);
    const OmegaProfile om = omega_for_halfline(kBiweight, g, t, std::pow(t, 0.3));
    Field inner(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      if (x >= 0) inner.values[i] = m * phi30().field.values[i] * om.field.at_node(x) / (kQ * t);
    }
    CHECK(inner_error(inner, t, m, kQ, phi30(), om, 1.0, 0.3) < 1e-12);
    const RatioRange r = inner_ratio(inner, t, m, kQ, phi30(), om, 0.5, 5.0);
    CHECK(r.lo == Approx(1.0));
    CHECK(r.hi == Approx(1.0));
    CHECK_THROWS(inner_error(inner, 2.0 * t, m, kQ, phi30(), om, 1.0, 0.3));
    CHECK_THROWS(global_error(global, 0.0, m, kQ, phi30()));
  }

  TEST_CASE("rate fit") {
    std::vector<double> t, v;
    for (double s = 1.0; s <= 4096.0; s *= 2.0) {
      t.push_back(s);
      v.push_back(3.0 / std::sqrt(s));
    }
    const RateFit f = fit_rate(t, v, 1.0, 4096.0);
    CHECK(f.slope == Approx(-0.5).epsilon(1e-12));
    CHECK(f.r2 == Approx(1.0).epsilon(1e-12));
    CHECK(f.points == 13);
    CHECK_THROWS(fit_rate(t, v, 1000.0, 4096.0));
    v[12] = 0.0;
    CHECK_THROWS(fit_rate(t, v, 1.0, 4096.0));
  }

  TEST_CASE("momenta on a short run") {
    const Grid& g = phi30().field.grid;
    EvolutionConfig c;
    c.t_final = 32.0;
    c.snapshot_times = geometric_times(1.0, 32.0);
    c.snapshot_times.insert(c.snapshot_times.begin(), 0.0);
    const Trajectory tr = evolve(kBiweight, indicator(g, 1.0, 2.0), c);
    const auto rec = momenta_series(tr, phi30());
    const double m1s = mstar(tr.snapshots.front().u, phi30());
    CHECK(rec.front().M == Approx(1.0).epsilon(1e-14));
    CHECK(rec.front().M1 == Approx(1.5).epsilon(1e-14));
    CHECK(rec.front().M2 == Approx(7.0 / 3.0).epsilon(1e-4));
    for (const auto& r : rec) {
      CHECK(r.M_phi == Approx(rec.front().M_phi).epsilon(1e-6));
      CHECK(std::abs(r.M1 - m1s) <= 1.0 * r.M + 1e-12);
    }
  }

  TEST_CASE("barrier parameters") {
    BarrierParams p;
    CHECK(p.beta_bound() == Approx(0.9 / 2.2));
    CHECK_NOTHROW(p.validate());
    p.beta = 0.45;
    CHECK_THROWS(p.validate());
    p = BarrierParams{};
    p.gamma = 1.2;
    CHECK_THROWS(p.validate());
    p = BarrierParams{};
    p.kappa = -0.1;
    CHECK_THROWS(p.validate());
  }

  TEST_CASE("Lz bound") {
    const LzCheck lz = lz_bound_check(kBiweight, 0.9, kH, 60.0);
    CHECK(lz.holds);
    CHECK(lz.worst_margin <= 0.0);
    CHECK(lz.nodes > 1000);
  }

  TEST_CASE("barrier residual sign at large t") {
    const PhiSolution phi = solve_phi(kBiweight, 120.0, kH);
    const BarrierParams p;
    const double t = 8e6;
    const OmegaProfile om = omega_for_halfline(kBiweight, phi.field.grid, t, std::pow(t, p.beta));
    const BarrierResidual plus = barrier_residual(kBiweight, phi, om, t, p, BarrierSign::plus);
    const BarrierResidual minus = barrier_residual(kBiweight, phi, om, t, p, BarrierSign::minus);
    CHECK(plus.min_residual >= 0.0);
    CHECK(minus.max_residual <= 0.0);
    CHECK(plus.x_hi == Approx(std::pow(t, 0.3)));
  }
}
