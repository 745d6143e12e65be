#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dipole/experiment.hpp"
#include "dipole/io.hpp"

using namespace dipole;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dipole_tests_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

ExperimentConfig short_config(const fs::path& out) {
  ExperimentConfig c;
  c.h = 1.0 / 16.0;
  c.t_final = 32.0;
  c.report.fit_lo = 4.0;
  c.report.fit_hi = 32.0;
  c.out_dir = out.string();
  return c;
}

}  // namespace

TEST_SUITE("cli_runner") {
  TEST_CASE("numbers and fields round trip") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_number(v)) == v);
    const fs::path p = scratch("field.csv");
    const Field u = Field::sample(Grid::cell_centred(-1.0, 3.0, 0.125), [](double x) { return std::sin(x) / 3.0; });
    write_field_csv(p, u);
    const Field r = read_field_csv(p);
    CHECK(r.grid == u.grid);
    CHECK(r.values == u.values);
    const json gj = grid_to_json(u.grid);
    CHECK(gj.contains("x_min"));
    CHECK(gj.contains("x_max"));
    CHECK(gj.contains("h"));
    CHECK(grid_from_json(gj) == u.grid);
  }

  TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  }

  TEST_CASE("initial data generators") {
    const Grid g = Grid::half_line(1.0, 8.0, 1.0 / 64.0);
    const InitialData ind = make_initial_data(InitialDataSpec::parse("indicator:1:2"), g);
    REQUIRE(ind.exact);
    CHECK(ind.exact->M == 1.0);
    CHECK(ind.exact->M1 == 1.5);
    CHECK(ind.exact->M2 == Approx(7.0 / 3.0).epsilon(1e-15));
    const InitialData hat = make_initial_data(InitialDataSpec::parse("hat:1:0.1"), g);
    CHECK(std::abs(moment(hat.u0, 0) - 1.0) < 1e-12);
    const InitialData gs = make_initial_data(InitialDataSpec::parse("gaussian_truncated:3:0.25"), g);
    CHECK(std::abs(moment(gs.u0, 0) - 1.0) < 1e-12);
    CHECK(vanishes_on_exterior(gs.u0));

    CHECK_THROWS_WITH_AS(InitialDataSpec::parse("hat:0.05:0.1"), doctest::Contains("x >= 0"), std::invalid_argument);
    CHECK_THROWS(InitialDataSpec::parse("indicator:-1:2"));
    CHECK_THROWS(InitialDataSpec::parse("indicator:2:1"));
    CHECK_THROWS(InitialDataSpec::parse("triangle:1:2"));

    const fs::path bad = scratch("negative.csv");
    write_text(bad, "x,value\n0,0\n1,1\n2,-0.5\n3,0\n");
    CHECK_THROWS_WITH_AS(make_initial_data(InitialDataSpec::parse("csv:" + bad.string()), g), doctest::Contains("nonnegative"), std::invalid_argument);
    const fs::path good = scratch("good.csv");
    write_text(good, "x,value\n0,0\n1,1\n2,0\n");
    const InitialData c = make_initial_data(InitialDataSpec::parse("csv:" + good.string()), g);
    CHECK(moment(c.u0, 0) == Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("config validation lists every violation") {
    json j = ExperimentConfig{}.to_json();
    j["integrator"]["dt"] = -1.0;
    j["initial_data"] = json{{"generator", "indicator"}, {"params", {-1.0, 2.0}}};
    j["grid"]["h"] = 0.3;
    const ExperimentConfig c = ExperimentConfig::from_json(j);
    const auto v = c.violations();
    CHECK(v.size() >= 3);
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("x >= 0"), std::invalid_argument);
    json extra = ExperimentConfig{}.to_json();
    extra["integrator"]["steps"] = 10;
    CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(extra), doctest::Contains("steps"), std::invalid_argument);
    const ExperimentConfig def = ExperimentConfig::from_json(ExperimentConfig{}.to_json());
    CHECK(def.to_json() == ExperimentConfig{}.to_json());
  }

  TEST_CASE("experiment outputs are deterministic and cached") {
    const fs::path a = scratch("run_a"), b = scratch("run_b"), cache = scratch("cache");
    ExperimentConfig c = short_config(a);
    c.cache_dir = cache.string();
    const ExperimentResult ra = run_experiment(c);
    CHECK_FALSE(ra.phi_from_cache);
    c.out_dir = b.string();
    const ExperimentResult rb = run_experiment(c);
    CHECK(rb.phi_from_cache);
    CHECK(ra.manifest_hash == rb.manifest_hash);
    CHECK_FALSE(ra.manifest_hash.empty());
    for (const char* f : {"phi.csv", "momenta.csv", "errors.csv", "report.json", "manifest.json"}) CHECK(fs::exists(a / f));
    CHECK(read_text(a / "momenta.csv") == read_text(b / "momenta.csv"));
    const json rep = read_json(a / "report.json");
    CHECK(rep.contains("asymptotics"));
    CHECK(rep.contains("m1star"));

    ExperimentConfig loaded;
    const Trajectory tr = load_trajectory(a, &loaded);
    CHECK(tr.snapshots.size() == ra.trajectory.snapshots.size());
    CHECK(tr.snapshots.back().u.values == ra.trajectory.snapshots.back().u.values);
    CHECK(loaded.t_final == c.t_final);
    const PhiSolution p = phi_from_csv(a / "phi.csv");
    CHECK(p.field.values == ra.phi.field.values);
    CHECK(p.offset_at_edge == Approx(ra.phi.offset_at_edge).epsilon(1e-12));
  }

  TEST_CASE("failed runs leave nothing behind") {
    const fs::path out = scratch("failing");
    ExperimentConfig c = short_config(out);
    c.x_max = 6.0;  // mass reaches the edge
    CHECK_THROWS(run_experiment(c));
    CHECK_FALSE(fs::exists(out));
    for (const auto& e : fs::directory_iterator(out.parent_path())) CHECK(e.path().filename().string().find("failing") == std::string::npos);
  }

  TEST_CASE("sweep") {
    const fs::path out = scratch("sweep");
    SweepSpec s;
    ExperimentConfig base = short_config("");
    base.compute_report = false;
    base.t_final = 8.0;
    s.base = base.to_json();
    s.base.erase("output");
    s.parameter = "kernel.d";
    s.values = {json(1.0), json(0.5), json(-1.0)};
    CHECK(run_sweep(s, out) == 1);
    const json summary = read_json(out / "sweep.json");
    REQUIRE(summary.at("runs").size() == 3);
    CHECK(fs::exists(out / "run_000" / "manifest.json"));
    CHECK(fs::exists(out / "run_001" / "manifest.json"));
  }
}
