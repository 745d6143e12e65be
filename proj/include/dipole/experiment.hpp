#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dipole/diagnostics.hpp"
#include "dipole/initial_data.hpp"
#include "dipole/io.hpp"

namespace dipole {

struct KernelSpec {
  std::string family = "biweight";
  double d = 1.0;
  std::string csv_path;  // tabulated kernels

  Kernel build() const;
  static KernelSpec from_json(const json& j);
  json to_json() const;
};

struct ExperimentConfig {
  KernelSpec kernel;
  double h = 1.0 / 32.0;
  std::optional<double> x_max;  // empty: sized from the support, q and t_final
  InitialDataSpec initial;
  Integrator integrator = Integrator::rk4;
  ConvolutionMethod convolution = ConvolutionMethod::direct;
  double dt = 0.1;
  double t_final = 4096.0;
  double snapshot_t0 = 1.0;  // geometric schedule t0 2^{k/2}
  double leak_tol = 1e-9;
  double phi_tol = 1e-10;
  bool compute_report = true;
  ReportOptions report;
  std::string out_dir;
  std::string cache_dir;  // empty: no stationary-profile cache
  std::uint64_t rng_seed = 0;

  static ExperimentConfig from_json(const json& j);
  json to_json() const;

  /// Every violated invariant, in a stable order.
  std::vector<std::string> violations() const;
  /// Throws std::invalid_argument joining all violations.
  void validate() const;

  double resolved_x_max() const;
  std::vector<double> snapshot_times() const;
};

struct ExperimentResult {
  PhiSolution phi;
  Trajectory trajectory;
  double m1star = 0.0;
  std::vector<MomentaRecord> momenta;
  std::optional<AsymptoticReport> report;
  std::optional<ExactMoments> exact_moments;
  bool phi_from_cache = false;
  std::string manifest_hash;  // empty when nothing was written
};

/// Stationary profile for (kernel, h, x_max, tol), read from or written to
/// cache_dir when it is set. The key is a content hash of those inputs.
PhiSolution cached_phi(const Kernel& k, const KernelSpec& spec, double h, double x_max, double tol, const std::string& cache_dir,
                       bool* hit = nullptr);

/// Validates, runs stationary solve, evolution and diagnostics; when out_dir
/// is set writes phi.csv, snapshots/, momenta.csv, errors.csv, report.json
/// and manifest.json. Outputs are staged in a sibling ".partial" directory
/// and only moved into place on success.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

json report_to_json(const AsymptoticReport& rep);
json momenta_to_json(const std::vector<MomentaRecord>& m);

/// PhiSolution from a (x, phi[, phi - x]) CSV; the linear extension offset is
/// taken from the last row.
PhiSolution phi_from_csv(const std::filesystem::path& path);
void write_phi_csv(const std::filesystem::path& path, const PhiSolution& phi);

/// Trajectory written by run_experiment (manifest.json plus snapshots/).
Trajectory load_trajectory(const std::filesystem::path& dir, ExperimentConfig* cfg = nullptr);

struct SweepSpec {
  json base;
  std::string parameter;  // dotted path into the config, e.g. "kernel.d"
  std::vector<json> values;

  static SweepSpec from_json(const json& j);
};

/// Runs one experiment per value, concurrently, into out_dir/run_NNN, and
/// writes out_dir/sweep.json. Returns the number of failed runs.
std::size_t run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir);

}  // namespace dipole
