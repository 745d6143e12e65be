#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dipole/grid_field.hpp"
#include "dipole/io.hpp"

namespace dipole {

/// indicator[a, b], hat[center, half_width], gaussian_truncated[center, sigma]
/// or csv (piecewise-linear through the file's (x, value) rows).
struct InitialDataSpec {
  std::string generator = "indicator";
  std::vector<double> params{1.0, 2.0};
  std::string csv_path;

  /// "indicator:1:2", "hat:1:0.1", "gaussian_truncated:4:0.5", "csv:path".
  static InitialDataSpec parse(const std::string& text);
  static InitialDataSpec from_json(const json& j);
  json to_json() const;

  /// Right end of the support (for domain sizing). Reads the CSV if needed.
  double support_right() const;
  /// Every violated well-formedness rule (empty when valid).
  std::vector<std::string> violations() const;
};

struct ExactMoments {
  double M;
  double M1;
  double M2;
};

struct InitialData {
  Field u0;
  std::optional<ExactMoments> exact;
};

/// Generators are truncated at 8 sigma; hat and gaussian are rescaled to unit
/// discrete mass, indicator uses exact cell averages.
InitialData make_initial_data(const InitialDataSpec& spec, const Grid& g);

}  // namespace dipole
