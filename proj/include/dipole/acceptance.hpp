#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dipole/experiment.hpp"
#include "dipole/io.hpp"

namespace dipole {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  json data;
};

struct AcceptanceOptions {
  std::set<int> only;  // empty: all criteria
};

/// Runs the acceptance criteria in order, reporting each result as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// Criteria 2 to 6 evaluated on an existing run (which must carry a report).
/// Time windows come from the run: fit window for rates and the E_global
/// ratio, t_final for the inner profile.
std::vector<CriterionResult> evaluate_run(const ExperimentConfig& cfg, const ExperimentResult& res);

/// "PASS  3  momenta rates: ..." style line.
std::string format_result_line(const CriterionResult& r);

}  // namespace dipole
