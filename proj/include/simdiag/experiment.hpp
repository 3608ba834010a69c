#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "simdiag/data_io.hpp"
#include "simdiag/eval.hpp"

namespace simdiag {

struct ExperimentConfig {
  std::filesystem::path manifest;
  TaskPairing task;
  PipelineConfig pipeline;  // pipeline.task is overwritten with task.name()
  LoadOptions load;
  std::filesystem::path report_json;  // empty: not written
  std::filesystem::path report_csv;   // empty: not written
};

struct ExperimentOutcome {
  EvalReport report;
  std::vector<std::string> load_warnings;
};

/// load -> features -> repeated CV -> JSON/CSV. Errors carry the stage name.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

struct InspectSummary {
  std::size_t count = 0;
  std::size_t dim = 0;
  double commutation_residual = 0.0;  // 0 for a single matrix
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double mean_trace = 0.0;
  double mean_frobenius = 0.0;
  Vector mean_spectrum;  // per-rank mean of descending eigenvalues
};

InspectSummary inspect(const SymmetricMatrixSet& set);
std::string inspect_to_json(const InspectSummary& summary);

}  // namespace simdiag
