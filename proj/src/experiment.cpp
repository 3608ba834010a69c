#include "simdiag/experiment.hpp"

#include <algorithm>

#include <json.hpp>

#include "simdiag/error.hpp"

namespace simdiag {

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  LoadedDataset loaded = [&] {
    try {
      return load_dataset(cfg.manifest, cfg.task, cfg.load);
    } catch (const Error& e) {
      throw with_stage("load", e);
    }
  }();

  PipelineConfig pipeline = cfg.pipeline;
  pipeline.task = cfg.task.name();
  EvalReport report = [&] {
    try {
      return run_cv(loaded.dataset, pipeline);
    } catch (const Error& e) {
      throw with_stage("evaluate", e);
    }
  }();
  report.warnings.insert(report.warnings.begin(), loaded.warnings.begin(), loaded.warnings.end());

  try {
    if (!cfg.report_json.empty()) write_text_atomic(cfg.report_json, report_to_json(report));
    if (!cfg.report_csv.empty()) write_text_atomic(cfg.report_csv, report_csv_header() + report_csv_row(report));
  } catch (const Error& e) {
    throw with_stage("write", e);
  }
  return {std::move(report), std::move(loaded.warnings)};
}

InspectSummary inspect(const SymmetricMatrixSet& set) {
  InspectSummary s;
  s.count = set.count();
  s.dim = set.dim();
  s.commutation_residual = set.count() >= 2 ? commutation_residual(set) : 0.0;
  const FeatureMatrix spectra = eigen_features(set);
  s.min_eigenvalue = spectra.values.minCoeff();
  s.max_eigenvalue = spectra.values.maxCoeff();
  s.mean_spectrum = spectra.values.colwise().mean().transpose();
  double trace = 0.0, frob = 0.0;
  for (const auto& m : set.matrices()) {
    trace += m.values().trace();
    frob += m.values().norm();
  }
  s.mean_trace = trace / static_cast<double>(s.count);
  s.mean_frobenius = frob / static_cast<double>(s.count);
  return s;
}

std::string inspect_to_json(const InspectSummary& s) {
  nlohmann::json j;
  j["count"] = s.count;
  j["dim"] = s.dim;
  j["commutation_residual"] = s.commutation_residual;
  j["min_eigenvalue"] = s.min_eigenvalue;
  j["max_eigenvalue"] = s.max_eigenvalue;
  j["mean_trace"] = s.mean_trace;
  j["mean_frobenius"] = s.mean_frobenius;
  j["mean_spectrum"] = std::vector<double>(s.mean_spectrum.data(), s.mean_spectrum.data() + s.mean_spectrum.size());
  return j.dump(2) + "\n";
}

}  // namespace simdiag
