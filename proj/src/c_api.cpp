#include "simdiag/simdiag.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simdiag/data_io.hpp"
#include "simdiag/error.hpp"
#include "simdiag/eval.hpp"
#include "simdiag/experiment.hpp"
#include "simdiag/features.hpp"
#include "simdiag/joint_diag.hpp"
#include "simdiag/synth.hpp"

struct sd_dataset {
  simdiag::LabeledDataset data;
  std::string task;
  std::vector<std::string> label_names;  // index = label value
  std::vector<std::string> warnings;
  std::optional<simdiag::SynthTruth> truth;
};

struct sd_joint_result {
  simdiag::JointDiagResult result;
  std::vector<std::string> sample_ids;
};

struct sd_report {
  simdiag::EvalReport report;
  std::string json;
  std::string csv;
};

namespace {

thread_local std::string g_last_error;

sd_status to_status(simdiag::ErrorCategory c) {
  using simdiag::ErrorCategory;
  switch (c) {
    case ErrorCategory::invalid_argument: return SD_ERR_INVALID_ARGUMENT;
    case ErrorCategory::dimension_mismatch: return SD_ERR_DIMENSION_MISMATCH;
    case ErrorCategory::non_finite: return SD_ERR_NON_FINITE;
    case ErrorCategory::parse_error: return SD_ERR_PARSE;
    case ErrorCategory::io_error: return SD_ERR_IO;
    case ErrorCategory::not_converged: return SD_ERR_NOT_CONVERGED;
    case ErrorCategory::single_class: return SD_ERR_SINGLE_CLASS;
    case ErrorCategory::diverged: return SD_ERR_DIVERGED;
    case ErrorCategory::no_valid_repeat: return SD_ERR_NO_VALID_REPEAT;
  }
  return SD_ERR_INTERNAL;
}

template <class F>
sd_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return SD_OK;
  } catch (const simdiag::Error& e) {
    g_last_error = e.what();
    return to_status(e.category());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SD_ERR_INTERNAL;
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw simdiag::Error(simdiag::ErrorCategory::invalid_argument, message);
}

simdiag::JointDiagConfig to_cpp(const sd_joint_config* cfg) {
  simdiag::JointDiagConfig out;
  if (cfg != nullptr) {
    out.rotation_tol = cfg->rotation_tol;
    out.off_tol = cfg->off_tol;
    out.max_sweeps = cfg->max_sweeps;
    out.normalize_inputs = cfg->normalize_inputs != 0;
  }
  return out;
}

simdiag::FeatureMethod to_cpp(sd_feature_method m) {
  require(m == SD_FEATURES_JOINT_DIAG || m == SD_FEATURES_EIGEN, "unknown feature method");
  return m == SD_FEATURES_JOINT_DIAG ? simdiag::FeatureMethod::joint_diag : simdiag::FeatureMethod::eigen;
}

simdiag::ModelKind to_cpp(sd_model_kind k) {
  require(k == SD_MODEL_LOGREG || k == SD_MODEL_SGD, "unknown model kind");
  return k == SD_MODEL_LOGREG ? simdiag::ModelKind::logreg : simdiag::ModelKind::sgd;
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

size_t copy_out(const double* src, size_t count, double* out, size_t capacity) {
  if (out != nullptr && capacity >= count) std::memcpy(out, src, count * sizeof(double));
  return count;
}

}  // namespace

extern "C" {

SIMDIAG_API uint32_t sd_abi_version(void) { return SIMDIAG_ABI_VERSION; }

SIMDIAG_API const char* sd_status_name(sd_status status) {
  switch (status) {
    case SD_OK: return "ok";
    case SD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SD_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case SD_ERR_NON_FINITE: return "non_finite";
    case SD_ERR_PARSE: return "parse_error";
    case SD_ERR_IO: return "io_error";
    case SD_ERR_NOT_CONVERGED: return "not_converged";
    case SD_ERR_SINGLE_CLASS: return "single_class";
    case SD_ERR_DIVERGED: return "diverged";
    case SD_ERR_NO_VALID_REPEAT: return "no_valid_repeat";
    case SD_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

SIMDIAG_API const char* sd_last_error(void) { return g_last_error.c_str(); }

SIMDIAG_API void sd_string_free(char* text) { std::free(text); }

SIMDIAG_API void sd_joint_config_default(sd_joint_config* cfg) {
  if (cfg == nullptr) return;
  const simdiag::JointDiagConfig d;
  *cfg = {d.rotation_tol, d.off_tol, d.max_sweeps, d.normalize_inputs ? 1 : 0};
}

SIMDIAG_API void sd_cv_config_default(sd_cv_config* cfg) {
  if (cfg == nullptr) return;
  const simdiag::CVConfig d;
  *cfg = {d.folds, d.repeats, d.grouped ? 1 : 0, d.transductive ? 1 : 0, d.inner_folds, d.seed};
}

SIMDIAG_API void sd_train_config_default(sd_model_kind kind, sd_train_config* cfg) {
  if (cfg == nullptr) return;
  const simdiag::TrainConfig d =
      simdiag::default_train_config(kind == SD_MODEL_SGD ? simdiag::ModelKind::sgd : simdiag::ModelKind::logreg);
  *cfg = {d.max_iterations, d.initial_step, d.decay, d.tolerance};
}

SIMDIAG_API void sd_load_options_default(sd_load_options* opts) {
  if (opts == nullptr) return;
  const simdiag::LoadOptions d;
  *opts = {d.asymmetry_tol, d.normalize ? 1 : 0};
}

SIMDIAG_API void sd_synth_spec_default(sd_synth_spec* spec) {
  if (spec == nullptr) return;
  *spec = {20, 50, 3, 6.0, 2.0, 1.0, 0.05, 0.0, 0};
}

SIMDIAG_API sd_status sd_dataset_load(const char* manifest_path, const char* task, const sd_load_options* opts,
                                      sd_dataset** out) {
  return guarded([&] {
    require(manifest_path != nullptr && task != nullptr && out != nullptr, "sd_dataset_load: null argument");
    simdiag::LoadOptions options;
    if (opts != nullptr) options = {opts->asymmetry_tol, opts->normalize != 0};
    const simdiag::TaskPairing pairing = simdiag::parse_task(task);
    simdiag::LoadedDataset loaded = simdiag::load_dataset(manifest_path, pairing, options);
    *out = new sd_dataset{std::move(loaded.dataset), pairing.name(), {pairing.negative, pairing.positive},
                          std::move(loaded.warnings), std::nullopt};
  });
}

SIMDIAG_API sd_status sd_dataset_create(const double* matrices, size_t n, size_t d, const int* labels,
                                        const char* const* subject_ids, double asymmetry_tol, sd_dataset** out) {
  return guarded([&] {
    require(matrices != nullptr && labels != nullptr && out != nullptr, "sd_dataset_create: null argument");
    require(n >= 1 && d >= 1, "sd_dataset_create: need n >= 1 and d >= 1");
    std::vector<simdiag::SymMatrix> set;
    std::vector<std::string> warnings, subjects;
    for (size_t i = 0; i < n; ++i) {
      const simdiag::Matrix raw = Eigen::Map<const simdiag::Matrix>(matrices + i * d * d, static_cast<Eigen::Index>(d),
                                                                    static_cast<Eigen::Index>(d));
      auto sym = simdiag::symmetrize(raw, asymmetry_tol);
      if (sym.asymmetry_warning) warnings.push_back("matrix " + std::to_string(i) + " symmetrized");
      set.push_back(std::move(sym.matrix));
      subjects.emplace_back(subject_ids != nullptr ? subject_ids[i] : std::to_string(i));
    }
    std::vector<int> label_vec(labels, labels + n);
    *out = new sd_dataset{simdiag::LabeledDataset(simdiag::SymmetricMatrixSet(std::move(set)), std::move(label_vec),
                                                  std::move(subjects)),
                          "positive-vs-negative", {"negative", "positive"}, std::move(warnings), std::nullopt};
  });
}

SIMDIAG_API sd_status sd_dataset_synthesize(const sd_synth_spec* spec, sd_dataset** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "sd_dataset_synthesize: null argument");
    const simdiag::SynthSpec cpp =
        simdiag::two_class_spec(spec->dim, spec->per_class, spec->signal_coords, spec->separation, spec->base_gap,
                                spec->spread, spec->sigma, spec->basis_jitter, spec->seed);
    simdiag::SynthOutput generated = simdiag::generate(cpp);
    const std::string negative = simdiag::synth_label_name(0);
    const std::string positive = simdiag::synth_label_name(1);
    *out = new sd_dataset{std::move(generated.dataset), positive + "-vs-" + negative, {negative, positive}, {},
                          std::move(generated.truth)};
  });
}

SIMDIAG_API void sd_dataset_free(sd_dataset* dataset) { delete dataset; }

SIMDIAG_API size_t sd_dataset_count(const sd_dataset* dataset) { return dataset ? dataset->data.size() : 0; }

SIMDIAG_API size_t sd_dataset_dim(const sd_dataset* dataset) { return dataset ? dataset->data.matrices().dim() : 0; }

SIMDIAG_API const char* sd_dataset_task(const sd_dataset* dataset) { return dataset ? dataset->task.c_str() : ""; }

SIMDIAG_API size_t sd_dataset_warning_count(const sd_dataset* dataset) {
  return dataset ? dataset->warnings.size() : 0;
}

SIMDIAG_API const char* sd_dataset_warning(const sd_dataset* dataset, size_t index) {
  if (dataset == nullptr || index >= dataset->warnings.size()) return nullptr;
  return dataset->warnings[index].c_str();
}

SIMDIAG_API sd_status sd_dataset_write(const sd_dataset* dataset, const char* dir) {
  return guarded([&] {
    require(dataset != nullptr && dir != nullptr, "sd_dataset_write: null argument");
    simdiag::write_dataset(dir, dataset->data, dataset->label_names);
    if (dataset->truth) {
      simdiag::write_text_atomic(std::filesystem::path(dir) / "truth.json",
                                 simdiag::truth_to_json(*dataset->truth, dataset->data));
    }
  });
}

SIMDIAG_API sd_status sd_dataset_write_features(const sd_dataset* dataset, sd_feature_method method,
                                                const sd_joint_config* cfg, const char* csv_path) {
  return guarded([&] {
    require(dataset != nullptr && csv_path != nullptr, "sd_dataset_write_features: null argument");
    const auto& set = dataset->data.matrices();
    const simdiag::FeatureMatrix features = to_cpp(method) == simdiag::FeatureMethod::joint_diag
                                                ? simdiag::joint_features(set, to_cpp(cfg)).features
                                                : simdiag::eigen_features(set);
    simdiag::write_text_atomic(csv_path, simdiag::format_feature_csv(dataset->data, features));
  });
}

SIMDIAG_API sd_status sd_dataset_inspect(const sd_dataset* dataset, char** out_json) {
  return guarded([&] {
    require(dataset != nullptr && out_json != nullptr, "sd_dataset_inspect: null argument");
    *out_json = duplicate(simdiag::inspect_to_json(simdiag::inspect(dataset->data.matrices())));
  });
}

SIMDIAG_API sd_status sd_joint_diagonalize(const sd_dataset* dataset, const sd_joint_config* cfg,
                                           sd_sweep_callback callback, void* user, sd_joint_result** out) {
  return guarded([&] {
    require(dataset != nullptr && out != nullptr, "sd_joint_diagonalize: null argument");
    simdiag::SweepObserver observer;
    if (callback != nullptr) {
      observer = [callback, user](const simdiag::SweepInfo& info) {
        callback(info.sweep, info.off_ratio, info.rotations, user);
      };
    }
    simdiag::JointDiagResult result = simdiag::joint_diagonalize(dataset->data.matrices(), to_cpp(cfg), observer);
    *out = new sd_joint_result{std::move(result), dataset->data.sample_ids()};
  });
}

SIMDIAG_API void sd_joint_result_free(sd_joint_result* result) { delete result; }

SIMDIAG_API int sd_joint_result_converged(const sd_joint_result* result) {
  return result && result->result.converged ? 1 : 0;
}

SIMDIAG_API int sd_joint_result_sweeps(const sd_joint_result* result) { return result ? result->result.sweeps_used : 0; }

SIMDIAG_API double sd_joint_result_off_ratio(const sd_joint_result* result) {
  return result ? result->result.off_ratio() : 0.0;
}

SIMDIAG_API size_t sd_joint_result_history_length(const sd_joint_result* result) {
  return result ? result->result.off_history.size() : 0;
}

SIMDIAG_API size_t sd_joint_result_copy_basis(const sd_joint_result* result, double* out, size_t capacity) {
  if (result == nullptr) return 0;
  const auto& m = result->result.basis.columns();
  return copy_out(m.data(), static_cast<size_t>(m.size()), out, capacity);
}

SIMDIAG_API size_t sd_joint_result_copy_diagonals(const sd_joint_result* result, double* out, size_t capacity) {
  if (result == nullptr) return 0;
  const auto& m = result->result.diagonals;
  return copy_out(m.data(), static_cast<size_t>(m.size()), out, capacity);
}

SIMDIAG_API size_t sd_joint_result_copy_history(const sd_joint_result* result, double* out, size_t capacity) {
  if (result == nullptr) return 0;
  const auto& h = result->result.off_history;
  return copy_out(h.data(), h.size(), out, capacity);
}

SIMDIAG_API sd_status sd_joint_result_write_json(const sd_joint_result* result, const char* path) {
  return guarded([&] {
    require(result != nullptr && path != nullptr, "sd_joint_result_write_json: null argument");
    simdiag::write_text_atomic(path, simdiag::joint_result_to_json(result->result, result->sample_ids));
  });
}

SIMDIAG_API size_t sd_format_sweep_line(int sweep, double off_ratio, int rotations, char* buf, size_t capacity) {
  const std::string line = simdiag::format_sweep_line({sweep, off_ratio, rotations});
  if (buf != nullptr && capacity > 0) {
    const size_t n = std::min(line.size(), capacity - 1);
    std::memcpy(buf, line.data(), n);
    buf[n] = '\0';
  }
  return line.size();
}

SIMDIAG_API sd_status sd_evaluate(const sd_dataset* dataset, const char* task_name, sd_feature_method method,
                                  sd_model_kind model, const sd_cv_config* cv, const sd_joint_config* joint,
                                  const sd_train_config* train, sd_report** out) {
  return guarded([&] {
    require(dataset != nullptr && out != nullptr, "sd_evaluate: null argument");
    simdiag::PipelineConfig pipeline;
    pipeline.task = task_name != nullptr ? task_name : dataset->task;
    pipeline.feature_method = to_cpp(method);
    pipeline.model = to_cpp(model);
    if (cv != nullptr) {
      pipeline.cv = {cv->folds, cv->repeats, cv->grouped != 0, cv->transductive != 0, cv->seed, cv->inner_folds};
    }
    pipeline.joint = to_cpp(joint);
    pipeline.train = simdiag::default_train_config(pipeline.model);
    if (train != nullptr) {
      pipeline.train.max_iterations = train->max_iterations;
      pipeline.train.initial_step = train->initial_step;
      pipeline.train.decay = train->decay;
      pipeline.train.tolerance = train->tolerance;
    }
    simdiag::EvalReport report;
    try {
      report = simdiag::run_cv(dataset->data, pipeline);
    } catch (const simdiag::Error& e) {
      throw simdiag::with_stage("evaluate", e);
    }
    report.warnings.insert(report.warnings.begin(), dataset->warnings.begin(), dataset->warnings.end());
    std::string json = simdiag::report_to_json(report);
    std::string csv = simdiag::report_csv_header() + simdiag::report_csv_row(report);
    *out = new sd_report{std::move(report), std::move(json), std::move(csv)};
  });
}

SIMDIAG_API void sd_report_free(sd_report* report) { delete report; }

SIMDIAG_API double sd_report_mean_auc(const sd_report* report) { return report ? report->report.mean_auc : 0.0; }

SIMDIAG_API double sd_report_std_auc(const sd_report* report) { return report ? report->report.std_auc : 0.0; }

SIMDIAG_API const char* sd_report_json(const sd_report* report) { return report ? report->json.c_str() : ""; }

SIMDIAG_API const char* sd_report_csv(const sd_report* report) { return report ? report->csv.c_str() : ""; }

SIMDIAG_API sd_status sd_report_write(const sd_report* report, const char* json_path, const char* csv_path) {
  return guarded([&] {
    require(report != nullptr, "sd_report_write: null report");
    if (json_path != nullptr) simdiag::write_text_atomic(json_path, report->json);
    if (csv_path != nullptr) simdiag::write_text_atomic(csv_path, report->csv);
  });
}

}  // extern "C"
