/*
 * simdiag C API.
 *
 * Every handle is opaque and owned by the caller once returned; release it
 * with the matching *_free function. Functions returning sd_status leave a
 * thread-local message retrievable with sd_last_error() on failure. Output
 * handles are left untouched when a call fails.
 */
#ifndef SIMDIAG_H
#define SIMDIAG_H

#include <stddef.h>
#include <stdint.h>

#if defined(SIMDIAG_BUILDING_LIBRARY)
#define SIMDIAG_API __attribute__((visibility("default")))
#else
#define SIMDIAG_API
#endif

#define SIMDIAG_ABI_VERSION 1u

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sd_status {
  SD_OK = 0,
  SD_ERR_INVALID_ARGUMENT = 1,
  SD_ERR_DIMENSION_MISMATCH = 2,
  SD_ERR_NON_FINITE = 3,
  SD_ERR_PARSE = 4,
  SD_ERR_IO = 5,
  SD_ERR_NOT_CONVERGED = 6,
  SD_ERR_SINGLE_CLASS = 7,
  SD_ERR_DIVERGED = 8,
  SD_ERR_NO_VALID_REPEAT = 9,
  SD_ERR_INTERNAL = 10
} sd_status;

typedef enum sd_feature_method { SD_FEATURES_JOINT_DIAG = 0, SD_FEATURES_EIGEN = 1 } sd_feature_method;
typedef enum sd_model_kind { SD_MODEL_LOGREG = 0, SD_MODEL_SGD = 1 } sd_model_kind;

typedef struct sd_dataset sd_dataset;
typedef struct sd_joint_result sd_joint_result;
typedef struct sd_report sd_report;

typedef struct sd_joint_config {
  double rotation_tol;
  double off_tol;
  int max_sweeps;
  int normalize_inputs;
} sd_joint_config;

typedef struct sd_cv_config {
  int folds;
  int repeats;
  int grouped;
  int transductive;
  int inner_folds;
  uint64_t seed;
} sd_cv_config;

typedef struct sd_train_config {
  int max_iterations;
  double initial_step;
  double decay;
  double tolerance;
} sd_train_config;

typedef struct sd_load_options {
  double asymmetry_tol;
  int normalize;
} sd_load_options;

/* Two-class synthetic ensemble; see the README for the generative model. */
typedef struct sd_synth_spec {
  size_t dim;
  size_t per_class;
  size_t signal_coords;
  double separation;
  double base_gap;
  double spread;
  double sigma;
  double basis_jitter;
  uint64_t seed;
} sd_synth_spec;

typedef void (*sd_sweep_callback)(int sweep, double off_ratio, int rotations, void* user);

SIMDIAG_API uint32_t sd_abi_version(void);
SIMDIAG_API const char* sd_status_name(sd_status status);
SIMDIAG_API const char* sd_last_error(void);
SIMDIAG_API void sd_string_free(char* text);

SIMDIAG_API void sd_joint_config_default(sd_joint_config* cfg);
SIMDIAG_API void sd_cv_config_default(sd_cv_config* cfg);
SIMDIAG_API void sd_train_config_default(sd_model_kind kind, sd_train_config* cfg);
SIMDIAG_API void sd_load_options_default(sd_load_options* opts);
SIMDIAG_API void sd_synth_spec_default(sd_synth_spec* spec);

/* Datasets. `task` reads "<positive>-vs-<negative>". */
SIMDIAG_API sd_status sd_dataset_load(const char* manifest_path, const char* task,
                                      const sd_load_options* opts, sd_dataset** out);
/* `matrices` holds n row-major d*d blocks; `subject_ids` may be NULL. */
SIMDIAG_API sd_status sd_dataset_create(const double* matrices, size_t n, size_t d, const int* labels,
                                        const char* const* subject_ids, double asymmetry_tol,
                                        sd_dataset** out);
SIMDIAG_API sd_status sd_dataset_synthesize(const sd_synth_spec* spec, sd_dataset** out);
SIMDIAG_API void sd_dataset_free(sd_dataset* dataset);
SIMDIAG_API size_t sd_dataset_count(const sd_dataset* dataset);
SIMDIAG_API size_t sd_dataset_dim(const sd_dataset* dataset);
SIMDIAG_API const char* sd_dataset_task(const sd_dataset* dataset);
SIMDIAG_API size_t sd_dataset_warning_count(const sd_dataset* dataset);
SIMDIAG_API const char* sd_dataset_warning(const sd_dataset* dataset, size_t index);
/* Writes manifest.tsv, matrices/ and, for synthetic datasets, truth.json. */
SIMDIAG_API sd_status sd_dataset_write(const sd_dataset* dataset, const char* dir);
SIMDIAG_API sd_status sd_dataset_write_features(const sd_dataset* dataset, sd_feature_method method,
                                                const sd_joint_config* cfg, const char* csv_path);
/* JSON summary; release with sd_string_free. */
SIMDIAG_API sd_status sd_dataset_inspect(const sd_dataset* dataset, char** out_json);

/* Joint diagonalization. `callback` may be NULL. */
SIMDIAG_API sd_status sd_joint_diagonalize(const sd_dataset* dataset, const sd_joint_config* cfg,
                                           sd_sweep_callback callback, void* user,
                                           sd_joint_result** out);
SIMDIAG_API void sd_joint_result_free(sd_joint_result* result);
SIMDIAG_API int sd_joint_result_converged(const sd_joint_result* result);
SIMDIAG_API int sd_joint_result_sweeps(const sd_joint_result* result);
SIMDIAG_API double sd_joint_result_off_ratio(const sd_joint_result* result);
SIMDIAG_API size_t sd_joint_result_history_length(const sd_joint_result* result);
/* Copy routines return the number of doubles required; nothing is written
 * when `capacity` is smaller. */
SIMDIAG_API size_t sd_joint_result_copy_basis(const sd_joint_result* result, double* out, size_t capacity);
SIMDIAG_API size_t sd_joint_result_copy_diagonals(const sd_joint_result* result, double* out, size_t capacity);
SIMDIAG_API size_t sd_joint_result_copy_history(const sd_joint_result* result, double* out, size_t capacity);
SIMDIAG_API sd_status sd_joint_result_write_json(const sd_joint_result* result, const char* path);
/* "sweep=<t> off_ratio=<value> rotations=<count>"; returns the untruncated length. */
SIMDIAG_API size_t sd_format_sweep_line(int sweep, double off_ratio, int rotations, char* buf, size_t capacity);

/* Repeated cross-validated evaluation. `task_name` NULL uses the dataset's task. */
SIMDIAG_API sd_status sd_evaluate(const sd_dataset* dataset, const char* task_name, sd_feature_method method,
                                  sd_model_kind model, const sd_cv_config* cv, const sd_joint_config* joint,
                                  const sd_train_config* train, sd_report** out);
SIMDIAG_API void sd_report_free(sd_report* report);
SIMDIAG_API double sd_report_mean_auc(const sd_report* report);
SIMDIAG_API double sd_report_std_auc(const sd_report* report);
SIMDIAG_API const char* sd_report_json(const sd_report* report);
SIMDIAG_API const char* sd_report_csv(const sd_report* report);
/* Either path may be NULL. */
SIMDIAG_API sd_status sd_report_write(const sd_report* report, const char* json_path, const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* SIMDIAG_H */
