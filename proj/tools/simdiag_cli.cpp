// simdiag command line: synth, diagonalize, features, evaluate, inspect.
// Talks to the library only through the C API.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "simdiag/simdiag.h"

namespace {

struct Failure {
  sd_status status;
};

// One line on stderr: "<category>: <message>".
void check(sd_status status) {
  if (status == SD_OK) return;
  std::string message = sd_last_error();
  for (char& c : message) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::fprintf(stderr, "%s: %s\n", sd_status_name(status), message.c_str());
  throw Failure{status};
}

struct DatasetHandle {
  sd_dataset* ptr = nullptr;
  ~DatasetHandle() { sd_dataset_free(ptr); }
};

struct LoadArgs {
  std::string manifest;
  std::string task = "class1-vs-class0";
  double asymmetry_tol = 1e-9;
  bool normalize = false;
};

void add_load_options(CLI::App* cmd, LoadArgs& args) {
  cmd->add_option("--manifest", args.manifest, "Dataset manifest (TSV)")->required();
  cmd->add_option("--task", args.task, "Binary task '<positive>-vs-<negative>'")->capture_default_str();
  cmd->add_option("--asymmetry-tol", args.asymmetry_tol, "Warn when |A - A^T| exceeds this")->capture_default_str();
  cmd->add_flag("--normalize", args.normalize, "Scale each matrix to unit Frobenius norm");
}

void load(const LoadArgs& args, DatasetHandle& out) {
  sd_load_options opts;
  sd_load_options_default(&opts);
  opts.asymmetry_tol = args.asymmetry_tol;
  opts.normalize = args.normalize ? 1 : 0;
  check(sd_dataset_load(args.manifest.c_str(), args.task.c_str(), &opts, &out.ptr));
  for (size_t i = 0; i < sd_dataset_warning_count(out.ptr); ++i) {
    std::fprintf(stderr, "warning: %s\n", sd_dataset_warning(out.ptr, i));
  }
}

void add_joint_options(CLI::App* cmd, sd_joint_config& cfg, bool& normalize_inputs) {
  cmd->add_option("--rotation-tol", cfg.rotation_tol, "Skip rotations with |sin| below this")->capture_default_str();
  cmd->add_option("--off-tol", cfg.off_tol, "Relative off ratio for convergence")->capture_default_str();
  cmd->add_option("--max-sweeps", cfg.max_sweeps, "Sweep limit")->capture_default_str();
  cmd->add_flag("--scale-inputs", normalize_inputs, "Optimize on unit-norm copies of the matrices");
}

void print_sweep(int sweep, double off_ratio, int rotations, void*) {
  char line[128];
  sd_format_sweep_line(sweep, off_ratio, rotations, line, sizeof line);
  std::fprintf(stderr, "%s\n", line);
}

sd_feature_method parse_method(const std::string& s) {
  return s == "eigen" ? SD_FEATURES_EIGEN : SD_FEATURES_JOINT_DIAG;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint-diagonalization spectral features and cross-validated evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI file");
  std::uint64_t seed = 0;

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic two-class dataset");
  sd_synth_spec spec;
  sd_synth_spec_default(&spec);
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--dim", spec.dim, "Matrix dimension")->capture_default_str();
  synth->add_option("--per-class", spec.per_class, "Samples per class")->capture_default_str();
  synth->add_option("--signal-coords", spec.signal_coords, "Coordinates carrying the class shift")->capture_default_str();
  synth->add_option("--separation", spec.separation, "Class shift in units of spread")->capture_default_str();
  synth->add_option("--base-gap", spec.base_gap, "Gap between consecutive diagonal means")->capture_default_str();
  synth->add_option("--spread", spec.spread, "Half-width of the uniform diagonal jitter")->capture_default_str();
  synth->add_option("--sigma", spec.sigma, "Relative Frobenius noise level")->capture_default_str();
  synth->add_option("--basis-jitter", spec.basis_jitter, "Per-sample basis perturbation")->capture_default_str();
  synth->add_option("--seed", seed, "Seed")->capture_default_str();

  // diagonalize
  auto* diag = app.add_subcommand("diagonalize", "Jointly diagonalize a dataset; emit basis, diagonals, off trace");
  LoadArgs diag_load;
  sd_joint_config joint;
  sd_joint_config_default(&joint);
  bool scale_inputs = false;
  bool verbose = false;
  std::string diag_out;
  add_load_options(diag, diag_load);
  add_joint_options(diag, joint, scale_inputs);
  diag->add_option("--out", diag_out, "Result JSON")->required();
  diag->add_flag("-v,--verbose", verbose, "Per-sweep diagnostics on stderr");
  diag->add_option("--seed", seed, "Seed (recorded only)")->capture_default_str();

  // features
  auto* feats = app.add_subcommand("features", "Write the feature CSV");
  LoadArgs feat_load;
  std::string feat_method = "joint_diag";
  std::string feat_out;
  add_load_options(feats, feat_load);
  add_joint_options(feats, joint, scale_inputs);
  feats->add_option("--method", feat_method, "joint_diag or eigen")->capture_default_str()
      ->check(CLI::IsMember({"joint_diag", "eigen"}));
  feats->add_option("--out", feat_out, "Feature CSV")->required();
  feats->add_option("--seed", seed, "Seed (recorded only)")->capture_default_str();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Repeated stratified group k-fold evaluation");
  LoadArgs eval_load;
  std::string eval_method = "joint_diag";
  std::string model = "logreg";
  std::string out_json, out_csv;
  sd_cv_config cv;
  sd_cv_config_default(&cv);
  bool no_grouped = false;
  bool transductive = false;
  add_load_options(evaluate, eval_load);
  add_joint_options(evaluate, joint, scale_inputs);
  evaluate->add_option("--method", eval_method, "joint_diag or eigen")->capture_default_str()
      ->check(CLI::IsMember({"joint_diag", "eigen"}));
  evaluate->add_option("--model", model, "logreg or sgd")->capture_default_str()->check(CLI::IsMember({"logreg", "sgd"}));
  evaluate->add_option("--folds", cv.folds, "Folds per partition")->capture_default_str();
  evaluate->add_option("--repeats", cv.repeats, "Independent partitions")->capture_default_str();
  evaluate->add_option("--inner-folds", cv.inner_folds, "Folds for hyperparameter tuning")->capture_default_str();
  evaluate->add_flag("--no-grouped", no_grouped, "Split per sample instead of per subject");
  evaluate->add_flag("--transductive", transductive, "Fit the joint basis on all samples before splitting");
  evaluate->add_option("--out-json", out_json, "Report JSON");
  evaluate->add_option("--out-csv", out_csv, "Report CSV row");
  evaluate->add_option("--seed", seed, "Seed")->capture_default_str();

  // inspect
  auto* insp = app.add_subcommand("inspect", "Commutation residual and spectral summary");
  LoadArgs insp_load;
  std::string insp_out;
  add_load_options(insp, insp_load);
  insp->add_option("--out", insp_out, "Write JSON here instead of stdout");
  insp->add_option("--seed", seed, "Seed (recorded only)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::fprintf(stderr, "invalid_argument: %s\n", e.what());
      return static_cast<int>(SD_ERR_INVALID_ARGUMENT);
    }
    return app.exit(e);
  }
  joint.normalize_inputs = scale_inputs ? 1 : 0;

  try {
    if (synth->parsed()) {
      spec.seed = seed;
      DatasetHandle ds;
      check(sd_dataset_synthesize(&spec, &ds.ptr));
      check(sd_dataset_write(ds.ptr, synth_out.c_str()));
      std::printf("wrote %zu samples (task %s) to %s\n", sd_dataset_count(ds.ptr), sd_dataset_task(ds.ptr),
                  synth_out.c_str());
    } else if (diag->parsed()) {
      DatasetHandle ds;
      load(diag_load, ds);
      sd_joint_result* result = nullptr;
      check(sd_joint_diagonalize(ds.ptr, &joint, verbose ? print_sweep : nullptr, nullptr, &result));
      const sd_status st = sd_joint_result_write_json(result, diag_out.c_str());
      std::printf("converged=%d sweeps=%d off_ratio=%.6e\n", sd_joint_result_converged(result),
                  sd_joint_result_sweeps(result), sd_joint_result_off_ratio(result));
      sd_joint_result_free(result);
      check(st);
    } else if (feats->parsed()) {
      DatasetHandle ds;
      load(feat_load, ds);
      check(sd_dataset_write_features(ds.ptr, parse_method(feat_method), &joint, feat_out.c_str()));
    } else if (evaluate->parsed()) {
      DatasetHandle ds;
      load(eval_load, ds);
      cv.seed = seed;
      cv.grouped = no_grouped ? 0 : 1;
      cv.transductive = transductive ? 1 : 0;
      const sd_model_kind kind = model == "sgd" ? SD_MODEL_SGD : SD_MODEL_LOGREG;
      sd_train_config train;
      sd_train_config_default(kind, &train);
      sd_report* report = nullptr;
      check(sd_evaluate(ds.ptr, nullptr, parse_method(eval_method), kind, &cv, &joint, &train, &report));
      const sd_status st = sd_report_write(report, out_json.empty() ? nullptr : out_json.c_str(),
                                           out_csv.empty() ? nullptr : out_csv.c_str());
      if (out_json.empty()) std::fputs(sd_report_json(report), stdout);
      std::fprintf(stderr, "mean_auc=%.3f std_auc=%.3f\n", sd_report_mean_auc(report), sd_report_std_auc(report));
      sd_report_free(report);
      check(st);
    } else if (insp->parsed()) {
      DatasetHandle ds;
      load(insp_load, ds);
      char* json = nullptr;
      check(sd_dataset_inspect(ds.ptr, &json));
      std::string text(json);
      sd_string_free(json);
      if (insp_out.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        FILE* f = std::fopen(insp_out.c_str(), "wb");
        if (f == nullptr) {
          std::fprintf(stderr, "io_error: cannot write '%s'\n", insp_out.c_str());
          return static_cast<int>(SD_ERR_IO);
        }
        std::fputs(text.c_str(), f);
        std::fclose(f);
      }
    }
  } catch (const Failure& f) {
    return static_cast<int>(f.status);
  }
  return 0;
}
