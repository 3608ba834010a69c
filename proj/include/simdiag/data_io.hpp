#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "simdiag/eval.hpp"
#include "simdiag/features.hpp"
#include "simdiag/joint_diag.hpp"
#include "simdiag/matrix_core.hpp"
#include "simdiag/synth.hpp"

namespace simdiag {

// Matrix text files: optional first line "# dim=<d>", then d rows of d
// whitespace-separated decimals. Written with 17 significant digits.
Matrix read_matrix_file(const std::filesystem::path& path);
std::string format_matrix(const Matrix& m);
void write_matrix_file(const std::filesystem::path& path, const Matrix& m);

/// Writes to a temporary sibling and renames it into place.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

struct ManifestRecord {
  std::string path;
  std::string sample_id;
  std::string subject_id;
  std::string label;
  std::size_t line = 0;  // 1-based line in the manifest
};

// TSV with header "path\tsample_id\tsubject_id\tlabel"; relative paths are
// resolved against the manifest's directory.
struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;
};

Manifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const std::vector<ManifestRecord>& records);

/// Binary task; `positive` maps to label 1.
struct TaskPairing {
  std::string positive;
  std::string negative;

  std::string name() const { return positive + "-vs-" + negative; }
};

/// Parses "<positive>-vs-<negative>".
TaskPairing parse_task(std::string_view text);

/// AD-vs-NC, AD-vs-LMCI, LMCI-vs-EMCI, EMCI-vs-NC; the more affected group is positive.
const std::array<TaskPairing, 4>& standard_tasks();

struct LoadOptions {
  double asymmetry_tol = 1e-9;
  bool normalize = false;  // scale every matrix to unit Frobenius norm
};

struct LoadedDataset {
  LabeledDataset dataset;
  std::vector<std::string> warnings;
};

/// Loads the samples whose label belongs to `task`, in manifest order.
LoadedDataset load_dataset(const std::filesystem::path& manifest, const TaskPairing& task,
                           const LoadOptions& options = {});

/// Writes matrices/<sample_id>.txt and manifest.tsv under `dir`.
void write_dataset(const std::filesystem::path& dir, const LabeledDataset& dataset,
                   const std::vector<std::string>& label_names);

std::string truth_to_json(const SynthTruth& truth, const LabeledDataset& dataset);
std::string joint_result_to_json(const JointDiagResult& result, const std::vector<std::string>& sample_ids);

/// Header "sample_id,subject_id,label,f_0,...,f_{d-1}".
std::string format_feature_csv(const LabeledDataset& dataset, const FeatureMatrix& features);

}  // namespace simdiag
