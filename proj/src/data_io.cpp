#include "simdiag/data_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "simdiag/error.hpp"

namespace fs = std::filesystem;

namespace simdiag {

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io_error, "cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void parse_failure(const fs::path& path, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << what;
  throw Error(ErrorCategory::parse_error, os.str());
}

}  // namespace

Matrix read_matrix_file(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;
  long declared = -1;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    line.remove_prefix(first);
    if (line.front() == '#') {
      if (rows.empty() && line.starts_with("# dim=")) {
        const auto digits = line.substr(6);
        if (std::from_chars(digits.data(), digits.data() + digits.size(), declared).ec != std::errc{} ||
            declared < 1) {
          parse_failure(path, line_no, "malformed dimension comment");
        }
      }
      continue;
    }
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end) break;
      double v = 0.0;
      const char* start = p;
      if (*start == '+') ++start;
      const auto [ptr, ec] = std::from_chars(start, end, v);
      if (ec != std::errc{} || (ptr < end && *ptr != ' ' && *ptr != '\t')) {
        parse_failure(path, line_no, "invalid number '" + std::string(p, std::min<std::size_t>(end - p, 24)) + "'");
      }
      row.push_back(v);
      p = ptr;
    }
    rows.push_back(std::move(row));
    row_lines.push_back(line_no);
  }
  const std::size_t d = rows.size();
  if (d == 0) parse_failure(path, line_no, "no matrix rows");
  if (declared >= 0 && static_cast<std::size_t>(declared) != d) {
    parse_failure(path, 1, "declared dim=" + std::to_string(declared) + " but found " + std::to_string(d) + " rows");
  }
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    if (rows[k].size() != d) {
      parse_failure(path, row_lines[k],
                    "row has " + std::to_string(rows[k].size()) + " values, expected " + std::to_string(d));
    }
    for (std::size_t l = 0; l < d; ++l) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = rows[k][l];
  }
  return m;
}

std::string format_matrix(const Matrix& m) {
  std::string out = "# dim=" + std::to_string(m.rows()) + "\n";
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    for (Eigen::Index l = 0; l < m.cols(); ++l) {
      if (l > 0) out += ' ';
      out += format_double(m(k, l));
    }
    out += '\n';
  }
  return out;
}

void write_matrix_file(const fs::path& path, const Matrix& m) { write_text_atomic(path, format_matrix(m)); }

void write_text_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::io_error, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCategory::io_error, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCategory::io_error, "cannot rename onto '" + path.string() + "': " + ec.message());
}

Manifest read_manifest(const fs::path& path) {
  const std::string text = read_text(path);
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != "path\tsample_id\tsubject_id\tlabel") {
    parse_failure(path, 1, "expected header 'path<TAB>sample_id<TAB>subject_id<TAB>label'");
  }
  Manifest manifest;
  manifest.base_dir = path.parent_path();
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) parse_failure(path, i + 1, "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    for (const auto& f : fields) {
      if (f.empty()) parse_failure(path, i + 1, "empty field");
    }
    if (!seen.insert(fields[1]).second) parse_failure(path, i + 1, "duplicate sample id '" + fields[1] + "'");
    manifest.records.push_back({fields[0], fields[1], fields[2], fields[3], i + 1});
  }
  return manifest;
}

std::string format_manifest(const std::vector<ManifestRecord>& records) {
  std::string out = "path\tsample_id\tsubject_id\tlabel\n";
  for (const auto& r : records) out += r.path + '\t' + r.sample_id + '\t' + r.subject_id + '\t' + r.label + '\n';
  return out;
}

TaskPairing parse_task(std::string_view text) {
  const auto sep = text.find("-vs-");
  if (sep == std::string_view::npos || sep == 0 || sep + 4 >= text.size()) {
    throw Error(ErrorCategory::invalid_argument, "task must look like '<positive>-vs-<negative>', got '" + std::string(text) + "'");
  }
  TaskPairing task{std::string(text.substr(0, sep)), std::string(text.substr(sep + 4))};
  if (task.positive == task.negative) {
    throw Error(ErrorCategory::invalid_argument, "task labels must differ");
  }
  return task;
}

const std::array<TaskPairing, 4>& standard_tasks() {
  static const std::array<TaskPairing, 4> tasks{{{"AD", "NC"}, {"AD", "LMCI"}, {"LMCI", "EMCI"}, {"EMCI", "NC"}}};
  return tasks;
}

LoadedDataset load_dataset(const fs::path& manifest_path, const TaskPairing& task, const LoadOptions& options) {
  const Manifest manifest = read_manifest(manifest_path);
  std::vector<SymMatrix> matrices;
  std::vector<int> labels;
  std::vector<std::string> subjects, samples, warnings;
  std::size_t dim = 0;
  for (const auto& record : manifest.records) {
    int label = -1;
    if (record.label == task.positive) label = 1;
    else if (record.label == task.negative) label = 0;
    else continue;

    auto where = [&] {
      return manifest_path.string() + ":" + std::to_string(record.line) + " (" + record.sample_id + ")";
    };
    fs::path file = record.path;
    if (file.is_relative()) file = manifest.base_dir / file;
    if (!fs::exists(file)) throw Error(ErrorCategory::io_error, where() + ": missing file '" + file.string() + "'");

    Matrix raw;
    try {
      raw = read_matrix_file(file);
    } catch (const Error& e) {
      throw Error(e.category(), where() + ": " + e.what());
    }
    if (dim == 0) dim = static_cast<std::size_t>(raw.rows());
    if (static_cast<std::size_t>(raw.rows()) != dim) {
      std::ostringstream os;
      os << where() << ": matrix is " << raw.rows() << "x" << raw.cols() << ", expected " << dim << "x" << dim;
      throw Error(ErrorCategory::dimension_mismatch, os.str());
    }
    SymmetrizeResult sym = [&] {
      try {
        return symmetrize(raw, options.asymmetry_tol);
      } catch (const Error& e) {
        throw Error(e.category(), where() + ": " + e.what());
      }
    }();
    if (sym.asymmetry_warning) {
      warnings.push_back(where() + ": max asymmetry " + format_double(sym.max_asymmetry) + " symmetrized");
    }
    SymMatrix m = std::move(sym.matrix);
    if (options.normalize) {
      const double norm = m.values().norm();
      if (norm > 0.0) m = make_trusted_symmetric(m.values() / norm);
    }
    matrices.push_back(std::move(m));
    labels.push_back(label);
    subjects.push_back(record.subject_id);
    samples.push_back(record.sample_id);
  }
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<long>(labels.size())) {
    const std::string& missing = positives == 0 ? task.positive : task.negative;
    throw Error(ErrorCategory::single_class,
                manifest_path.string() + ": task " + task.name() + " has no samples labeled '" + missing + "'");
  }
  return {LabeledDataset(SymmetricMatrixSet(std::move(matrices)), std::move(labels), std::move(subjects),
                         std::move(samples)),
          std::move(warnings)};
}

void write_dataset(const fs::path& dir, const LabeledDataset& dataset, const std::vector<std::string>& label_names) {
  std::error_code ec;
  fs::create_directories(dir / "matrices", ec);
  if (ec) throw Error(ErrorCategory::io_error, "cannot create '" + (dir / "matrices").string() + "': " + ec.message());
  std::vector<ManifestRecord> records;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int label = dataset.labels()[i];
    if (label < 0 || static_cast<std::size_t>(label) >= label_names.size()) {
      throw Error(ErrorCategory::invalid_argument, "write_dataset: no name for label " + std::to_string(label));
    }
    const std::string rel = "matrices/" + dataset.sample_ids()[i] + ".txt";
    write_matrix_file(dir / rel, dataset.matrices()[i].values());
    records.push_back({rel, dataset.sample_ids()[i], dataset.subject_ids()[i], label_names[static_cast<std::size_t>(label)], 0});
  }
  write_text_atomic(dir / "manifest.tsv", format_manifest(records));
}

namespace {

nlohmann::json rows_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index l = 0; l < m.cols(); ++l) row[static_cast<std::size_t>(l)] = m(k, l);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string truth_to_json(const SynthTruth& truth, const LabeledDataset& dataset) {
  nlohmann::json j;
  j["basis"] = rows_json(truth.basis.columns());
  j["diagonals"] = rows_json(truth.diagonals);
  j["labels"] = dataset.labels();
  j["sample_ids"] = dataset.sample_ids();
  return j.dump(2) + "\n";
}

std::string joint_result_to_json(const JointDiagResult& result, const std::vector<std::string>& sample_ids) {
  nlohmann::json j;
  j["basis"] = rows_json(result.basis.columns());
  j["diagonals"] = rows_json(result.diagonals);
  j["off_history"] = result.off_history;
  j["off_ratio"] = result.off_ratio();
  j["sweeps_used"] = result.sweeps_used;
  j["converged"] = result.converged;
  j["stop_reason"] = stop_reason_name(result.stop_reason);
  j["sample_ids"] = sample_ids;
  return j.dump(2) + "\n";
}

std::string format_feature_csv(const LabeledDataset& dataset, const FeatureMatrix& features) {
  if (features.rows() != dataset.size()) {
    throw Error(ErrorCategory::dimension_mismatch, "feature CSV: row count differs from dataset size");
  }
  std::string out = "sample_id,subject_id,label";
  for (std::size_t k = 0; k < features.cols(); ++k) out += ",f_" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out += dataset.sample_ids()[i] + ',' + dataset.subject_ids()[i] + ',' + std::to_string(dataset.labels()[i]);
    for (std::size_t k = 0; k < features.cols(); ++k) {
      out += ',' + format_double(features.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    }
    out += '\n';
  }
  return out;
}

}  // namespace simdiag
