#include "simdiag/synth.hpp"

#include <random>
#include <sstream>

#include "random_util.hpp"
#include "simdiag/error.hpp"

namespace simdiag {

namespace {

constexpr std::uint64_t kBasisStream = 0xba515;
constexpr std::uint64_t kDiagonalStream = 0xd1a6;
constexpr std::uint64_t kNoiseStream = 0x0015e;
constexpr std::uint64_t kJitterStream = 0x717e5;

Matrix gaussian_matrix(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix g(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index l = 0; l < d; ++l) g(k, l) = normal(rng);
  }
  return g;
}

Matrix orthonormalize(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void SynthSpec::validate() const {
  std::ostringstream problem;
  if (dim < 2) problem << "dim must be >= 2; ";
  if (class_counts.empty() || class_counts.size() != class_means.size()) {
    problem << "need one count and one mean vector per class; ";
  }
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    if (class_counts[c] < 1) problem << "class " << c << " has no samples; ";
    if (c < class_means.size() && static_cast<std::size_t>(class_means[c].size()) != dim) {
      problem << "class " << c << " mean has length " << class_means[c].size() << "; ";
    }
  }
  if (!(spread > 0.0)) problem << "spread must be > 0; ";
  if (!(sigma >= 0.0)) problem << "sigma must be >= 0; ";
  if (!(basis_jitter >= 0.0)) problem << "basis_jitter must be >= 0; ";
  if (!problem.str().empty()) throw Error(ErrorCategory::invalid_argument, "synth spec: " + problem.str());
}

SynthSpec two_class_spec(std::size_t dim, std::size_t per_class, std::size_t signal_coords,
                         double separation, double base_gap, double spread, double sigma,
                         double basis_jitter, std::uint64_t seed) {
  SynthSpec spec;
  spec.dim = dim;
  spec.class_counts = {per_class, per_class};
  Vector base(static_cast<Eigen::Index>(dim));
  for (std::size_t k = 0; k < dim; ++k) base(static_cast<Eigen::Index>(k)) = base_gap * static_cast<double>(dim - 1 - k);
  Vector shifted = base;
  for (std::size_t k = 0; k < std::min(signal_coords, dim); ++k) {
    shifted(static_cast<Eigen::Index>(k)) += separation * spread;
  }
  spec.class_means = {base, shifted};
  spec.spread = spread;
  spec.sigma = sigma;
  spec.basis_jitter = basis_jitter;
  spec.seed = seed;
  return spec;
}

std::string synth_label_name(int class_index) { return "class" + std::to_string(class_index); }

OrthoBasis random_orthogonal(std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorCategory::invalid_argument, "random_orthogonal: dim must be >= 1");
  std::mt19937_64 rng(seed);
  return OrthoBasis(orthonormalize(gaussian_matrix(dim, rng)));
}

SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  const auto d = static_cast<Eigen::Index>(spec.dim);
  const OrthoBasis u0 = random_orthogonal(spec.dim, detail::derive_seed(spec.seed, kBasisStream));

  std::size_t n = 0;
  for (std::size_t count : spec.class_counts) n += count;

  std::vector<SymMatrix> matrices;
  matrices.reserve(n);
  std::vector<int> labels;
  std::vector<std::string> subjects, samples;
  Matrix truth(static_cast<Eigen::Index>(n), d);

  std::size_t i = 0;
  for (std::size_t c = 0; c < spec.class_counts.size(); ++c) {
    for (std::size_t s = 0; s < spec.class_counts[c]; ++s, ++i) {
      std::mt19937_64 diag_rng(detail::derive_seed(spec.seed, kDiagonalStream, i));
      std::uniform_real_distribution<double> offset(-spec.spread, spec.spread);
      Vector diag(d);
      for (Eigen::Index k = 0; k < d; ++k) diag(k) = spec.class_means[c](k) + offset(diag_rng);
      truth.row(static_cast<Eigen::Index>(i)) = diag.transpose();

      Matrix basis = u0.columns();
      if (spec.basis_jitter > 0.0) {
        std::mt19937_64 jitter_rng(detail::derive_seed(spec.seed, kJitterStream, i));
        const Matrix perturb = Matrix::Identity(d, d) + spec.basis_jitter * gaussian_matrix(spec.dim, jitter_rng);
        basis = basis * orthonormalize(perturb);
      }
      Matrix a = symmetric_part(basis * diag.asDiagonal() * basis.transpose());

      if (spec.sigma > 0.0) {
        std::mt19937_64 noise_rng(detail::derive_seed(spec.seed, kNoiseStream, i));
        const Matrix e = symmetric_part(gaussian_matrix(spec.dim, noise_rng));
        a += (spec.sigma * a.norm() / e.norm()) * e;
      }
      matrices.push_back(make_trusted_symmetric(std::move(a)));
      labels.push_back(static_cast<int>(c));

      char buf[32];
      std::snprintf(buf, sizeof buf, "subj%05zu", i);
      subjects.emplace_back(buf);
      std::snprintf(buf, sizeof buf, "s%05zu", i);
      samples.emplace_back(buf);
    }
  }
  LabeledDataset dataset(SymmetricMatrixSet(std::move(matrices)), std::move(labels), std::move(subjects),
                         std::move(samples));
  return {std::move(dataset), {u0, std::move(truth)}};
}

}  // namespace simdiag
