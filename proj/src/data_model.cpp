#include "plom/data_model.hpp"

#include <algorithm>

#include "plom/io.hpp"

namespace plom {

Vector empirical_mean(const Matrix& samples) { return samples.rowwise().mean(); }

Matrix empirical_covariance(const Matrix& samples) {
  const Index n = samples.cols();
  if (n < 2) throw DegenerateData("covariance needs at least two realizations");
  const Matrix centered = samples.colwise() - samples.rowwise().mean();
  return (centered * centered.transpose()) / double(n - 1);
}

double retained_energy_error(const Vector& eigvals, Index nu) {
  const double total = eigvals.sum();
  if (total <= 0) throw DegenerateData("non-positive total variance");
  return 1.0 - eigvals.head(nu).sum() / total;
}

std::pair<PcaReduction, TrainingSet> pca_reduce(const RawDataset& raw, double eps_pca) {
  if (raw.n_d() < 2) throw DegenerateData("need at least two realizations");
  if (!(eps_pca > 0 && eps_pca < 1)) throw Error("eps_pca must lie in (0,1)");

  const Vector mean = empirical_mean(raw.x);
  const Matrix cov = empirical_covariance(raw.x);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");

  // Ascending from the solver; flip to descending.
  const Index n_x = raw.n_x();
  Vector vals(n_x);
  Matrix vecs(n_x, n_x);
  for (Index i = 0; i < n_x; ++i) {
    vals(i) = eig.eigenvalues()(n_x - 1 - i);
    vecs.col(i) = eig.eigenvectors().col(n_x - 1 - i);
  }

  const double vmax = vals(0);
  if (vmax <= 16 * std::numeric_limits<double>::epsilon() * cov.trace() || vmax <= 0)
    throw DegenerateData("all covariance eigenvalues vanish (constant dataset)");

  Index rank = 0;
  while (rank < n_x && vals(rank) > 1e-12 * vmax) ++rank;
  if (rank == 0) throw RankDeficient("no eigenvalue above the rank threshold");

  const Vector kept = vals.head(rank);
  Index nu = rank;
  for (Index m = 1; m <= rank; ++m) {
    if (retained_energy_error(kept, m) <= eps_pca) {
      nu = m;
      break;
    }
  }

  PcaReduction pca;
  pca.mean = mean;
  pca.eigvals = kept.head(nu);
  pca.eigvecs = vecs.leftCols(nu);
  pca.nu = nu;
  pca.err = retained_energy_error(kept, nu);

  TrainingSet ts;
  ts.eta = pca.eigvals.array().rsqrt().matrix().asDiagonal() *
           (pca.eigvecs.transpose() * (raw.x.colwise() - mean));
  return {std::move(pca), std::move(ts)};
}

Matrix reconstruct(const PcaReduction& pca, const Matrix& eta) {
  if (eta.rows() != pca.nu) throw DimensionMismatch("eta rows != retained dimension");
  return (pca.eigvecs * (pca.eigvals.array().sqrt().matrix().asDiagonal() * eta))
             .colwise() +
         pca.mean;
}

NormalizationDiagnostics validate_normalization(const TrainingSet& ts) {
  NormalizationDiagnostics d;
  d.mean_norm = empirical_mean(ts.eta).norm();
  const Matrix cov = empirical_covariance(ts.eta);
  d.cov_dev = (cov - Matrix::Identity(ts.nu(), ts.nu())).norm();
  d.mean_ok = d.mean_norm <= kMeanTol;
  d.cov_ok = d.cov_dev <= kCovTol;
  return d;
}

TrainingSet load_training_set(const std::filesystem::path& path) {
  TrainingSet ts;
  ts.eta = io::read_matrix_auto(path);
  if (ts.nu() < 1 || ts.n_d() < 2) throw DegenerateData("training set too small");
  return ts;
}

}  // namespace plom
