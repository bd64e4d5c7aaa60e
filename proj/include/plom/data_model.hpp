#pragma once

#include <filesystem>

#include "plom/types.hpp"

namespace plom {

// Raw dataset: one realization per column.
struct RawDataset {
  Matrix x;  // n_x rows, n_d columns

  Index n_x() const { return x.rows(); }
  Index n_d() const { return x.cols(); }
};

// Principal-component reduction of a raw dataset. Eigenpairs are those of the
// empirical covariance (1/(n_d-1) estimator), eigenvalues sorted descending.
struct PcaReduction {
  Vector mean;     // length n_x
  Vector eigvals;  // length nu, positive, descending
  Matrix eigvecs;  // n_x x nu, orthonormal columns
  Index nu{0};
  double err{0};  // retained-energy error at nu
};

// Normalized training set: empirical mean 0, empirical covariance identity.
struct TrainingSet {
  Matrix eta;  // nu x n_d

  Index nu() const { return eta.rows(); }
  Index n_d() const { return eta.cols(); }
};

struct NormalizationDiagnostics {
  double mean_norm{0};  // ||mean of columns||
  double cov_dev{0};    // ||C - I||_F
  bool mean_ok{false};
  bool cov_ok{false};
  bool pass() const { return mean_ok && cov_ok; }
};

inline constexpr double kMeanTol = 1e-8;
inline constexpr double kCovTol = 1e-6;

// Column mean and 1/(n_d-1) covariance of a (dim x n) sample matrix.
Vector empirical_mean(const Matrix& samples);
Matrix empirical_covariance(const Matrix& samples);

// Reduces and whitens a raw dataset. The retained dimension is the smallest
// nu whose retained-energy error is <= eps_pca; eigenvalues below
// 1e-12 * max are treated as zero and never retained.
std::pair<PcaReduction, TrainingSet> pca_reduce(const RawDataset& raw, double eps_pca);

// Retained-energy error as a function of the retained dimension, for
// eigenvalues sorted descending.
double retained_energy_error(const Vector& eigvals, Index nu);

// Maps normalized realizations back to the raw space.
Matrix reconstruct(const PcaReduction& pca, const Matrix& eta);

NormalizationDiagnostics validate_normalization(const TrainingSet& ts);

// Loads a pre-normalized training set directly (CSV or binary, keyed on the
// magic bytes); normalization is diagnosed, not enforced.
TrainingSet load_training_set(const std::filesystem::path& path);

}  // namespace plom
