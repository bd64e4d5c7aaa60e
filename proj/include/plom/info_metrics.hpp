#pragma once

#include <cstdint>

#include "plom/types.hpp"

namespace plom {

// A set of independent realizations (one per column) together with the
// per-component standard deviations and the Silverman bandwidth used by the
// kernel-density estimators below.
struct SampleSet {
  Matrix x;       // nu x n
  Vector sigmas;  // per-component standard deviation, 1/(n-1) estimator
  double s{0};

  Index nu() const { return x.rows(); }
  Index count() const { return x.cols(); }

  static SampleSet from_matrix(Matrix samples);
  // Deterministic uniform subsample of at most max_count realizations.
  static SampleSet from_matrix(Matrix samples, Index max_count, uint64_t seed);
};

// Kernel-density divergence estimate between two sample sets of the same
// dimension. Exactly zero when both sets hold the same realizations.
double kl_divergence(const SampleSet& px, const SampleSet& py);

// Kernel-density mutual-information estimate across components. Exactly zero
// in dimension one.
double mutual_information(const SampleSet& px);

// Kernel-density entropy estimate.
double entropy(const SampleSet& px);

// Mutual information normalized by chi + log(sample count).
double normalized_mi(double i_hat, Index n_samp, double chi);

// chi equating the normalized mutual information of the training measure
// (n_d realizations) and of a learned measure (n_ar realizations).
struct ChiSolution {
  double chi{0};
  bool valid{true};  // false when chi + log(n_d) <= 0
};
ChiSolution solve_chi(double i_h, double i_tb_opt, Index n_d, Index n_ar);

}  // namespace plom
