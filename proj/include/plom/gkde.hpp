#pragma once

#include <cstdint>

#include "plom/data_model.hpp"
#include "plom/types.hpp"

namespace plom {

// Silverman bandwidth for a Gaussian kernel-density estimate of `n` samples
// in dimension `nu`.
inline double silverman_bandwidth(Index nu, Index n) {
  return std::pow(4.0 / (double(n) * (2.0 + double(nu))), 1.0 / (double(nu) + 4.0));
}

struct BandwidthSet {
  double s{0};      // Silverman bandwidth
  double s_hat{0};  // modified bandwidth preserving the identity covariance
  double ratio{0};  // s_hat / s
};

BandwidthSet bandwidths(Index nu, Index n_d);

// Gaussian KDE of the training measure: an equal-weight mixture of
// N(ratio * eta^j, s_hat^2 I) kernels. Immutable after construction; all
// evaluations are log-sum-exp stabilized and re-entrant.
class GkdeModel {
public:
  explicit GkdeModel(const TrainingSet& ts);

  Index nu() const { return centers_.rows(); }
  Index n_d() const { return centers_.cols(); }
  const BandwidthSet& bw() const { return bw_; }
  const Matrix& centers() const { return centers_; }  // (s_hat/s) * eta
  const Matrix& eta() const { return eta_; }

  double log_pdf(const Vector& point) const;

  // Drift of the first-order sampling dynamics: half the gradient of the
  // log-density.
  Vector drift(const Vector& point) const;

  // Columnwise gradient of the log-density of a state matrix (nu x p).
  Matrix grad_log_pdf_matrix(const Matrix& states) const;
  // In-place variant plus scratch, for tight integration loops.
  void grad_log_pdf_matrix(const Matrix& states, Matrix& out, Matrix& scratch) const;

  // Exact generative draws from the mixture (counter-based; draw `index`
  // of `stream` is reproducible in isolation).
  Matrix sample_mixture(Index count, uint64_t seed, uint64_t stream = 0,
                        uint64_t first_index = 0) const;

private:
  Matrix eta_;
  Matrix centers_;
  Vector center_sqnorm_;
  BandwidthSet bw_;
};

}  // namespace plom
