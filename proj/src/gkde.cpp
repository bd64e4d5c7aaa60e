#include "plom/gkde.hpp"

#include <cmath>
#include <numbers>

#include "plom/rng.hpp"

namespace plom {

BandwidthSet bandwidths(Index nu, Index n_d) {
  if (nu < 1 || n_d < 1) throw Error("bandwidths: nu >= 1 and n_d >= 1 required");
  BandwidthSet b;
  b.s = silverman_bandwidth(nu, n_d);
  b.s_hat = b.s / std::sqrt(b.s * b.s + double(n_d - 1) / double(n_d));
  b.ratio = b.s_hat / b.s;
  return b;
}

GkdeModel::GkdeModel(const TrainingSet& ts)
    : eta_(ts.eta), bw_(bandwidths(ts.nu(), ts.n_d())) {
  centers_ = bw_.ratio * eta_;
  center_sqnorm_ = centers_.colwise().squaredNorm();
}

double GkdeModel::log_pdf(const Vector& point) const {
  if (point.size() != nu()) throw DimensionMismatch("log_pdf: wrong dimension");
  const double inv2s2 = 1.0 / (2.0 * bw_.s_hat * bw_.s_hat);
  Array expo = -inv2s2 *
               (center_sqnorm_.array() - 2.0 * (centers_.transpose() * point).array() +
                point.squaredNorm());
  const double m = expo.maxCoeff();
  const double lse = m + std::log((expo - m).exp().sum());
  const double log_c = -double(nu()) * std::log(std::sqrt(2.0 * std::numbers::pi) * bw_.s_hat);
  return log_c + lse - std::log(double(n_d()));
}

Vector GkdeModel::drift(const Vector& point) const {
  const double inv2s2 = 1.0 / (2.0 * bw_.s_hat * bw_.s_hat);
  Array expo = -inv2s2 *
               (center_sqnorm_.array() - 2.0 * (centers_.transpose() * point).array() +
                point.squaredNorm());
  Array w = (expo - expo.maxCoeff()).exp();
  w /= w.sum();
  return (centers_ * w.matrix() - point) * inv2s2;
}

Matrix GkdeModel::grad_log_pdf_matrix(const Matrix& states) const {
  Matrix out, scratch;
  grad_log_pdf_matrix(states, out, scratch);
  return out;
}

void GkdeModel::grad_log_pdf_matrix(const Matrix& states, Matrix& out,
                                    Matrix& scratch) const {
  if (states.rows() != nu()) throw DimensionMismatch("state rows != nu");
  const Index p = states.cols();
  const double inv_s2 = 1.0 / (bw_.s_hat * bw_.s_hat);
  out.resize(nu(), p);
  scratch.resize(n_d(), p);

  // Softmax weights per column; the -||u_c||^2 term is constant within a
  // column and cancels.
  scratch.noalias() = centers_.transpose() * states;
  scratch *= inv_s2;
  const Array cen_sq = 0.5 * inv_s2 * center_sqnorm_.array();
  for (Index c = 0; c < p; ++c) {
    auto col = scratch.col(c).array();
    col -= cen_sq;
    Array w = (col - col.maxCoeff()).exp();
    scratch.col(c) = (w / w.sum()).matrix();
  }
  out.noalias() = centers_ * scratch;
  out -= states;
  out *= inv_s2;
}

Matrix GkdeModel::sample_mixture(Index count, uint64_t seed, uint64_t stream,
                                 uint64_t first_index) const {
  Matrix out(nu(), count);
  const uint64_t pick_stream = rng::derive_seed(stream, "gkde/pick");
  const uint64_t noise_stream = rng::derive_seed(stream, "gkde/noise");
  for (Index c = 0; c < count; ++c) {
    const uint64_t idx = first_index + uint64_t(c);
    const auto j = Index(rng::uniform_at(seed, pick_stream, idx) * double(n_d()));
    const Index jj = std::min(j, n_d() - 1);
    for (Index k = 0; k < nu(); ++k) {
      out(k, c) = centers_(k, jj) +
                  bw_.s_hat * rng::normal_at(seed, noise_stream, idx * uint64_t(nu()) + uint64_t(k));
    }
  }
  return out;
}

}  // namespace plom
