#include "plom/info_metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "plom/gkde.hpp"
#include "plom/rng.hpp"

namespace plom {

namespace {

// log of the mean Gaussian-kernel value at column c of `points` against all
// columns of `points` (self term included), for pre-scaled coordinates.
double log_mean_kernel(const Matrix& points, Index c) {
  const Array expo =
      -0.5 * (points.colwise() - points.col(c)).colwise().squaredNorm().array();
  const double m = expo.maxCoeff();
  return m + std::log((expo - m).exp().mean());
}

double log_mean_kernel_cross(const Matrix& points, const Vector& at) {
  const Array expo =
      -0.5 * (points.colwise() - at).colwise().squaredNorm().array();
  const double m = expo.maxCoeff();
  return m + std::log((expo - m).exp().mean());
}

// Mean over rows of fn(row), accumulated in ascending row order.
template <class Fn>
double mean_over_rows(Index n, const Fn& fn) {
  std::vector<double> vals(static_cast<size_t>(n));
#pragma omp parallel for schedule(static) num_threads(num_threads())
  for (Index i = 0; i < n; ++i) vals[size_t(i)] = fn(i);
  return std::accumulate(vals.begin(), vals.end(), 0.0) / double(n);
}

Matrix scaled_by(const Matrix& x, const Vector& sigmas, double s) {
  return (sigmas * s).cwiseInverse().asDiagonal() * x;
}

}  // namespace

SampleSet SampleSet::from_matrix(Matrix samples) {
  if (samples.cols() < 2) throw DegenerateData("sample set needs >= 2 realizations");
  SampleSet set;
  set.sigmas = ((samples.colwise() - samples.rowwise().mean())
                    .rowwise()
                    .squaredNorm() /
                double(samples.cols() - 1))
                   .cwiseSqrt();
  if (!(set.sigmas.array() > 0).all())
    throw DegenerateData("constant component in sample set");
  set.s = silverman_bandwidth(samples.rows(), samples.cols());
  set.x = std::move(samples);
  return set;
}

SampleSet SampleSet::from_matrix(Matrix samples, Index max_count, uint64_t seed) {
  const Index n = samples.cols();
  if (n <= max_count) return from_matrix(std::move(samples));
  // Keep the max_count indices with the smallest stream keys: a uniform
  // subsample that is reproducible and order-independent.
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index(0));
  const uint64_t stream = rng::derive_seed(seed, "info/subsample");
  std::nth_element(idx.begin(), idx.begin() + max_count, idx.end(),
                   [&](Index a, Index b) {
                     return rng::uniform_at(seed, stream, uint64_t(a)) <
                            rng::uniform_at(seed, stream, uint64_t(b));
                   });
  idx.resize(size_t(max_count));
  std::sort(idx.begin(), idx.end());
  Matrix kept(samples.rows(), max_count);
  for (Index j = 0; j < max_count; ++j) kept.col(j) = samples.col(idx[size_t(j)]);
  return from_matrix(std::move(kept));
}

double kl_divergence(const SampleSet& px, const SampleSet& py) {
  if (px.nu() != py.nu()) throw DimensionMismatch("kl_divergence: dimensions differ");
  const Matrix ax = scaled_by(px.x, px.sigmas, px.s);
  const Matrix bx = scaled_by(px.x, py.sigmas, py.s);
  const Matrix by = scaled_by(py.x, py.sigmas, py.s);

  const double prefactor =
      double(px.nu()) * std::log(py.s / px.s) +
      (py.sigmas.array().log() - px.sigmas.array().log()).sum();
  // The sample-count ratio folds into the log of the two kernel means.
  const double cross_terms = mean_over_rows(px.count(), [&](Index i) {
    return log_mean_kernel(ax, i) - log_mean_kernel_cross(by, bx.col(i));
  });
  return prefactor + cross_terms;
}

double mutual_information(const SampleSet& px) {
  const Matrix a = scaled_by(px.x, px.sigmas, px.s);
  std::vector<Matrix> marginals;
  marginals.reserve(size_t(px.nu()));
  for (Index k = 0; k < px.nu(); ++k) marginals.emplace_back(a.row(k));
  return mean_over_rows(px.count(), [&](Index i) {
    double v = log_mean_kernel(a, i);
    for (const Matrix& row : marginals) v -= log_mean_kernel(row, i);
    return v;
  });
}

double entropy(const SampleSet& px) {
  const Matrix a = scaled_by(px.x, px.sigmas, px.s);
  const double prefactor =
      double(px.nu()) * std::log(px.s * std::sqrt(2.0 * std::numbers::pi)) +
      px.sigmas.array().log().sum();
  return prefactor -
         mean_over_rows(px.count(), [&](Index i) { return log_mean_kernel(a, i); });
}

double normalized_mi(double i_hat, Index n_samp, double chi) {
  const double denom = chi + std::log(double(n_samp));
  if (!(denom > 0)) throw NonPositiveDenominator("chi + log(n) must be positive");
  return i_hat / denom;
}

ChiSolution solve_chi(double i_h, double i_tb_opt, Index n_d, Index n_ar) {
  if (i_h == i_tb_opt)
    throw DegenerateEquation("equal mutual informations admit no unique chi");
  if (n_ar <= n_d) throw Error("solve_chi: n_ar must exceed n_d");
  ChiSolution sol;
  sol.chi = (i_tb_opt * std::log(double(n_d)) - i_h * std::log(double(n_ar))) /
            (i_h - i_tb_opt);
  sol.valid = sol.chi + std::log(double(n_d)) > 0;
  return sol;
}

}  // namespace plom
