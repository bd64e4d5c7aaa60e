#include "plom/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace plom {

namespace {

// Squared distances between the columns of a and b.
Matrix pairwise_sqdist(const Matrix& a, const Matrix& b) {
  Matrix d = -2.0 * (a.transpose() * b);
  d.colwise() += a.colwise().squaredNorm().transpose();
  d.rowwise() += b.colwise().squaredNorm();
  return d.cwiseMax(0.0);
}

// Diagonal of the isotropic normalizer: row sums of exp(-sqdist / (4 eps)).
Vector isotropic_normalizer(const Matrix& eta, double eps_dm) {
  const Matrix d = pairwise_sqdist(eta, eta);
  return (-d / (4.0 * eps_dm)).array().exp().matrix().rowwise().sum();
}

// Diagonal of the training-density normalizer: row sums of the shifted
// Gaussian mixture kernels, in log space.
Vector log_density_normalizer(const GkdeModel& model) {
  const Matrix d = pairwise_sqdist(model.eta(), model.centers());
  const double inv2s2 = 1.0 / (2.0 * model.bw().s_hat * model.bw().s_hat);
  Vector out(d.rows());
  for (Index i = 0; i < d.rows(); ++i) {
    const Array expo = -inv2s2 * d.row(i).transpose().array();
    const double m = expo.maxCoeff();
    out(i) = m + std::log((expo - m).exp().sum());
  }
  return out;
}

struct TransientAccum {
  Matrix sum;       // sum over realizations of exp(-quad/2)
  Vector log_pref;  // per-column log prefactor
};

// Accumulates sum_ell exp(-0.5 * sum_k (eta_ki - y_kj)^2 w_kj) for one
// retained instant. Column j of the accumulator is owned by a single thread;
// realizations are visited in ascending order, so the result is independent
// of the thread count.
Matrix accumulate_kernel_sum(const Matrix& eta, const IsdeTrajectorySet& traj,
                             int instant, const Matrix& w) {
  const Index nu = eta.rows(), n_d = eta.cols();
  const Matrix eta_sq = eta.cwiseAbs2();
  const Matrix base = eta_sq.transpose() * w;  // (i,j) -> sum_k eta_ki^2 w_kj
  Matrix sum = Matrix::Zero(n_d, n_d);
  Matrix yw(nu, n_d), cross(n_d, n_d);
  Vector ysq(n_d);

  const int instants[1] = {instant};
  traj.visit(instants, [&](int /*ell*/, int /*pos*/, const Matrix& y) {
    yw = y.cwiseProduct(w);
    cross.noalias() = eta.transpose() * yw;
    ysq = y.cwiseProduct(yw).colwise().sum().transpose();
#pragma omp parallel for schedule(static) num_threads(num_threads())
    for (Index j = 0; j < n_d; ++j) {
      sum.col(j).array() +=
          (-0.5 * (base.col(j).array() - 2.0 * cross.col(j).array() + ysq(j))).exp();
    }
  });
  return sum;
}

void check_sigma(const Matrix& sigma, int instant) {
  if ((sigma.array() <= 0.0).any())
    throw DegenerateSigma("zero spread at instant " + std::to_string(instant) +
                          "; trajectories collapsed or noise disabled");
}

// Combines column prefactors, realization averages and the normalizer in log
// space; entries too small for the exponential underflow to exactly zero.
Matrix normalized_from_logs(const Matrix& sum, const Vector& log_pref,
                            const Vector& log_b, double log_n_mc) {
  Matrix k(sum.rows(), sum.cols());
  for (Index j = 0; j < sum.cols(); ++j)
    k.col(j) = (sum.col(j).array().log() + log_pref(j) - log_n_mc -
                log_b.array())
                   .exp()
                   .matrix();
  return k;
}

struct EigenPairs {
  Vector values;  // descending
  Matrix phi;     // orthonormal, same order
};

EigenPairs descending_eigen(const Matrix& sym) {
  const Index n = sym.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw Error("kernel eigendecomposition failed");
  EigenPairs out;
  out.values.resize(n);
  out.phi.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    out.values(i) = eig.eigenvalues()(n - 1 - i);
    out.phi.col(i) = eig.eigenvectors().col(n - 1 - i);
    Index at = 0;
    out.phi.col(i).cwiseAbs().maxCoeff(&at);
    if (out.phi(at, i) < 0) out.phi.col(i) = -out.phi.col(i);
  }
  return out;
}

// Eigen decomposition of the symmetrized B^{1/2} k B^{-1/2}.
EigenPairs symmetrized_eigen(const KernelMatrix& km) {
  const Vector sqrt_b = km.b.cwiseSqrt();
  Matrix p = sqrt_b.asDiagonal() * km.k * sqrt_b.cwiseInverse().asDiagonal();
  p = 0.5 * (p + p.transpose()).eval();
  return descending_eigen(p);
}

Vector symmetrized_eigenvalues(const Matrix& k, const Vector& b) {
  const Vector sqrt_b = b.cwiseSqrt();
  Matrix p = sqrt_b.asDiagonal() * k * sqrt_b.cwiseInverse().asDiagonal();
  p = 0.5 * (p + p.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().reverse();
}

}  // namespace

KernelMatrix dmaps_matrix(const TrainingSet& ts, double eps_dm) {
  if (!(eps_dm > 0)) throw Error("dmaps_matrix: eps_dm > 0 required");
  KernelMatrix km;
  km.kind = KernelKind::Dmaps;
  km.eps_dm = eps_dm;
  Matrix kappa = (-pairwise_sqdist(ts.eta, ts.eta) / (4.0 * eps_dm)).array().exp().matrix();
  km.b = kappa.rowwise().sum();
  km.k = (kappa.array().colwise() / km.b.array()).matrix();
  return km;
}

KernelBasis dmaps_basis_at(const TrainingSet& ts, double eps_dm, Index m) {
  if (ts.n_d() <= m) throw Error("dmaps_basis: n_d must exceed the basis size");
  const KernelMatrix km = dmaps_matrix(ts, eps_dm);
  KernelBasis basis = transient_basis(km, m);
  basis.eps_dm = eps_dm;
  return basis;
}

KernelBasis dmaps_basis(const TrainingSet& ts, double jump_target) {
  if (!(jump_target >= 0.1 && jump_target <= 0.5))
    throw Error("dmaps_basis: jump_target must lie in [0.1, 0.5]");
  const Index m = ts.nu() + 1;
  if (ts.n_d() <= m) throw Error("dmaps_basis: n_d must exceed nu + 1");

  const double scale =
      pairwise_sqdist(ts.eta, ts.eta).mean() / 4.0 + 1e-300;
  const auto jump_at = [&](double log_eps) {
    const KernelMatrix km = dmaps_matrix(ts, std::exp(log_eps));
    const Vector vals = symmetrized_eigenvalues(km.k, km.b);
    const double denom = vals(m - 1);
    return denom > 0 ? vals(m) / denom : 1.0;
  };

  // The jump shrinks as eps grows; golden-section on |jump - target| over
  // log eps, biased toward the left (smaller eps) minimizer.
  double lo = std::log(scale * 1e-3), hi = std::log(scale * 1e3);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = std::abs(jump_at(x1) - jump_target);
  double f2 = std::abs(jump_at(x2) - jump_target);
  for (int it = 0; it < 48 && hi - lo > 1e-10; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = std::abs(jump_at(x1) - jump_target);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = std::abs(jump_at(x2) - jump_target);
    }
  }
  const double eps_opt = std::exp(0.5 * (lo + hi));

  KernelBasis basis = dmaps_basis_at(ts, eps_opt, m);
  basis.jump_achieved = basis.jump <= jump_target * (1.0 + 1e-6) + 1e-12;
  return basis;
}

KernelMatrix transient_exact_matrix(const GkdeModel& model,
                                    const IsdeTrajectorySet& traj, int n) {
  if (n < 1 || n > traj.n_retained()) throw Error("transient_exact_matrix: bad instant");
  const Matrix& sigma = traj.sigma_n[size_t(n - 1)];
  check_sigma(sigma, n);

  KernelMatrix km;
  km.kind = KernelKind::TransientExact;
  km.instant = n;
  km.t = double(n) * traj.delta_t();
  km.s_sb = silverman_bandwidth(traj.nu(), traj.n_mc());

  const Matrix w = (km.s_sb * sigma).cwiseAbs2().cwiseInverse();
  const Matrix sum = accumulate_kernel_sum(model.eta(), traj, n, w);

  const double log_ratio = std::log(model.bw().s_hat / km.s_sb);
  const Vector log_pref =
      (double(traj.nu()) * log_ratio -
       sigma.array().log().colwise().sum().transpose())
          .matrix();
  const Vector log_b = log_density_normalizer(model);
  km.b = log_b.array().exp().matrix();
  km.k = normalized_from_logs(sum, log_pref, log_b, std::log(double(traj.n_mc())));
  return km;
}

KernelMatrix transient_connected_matrix(const TrainingSet& ts,
                                        const IsdeTrajectorySet& traj, int n,
                                        double eps_dm) {
  if (n < 1 || n > traj.n_retained())
    throw Error("transient_connected_matrix: bad instant");
  if (!(eps_dm > 0)) throw Error("transient_connected_matrix: eps_dm > 0 required");
  const Matrix& sigma = traj.sigma_n[size_t(n - 1)];
  check_sigma(sigma, n);
  const double dt = traj.delta_t();

  KernelMatrix km;
  km.kind = KernelKind::TransientConnected;
  km.instant = n;
  km.t = double(n) * dt;
  km.eps_dm = eps_dm;

  // Per-entry weight dt / (2 eps sigma^2): the exponent matches the isotropic
  // kernel once the spreads settle to sqrt(dt).
  const Matrix w = (dt / (2.0 * eps_dm)) * sigma.cwiseAbs2().cwiseInverse();
  const Matrix sum = accumulate_kernel_sum(ts.eta, traj, n, w);

  const Vector log_pref =
      (0.5 * std::log(dt) - sigma.array().log()).colwise().sum().transpose().matrix();
  km.b = isotropic_normalizer(ts.eta, eps_dm);
  km.k = normalized_from_logs(sum, log_pref, km.b.array().log(),
                              std::log(double(traj.n_mc())));
  return km;
}

KernelBasis transient_basis(const KernelMatrix& km, Index m) {
  const Index n_d = km.k.rows();
  if (m < 1 || m > n_d) throw Error("transient_basis: bad truncation");
  if (!(km.b.array() > 0).all() || !km.b.allFinite())
    throw Error("transient_basis: invalid normalizer");

  // The transition-density eigenproblem is posed on the normalized kernel
  // itself with plainly orthonormal eigenvectors; the basis-construction
  // kinds go through the B^{-1/2} similarity so their eigenvectors reduce to
  // the diffusion-maps ones.
  const bool plain = km.kind == KernelKind::TransientExact;
  const EigenPairs pairs =
      plain ? descending_eigen(0.5 * (km.k + km.k.transpose())) : symmetrized_eigen(km);
  Index positive = 0;
  while (positive < n_d && pairs.values(positive) > 0) ++positive;
  const Index m_eff = std::min(m, positive);

  KernelBasis basis;
  basis.eigvals = pairs.values;
  basis.m = m_eff;
  basis.negatives_excluded = int(m - m_eff);
  basis.phi = pairs.phi.leftCols(m_eff);
  basis.g = plain ? basis.phi
                  : km.b.cwiseSqrt().cwiseInverse().asDiagonal() * basis.phi;
  basis.eps_dm = km.eps_dm;
  basis.jump = (m_eff < n_d && pairs.values(m_eff - 1) > 0)
                   ? pairs.values(m_eff) / pairs.values(m_eff - 1)
                   : 0.0;
  return basis;
}

RateEstimates rate_estimates(const KernelBasis& basis, double t, int count) {
  if (!(t > 0)) throw Error("rate_estimates: t > 0 required");
  RateEstimates out;
  const int available = int(basis.eigvals.size());
  for (int a = 0; a < std::min(count, available); ++a) {
    const double b = basis.eigvals(a);
    if (b > 0)
      out.lambda.push_back(-std::log(b) / t);
    else
      ++out.skipped;
  }
  return out;
}

KernelBasis identity_basis(Index n_d) {
  KernelBasis basis;
  basis.eigvals = Vector::Ones(n_d);
  basis.g = Matrix::Identity(n_d, n_d);
  basis.phi = basis.g;
  basis.m = n_d;
  return basis;
}

}  // namespace plom
