#include "plom/plom_sampler.hpp"

#include <omp.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "plom/rng.hpp"

namespace plom {

namespace {

struct Multipliers {
  Vector linear;  // length nu (zero unless full mode)
  Matrix quad;    // nu x nu symmetric: 2 diag(squares) + cross terms
  bool active{false};
};

Multipliers unpack(ConstraintMode mode, Index nu, const Vector& lambda) {
  Multipliers m;
  if (mode == ConstraintMode::None || lambda.size() == 0) return m;
  if (lambda.size() != multiplier_size(mode, nu))
    throw DimensionMismatch("multiplier vector has wrong length");
  m.active = true;
  m.linear = Vector::Zero(nu);
  m.quad = Matrix::Zero(nu, nu);
  if (mode == ConstraintMode::Diagonal) {
    m.quad.diagonal() = 2.0 * lambda;
    return m;
  }
  m.linear = lambda.head(nu);
  m.quad.diagonal() = 2.0 * lambda.segment(nu, nu);
  Index at = 2 * nu;
  for (Index k = 0; k < nu; ++k)
    for (Index kp = k + 1; kp < nu; ++kp, ++at) {
      m.quad(k, kp) = lambda(at);
      m.quad(kp, k) = lambda(at);
    }
  return m;
}

// Moment functions h evaluated column by column, and their packing order:
// squares only (diagonal mode) or means, squares, cross moments (full mode).
Vector constraint_targets(ConstraintMode mode, Index nu) {
  Vector b = Vector::Zero(multiplier_size(mode, nu));
  if (mode == ConstraintMode::Diagonal)
    b.setOnes();
  else
    b.segment(nu, nu).setOnes();
  return b;
}

void pack_h(ConstraintMode mode, const Vector& col, Vector& h) {
  const Index nu = col.size();
  if (mode == ConstraintMode::Diagonal) {
    h = col.cwiseAbs2();
    return;
  }
  h.resize(multiplier_size(mode, nu));
  h.head(nu) = col;
  h.segment(nu, nu) = col.cwiseAbs2();
  Index at = 2 * nu;
  for (Index k = 0; k < nu; ++k)
    for (Index kp = k + 1; kp < nu; ++kp, ++at) h(at) = col(k) * col(kp);
}

struct RestartStates {
  std::vector<Matrix> z;
  std::vector<Matrix> y;
};

LearnedSet generate_impl(const GkdeModel& model, const KernelBasis& basis,
                         const PlomConfig& cfg, const Vector& lambda,
                         uint64_t wien_stream, RestartStates* warm) {
  if (!(cfg.f0 > 0 && cfg.f0 < 4.0 / model.bw().s_hat))
    throw Error("generate: f0 must lie in (0, 4/s_hat)");
  if (cfg.m0 < 1 || cfg.n_mch < 1) throw Error("generate: m0, n_mch >= 1 required");

  const Index nu = model.nu(), n_d = model.n_d(), m = basis.m;
  const double dt =
      cfg.dt_sv > 0 ? cfg.dt_sv : 2.0 * std::numbers::pi * model.bw().s_hat / 20.0;
  const double b_sv = cfg.f0 * dt / 4.0;
  const double damp = (1.0 - b_sv) / (1.0 + b_sv);
  const double drift_gain = dt / (1.0 + b_sv);
  const double noise_gain = std::sqrt(cfg.f0) * std::sqrt(dt) / (1.0 + b_sv);

  const Matrix a = projector(basis);
  const Matrix z_init = model.eta() * a;
  const Multipliers mult = unpack(cfg.constraints, nu, lambda);
  const uint64_t init_stream = rng::derive_seed(cfg.seed, "plom/init");
  const uint64_t elems = uint64_t(nu) * uint64_t(n_d);

  const bool warm_valid = warm && !warm->z.empty();
  LearnedSet out;
  out.n_d = n_d;
  out.eta_ar.resize(nu, n_d * cfg.n_mch);
  out.lambda = lambda;
  if (warm && !warm_valid) {
    warm->z.resize(size_t(cfg.n_mch));
    warm->y.resize(size_t(cfg.n_mch));
  }

  std::atomic<bool> bad{false};
#pragma omp parallel num_threads(num_threads())
  {
    Matrix z, y, zhalf, u, grad, scratch, noise(nu, n_d), force;
#pragma omp for schedule(dynamic)
    for (int ell = 0; ell < cfg.n_mch; ++ell) {
      if (warm_valid) {
        z = warm->z[size_t(ell)];
        y = warm->y[size_t(ell)];
      } else {
        z = z_init;
        rng::fill_normals(cfg.seed, init_stream, uint64_t(ell) * elems,
                          {noise.data(), size_t(noise.size())});
        y = noise * a;
      }
      for (int step = 1; step <= cfg.m0; ++step) {
        zhalf = z + (dt / 2.0) * y;
        u.noalias() = zhalf * basis.g.transpose();
        model.grad_log_pdf_matrix(u, grad, scratch);
        if (mult.active) {
          grad.noalias() -= mult.quad * u;
          grad.colwise() -= mult.linear;
        }
        force.noalias() = grad * a;
        const uint64_t offset =
            (uint64_t(ell) * uint64_t(cfg.m0) + uint64_t(step - 1)) * elems;
        rng::fill_normals(cfg.seed, wien_stream, offset,
                          {noise.data(), size_t(noise.size())});
        y = damp * y + drift_gain * force + noise_gain * (noise * a);
        z = zhalf + (dt / 2.0) * y;
      }
      out.eta_ar.middleCols(Index(ell) * n_d, n_d).noalias() = z * basis.g.transpose();
      if (!z.allFinite()) bad = true;
      if (warm) {
        warm->z[size_t(ell)] = z;
        warm->y[size_t(ell)] = y;
      }
    }
  }
  if (bad) throw NonFinite("sampler state diverged; reduce dt_sv");
  return out;
}

}  // namespace

Index multiplier_size(ConstraintMode mode, Index nu) {
  switch (mode) {
    case ConstraintMode::None:
      return 0;
    case ConstraintMode::Diagonal:
      return nu;
    case ConstraintMode::Full:
      return 2 * nu + nu * (nu - 1) / 2;
  }
  return 0;
}

Matrix projector(const KernelBasis& basis) {
  const Matrix gram = basis.g.transpose() * basis.g;
  Eigen::FullPivLU<Matrix> lu(gram);
  if (!lu.isInvertible()) throw SingularGram("basis Gram matrix is singular");
  return basis.g * lu.inverse();
}

LearnedSet generate(const GkdeModel& model, const KernelBasis& basis,
                    const PlomConfig& cfg, const Vector& lambda) {
  return generate_impl(model, basis, cfg, lambda,
                       rng::derive_seed(cfg.seed, "plom/wien"), nullptr);
}

LearnedSet constrain(const GkdeModel& model, const KernelBasis& basis,
                     const PlomConfig& cfg) {
  if (cfg.constraints == ConstraintMode::None)
    throw Error("constrain: constraint mode is none");
  if (!(cfg.beta1 < cfg.beta2 && cfg.beta2 <= 1.0) || cfg.i2 < 2)
    throw Error("constrain: need beta1 < beta2 <= 1 and i2 >= 2");

  const Index nu = model.nu();
  const Index dim = multiplier_size(cfg.constraints, nu);
  const Vector b = constraint_targets(cfg.constraints, nu);
  const double b_norm = b.norm();

  Vector lambda = Vector::Zero(dim);
  RestartStates warm_states;
  RestartStates* warm = cfg.warm_start ? &warm_states : nullptr;
  const uint64_t wien_base = rng::derive_seed(cfg.seed, "plom/wien");

  LearnedSet best;
  std::vector<double> err_trace, alpha_trace;
  double prev_err = std::numeric_limits<double>::infinity();
  int rising = 0;

  for (int iter = 0; iter <= cfg.max_iter; ++iter) {
    // Fresh regeneration reuses the same noise stream, so the iteration
    // solves a fixed, deterministic moment-matching problem.
    const uint64_t wien_stream =
        cfg.warm_start ? rng::derive_seed(wien_base, std::to_string(iter)) : wien_base;
    best = generate_impl(model, basis, cfg, lambda, wien_stream, warm);

    // Sample moments and covariance of the constraint functions.
    Vector h(dim), mean_h = Vector::Zero(dim);
    Matrix second = Matrix::Zero(dim, dim);
    for (Index c = 0; c < best.n_ar(); ++c) {
      pack_h(cfg.constraints, best.eta_ar.col(c), h);
      mean_h += h;
      second.selfadjointView<Eigen::Lower>().rankUpdate(h);
    }
    mean_h /= double(best.n_ar());
    second = Matrix(second.selfadjointView<Eigen::Lower>()) / double(best.n_ar());
    Matrix cov = second - mean_h * mean_h.transpose();

    const Vector residual = b - mean_h;
    const double err = residual.norm() / b_norm;
    err_trace.push_back(err);
    best.i_last = iter;
    best.lambda = lambda;

    if (err <= cfg.err_tol) {
      best.converged = true;
      best.err_trace = std::move(err_trace);
      best.alpha_trace = std::move(alpha_trace);
      return best;
    }
    if (iter == cfg.max_iter) break;

    rising = err > prev_err ? rising + 1 : 0;
    if (rising >= 50) throw Diverged("constraint error rose for 50 iterations");
    prev_err = err;

    cov.diagonal().array() += 1e-10 * cov.trace() / double(dim);
    Eigen::LDLT<Matrix> ldlt(cov);
    if (ldlt.info() != Eigen::Success)
      throw SingularCovariance("constraint covariance is numerically singular");
    const Vector newton = ldlt.solve(residual);
    if (!newton.allFinite())
      throw SingularCovariance("constraint update is not finite");

    const int i = iter + 1;
    const double alpha =
        i <= cfg.i2
            ? cfg.beta1 + (cfg.beta2 - cfg.beta1) * double(i - 1) / double(cfg.i2 - 1)
            : cfg.beta2;
    alpha_trace.push_back(alpha);
    lambda -= alpha * newton;
  }

  best.converged = false;
  best.err_trace = std::move(err_trace);
  best.alpha_trace = std::move(alpha_trace);
  return best;
}

}  // namespace plom
