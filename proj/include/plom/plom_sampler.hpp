#pragma once

#include <cstdint>
#include <vector>

#include "plom/gkde.hpp"
#include "plom/kernels.hpp"
#include "plom/types.hpp"

namespace plom {

enum class ConstraintMode { None, Diagonal, Full };

// Parameters of the reduced-order second-order sampler and of the
// moment-constraint iteration.
struct PlomConfig {
  double f0{4.0};
  double dt_sv{0};  // 0 -> default 2*pi*s_hat/20
  int m0{30};       // steps to stationarity per restart
  int n_mch{1000};  // retained learned matrices
  ConstraintMode constraints{ConstraintMode::Full};
  double beta1{0.001};
  double beta2{0.05};
  int i2{20};
  double err_tol{0.001};
  int max_iter{5000};
  uint64_t seed{0};
  // Continue each restart from its previous terminal state across multiplier
  // iterations instead of regenerating from scratch.
  bool warm_start{false};
};

// Learned realizations: n_mch matrices of shape nu x n_d stored side by side
// (n_ar = n_d * n_mch columns).
struct LearnedSet {
  Matrix eta_ar;
  Index n_d{0};
  Vector lambda;
  std::vector<double> err_trace;
  std::vector<double> alpha_trace;
  int i_last{0};
  bool converged{true};

  Index n_mch() const { return n_d ? eta_ar.cols() / n_d : 0; }
  Index n_ar() const { return eta_ar.cols(); }
  auto matrix(Index ell) const { return eta_ar.middleCols(ell * n_d, n_d); }
};

// Pseudo-inverse factor [a] = g (g^T g)^{-1}; g^T a = I.
Matrix projector(const KernelBasis& basis);

// Multiplier layout for the constrained drift. Diagonal mode carries one
// multiplier per squared component; full mode carries (means, squares, cross
// moments) packed in that order.
Index multiplier_size(ConstraintMode mode, Index nu);

// Runs n_mch independent restarts of the damped second-order dynamics
// projected on the basis, each integrated m0 steps, and returns the terminal
// states mapped back through the basis. Deterministic in (inputs, seed).
LearnedSet generate(const GkdeModel& model, const KernelBasis& basis,
                    const PlomConfig& cfg, const Vector& lambda = Vector());

// Iterates the multiplier update until the moment constraints hold to
// err_tol. Each iteration regenerates realizations with the same noise
// stream, so the iteration solves a deterministic fixed-point problem.
LearnedSet constrain(const GkdeModel& model, const KernelBasis& basis,
                     const PlomConfig& cfg);

}  // namespace plom
