#pragma once

#include <vector>

#include "plom/gkde.hpp"
#include "plom/isde.hpp"
#include "plom/types.hpp"

namespace plom {

enum class KernelKind { TransientExact, TransientConnected, Dmaps };

// An n_d x n_d kernel matrix together with its diagonal normalizer:
// k = B^{-1} * kappa. For the isotropic kind B holds the row sums of kappa,
// so k is row-stochastic; for the transient kinds B comes from the training
// density and k only approaches 1/n_d entrywise at stationarity.
struct KernelMatrix {
  Matrix k;        // normalized kernel
  Vector b;        // diagonal of B
  KernelKind kind{KernelKind::Dmaps};
  int instant{0};  // n, for the transient kinds
  double t{0};     // n * delta_t
  double eps_dm{0};
  double s_sb{0};  // Silverman bandwidth of the transition-density estimate

  Matrix kappa() const { return b.asDiagonal() * k; }
};

// Reduced eigenbasis of a kernel matrix: eigvals of the symmetrized
// B^{-1/2} kappa B^{-1/2}, eigenvectors mapped back by g = B^{-1/2} phi.
struct KernelBasis {
  Vector eigvals;  // all n_d, descending
  Matrix g;        // n_d x m
  Matrix phi;      // n_d x m, orthonormal columns
  Index m{0};
  double eps_dm{0};
  double jump{0};  // eigvals(m) / eigvals(m-1), 0-based
  bool jump_achieved{true};
  int negatives_excluded{0};
};

// Isotropic kernel matrix with smoothing parameter eps_dm.
KernelMatrix dmaps_matrix(const TrainingSet& ts, double eps_dm);

// Reduced isotropic basis with m = nu + 1 columns. The smoothing parameter
// is searched (golden section over log eps) so the spectral jump past column
// m matches jump_target; `jump_achieved` is false when the target cannot be
// met in the search range.
KernelBasis dmaps_basis(const TrainingSet& ts, double jump_target);

// Variant reusing a caller-chosen eps (no search).
KernelBasis dmaps_basis_at(const TrainingSet& ts, double eps_dm, Index m);

// Transition-density kernel estimate at retained instant n, normalized by the
// training density.
KernelMatrix transient_exact_matrix(const GkdeModel& model,
                                    const IsdeTrajectorySet& traj, int n);

// Anisotropic transient kernel sharing the isotropic normalizer, built so it
// reduces to the isotropic kernel as delta_t -> 0 at n = 1.
KernelMatrix transient_connected_matrix(const TrainingSet& ts,
                                        const IsdeTrajectorySet& traj, int n,
                                        double eps_dm);

// Eigenpairs of the symmetrized kernel, truncated to m columns. Negative
// eigenvalues never enter the basis; if fewer than m positive eigenvalues
// exist the basis is narrower and negatives_excluded reports the shortfall.
KernelBasis transient_basis(const KernelMatrix& km, Index m);

// Decay-rate estimates -log(eigval)/t for the positive eigenvalues among the
// first `count`; non-positive ones are skipped and counted.
struct RateEstimates {
  std::vector<double> lambda;
  int skipped{0};
};
RateEstimates rate_estimates(const KernelBasis& basis, double t, int count);

// Identity basis (m = n_d): makes the generator run unprojected.
KernelBasis identity_basis(Index n_d);

}  // namespace plom
