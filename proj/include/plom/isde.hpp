#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "plom/gkde.hpp"
#include "plom/types.hpp"

namespace plom {

// Configuration of the first-order sampling dynamics. The coarse step is
// delta_t = s_hat^2 / kappa; the integrator runs n_s substeps per coarse step
// and retains N = n_retained coarse instants.
struct IsdeConfig {
  double delta_t{0};
  double kappa{0};
  int n_s{1};
  int n_retained{0};
  int n_mc{0};
  uint64_t seed{0};

  // Instants (1-based) whose per-realization states feed kernel estimation.
  std::vector<int> kernel_instants{};
  // States are stored when they fit this budget, otherwise replayed on demand.
  size_t storage_budget_bytes{size_t(512) << 20};

  // Test hooks.
  bool disable_drift{false};
  bool disable_noise{false};

  double substep() const { return delta_t / double(n_s); }
  double horizon() const { return delta_t * double(n_retained); }
};

IsdeConfig isde_config_from_kappa(const BandwidthSet& bw, double kappa, int n_retained,
                                  int n_mc, uint64_t seed, int n_s = 1);
IsdeConfig isde_config_from_delta_t(const BandwidthSet& bw, double delta_t,
                                    int n_retained, int n_mc, uint64_t seed,
                                    int n_s = 1);

// Retained states of the discretized dynamics plus their per-entry first and
// second moments over realizations. Large runs keep only the moments and the
// states at the requested kernel instants; anything else is recomputed
// deterministically from the seed.
class IsdeTrajectorySet {
public:
  Index nu() const { return mean_n.empty() ? 0 : mean_n.front().rows(); }
  Index n_d() const { return mean_n.empty() ? 0 : mean_n.front().cols(); }
  int n_retained() const { return int(mean_n.size()); }
  int n_mc() const { return cfg_.n_mc; }
  double delta_t() const { return cfg_.delta_t; }
  const IsdeConfig& config() const { return cfg_; }
  bool stored() const { return !stored_states_.empty(); }

  std::vector<Matrix> mean_n;   // per retained instant, nu x n_d
  std::vector<Matrix> sigma_n;  // per retained instant, nu x n_d

  // Calls fn(ell, pos, state) for every realization ell in ascending order
  // and every requested instant; pos indexes `instants`. Instants must be a
  // subset of config().kernel_instants.
  void visit(std::span<const int> instants,
             const std::function<void(int, int, const Matrix&)>& fn) const;

  const Matrix& stored_state(int instant, int ell) const;

private:
  friend IsdeTrajectorySet simulate(const GkdeModel& model, const IsdeConfig& cfg);

  const GkdeModel* model_{nullptr};
  IsdeConfig cfg_;
  std::vector<int> stored_instants_;
  std::vector<std::vector<Matrix>> stored_states_;  // [pos][ell]
};

// Integrates the dynamics from the training matrix for every realization.
// Deterministic in (model, cfg) regardless of thread count.
IsdeTrajectorySet simulate(const GkdeModel& model, const IsdeConfig& cfg);

struct ConvergenceCurves {
  std::vector<double> ybar;  // scaled Frobenius norm of the mean matrix
  std::vector<double> sbar;  // scaled Frobenius norm of the deviation matrix
};

ConvergenceCurves convergence_curves(const IsdeTrajectorySet& traj);

}  // namespace plom
