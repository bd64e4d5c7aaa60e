#include "plom/isde.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "plom/rng.hpp"

namespace plom {

namespace {

// Fixed block size for realization batches. Accumulations run in ascending
// realization order within and across blocks, so the value changes nothing
// numerically; it only bounds working memory.
constexpr int kBlock = 64;

void check_config(const IsdeConfig& cfg) {
  if (!(cfg.delta_t > 0)) throw Error("isde: delta_t must be positive");
  if (cfg.n_s < 1 || cfg.n_retained < 1 || cfg.n_mc < 1)
    throw Error("isde: n_s, n_retained, n_mc must be >= 1");
  for (const int n : cfg.kernel_instants)
    if (n < 1 || n > cfg.n_retained) throw Error("isde: kernel instant out of range");
}

// Steps realizations [ell_begin, ell_end) through `steps` substeps and writes
// the state at every retained instant into keep[ell - ell_begin][n - 1].
// noise_stride is the full run's substep count, so a truncated replay draws
// the same noise as the original pass.
void step_block(const GkdeModel& model, const IsdeConfig& cfg, int steps,
                uint64_t noise_stride, int ell_begin, int ell_end,
                std::vector<std::vector<Matrix>>& keep) {
  const Index nu = model.nu(), n_d = model.n_d();
  const double dt = cfg.substep();
  const double half_dt = 0.5 * dt;
  const double sqrt_dt = std::sqrt(dt);
  const uint64_t noise_stream = rng::derive_seed(cfg.seed, "isde/noise");
  const uint64_t elems = uint64_t(nu) * uint64_t(n_d);

#pragma omp parallel num_threads(num_threads())
  {
    Matrix state, drift, scratch, noise(nu, n_d);
#pragma omp for schedule(dynamic)
    for (int ell = ell_begin; ell < ell_end; ++ell) {
      state = model.eta();
      for (int mu = 1; mu <= steps; ++mu) {
        if (!cfg.disable_drift) {
          model.grad_log_pdf_matrix(state, drift, scratch);
          state += half_dt * drift;
        }
        if (!cfg.disable_noise) {
          const uint64_t offset =
              (uint64_t(ell) * noise_stride + uint64_t(mu - 1)) * elems;
          rng::fill_normals(cfg.seed, noise_stream, offset,
                            {noise.data(), size_t(noise.size())});
          state += sqrt_dt * noise;
        }
        if (mu % cfg.n_s == 0) keep[size_t(ell - ell_begin)][size_t(mu / cfg.n_s - 1)] = state;
      }
    }
  }
}

}  // namespace

IsdeConfig isde_config_from_kappa(const BandwidthSet& bw, double kappa, int n_retained,
                                  int n_mc, uint64_t seed, int n_s) {
  if (!(kappa >= 1)) throw Error("isde: kappa >= 1 required");
  IsdeConfig cfg;
  cfg.kappa = kappa;
  cfg.delta_t = bw.s_hat * bw.s_hat / kappa;
  cfg.n_s = n_s;
  cfg.n_retained = n_retained;
  cfg.n_mc = n_mc;
  cfg.seed = seed;
  return cfg;
}

IsdeConfig isde_config_from_delta_t(const BandwidthSet& bw, double delta_t,
                                    int n_retained, int n_mc, uint64_t seed, int n_s) {
  if (!(delta_t > 0)) throw Error("isde: delta_t > 0 required");
  IsdeConfig cfg;
  cfg.delta_t = delta_t;
  cfg.kappa = bw.s_hat * bw.s_hat / delta_t;
  cfg.n_s = n_s;
  cfg.n_retained = n_retained;
  cfg.n_mc = n_mc;
  cfg.seed = seed;
  return cfg;
}

IsdeTrajectorySet simulate(const GkdeModel& model, const IsdeConfig& cfg) {
  check_config(cfg);
  const Index nu = model.nu(), n_d = model.n_d();
  const int N = cfg.n_retained;

  IsdeTrajectorySet traj;
  traj.model_ = &model;
  traj.cfg_ = cfg;
  traj.stored_instants_ = cfg.kernel_instants;
  std::sort(traj.stored_instants_.begin(), traj.stored_instants_.end());
  traj.stored_instants_.erase(
      std::unique(traj.stored_instants_.begin(), traj.stored_instants_.end()),
      traj.stored_instants_.end());

  const size_t state_bytes = sizeof(double) * size_t(nu) * size_t(n_d);
  const bool store = !traj.stored_instants_.empty() &&
                     state_bytes * size_t(cfg.n_mc) * traj.stored_instants_.size() <=
                         cfg.storage_budget_bytes;
  if (store) {
    traj.stored_states_.resize(traj.stored_instants_.size());
    for (auto& v : traj.stored_states_) v.resize(size_t(cfg.n_mc));
  }

  std::vector<Matrix> sum(size_t(N), Matrix::Zero(nu, n_d));
  std::vector<Matrix> sumsq(size_t(N), Matrix::Zero(nu, n_d));
  std::vector<std::vector<Matrix>> keep(kBlock, std::vector<Matrix>(size_t(N)));

  const int total_steps = cfg.n_s * cfg.n_retained;
  for (int ell0 = 0; ell0 < cfg.n_mc; ell0 += kBlock) {
    const int ell1 = std::min(ell0 + kBlock, cfg.n_mc);
    step_block(model, cfg, total_steps, uint64_t(total_steps), ell0, ell1, keep);
    for (int ell = ell0; ell < ell1; ++ell) {
      const auto& states = keep[size_t(ell - ell0)];
      for (int n = 0; n < N; ++n) {
        const Matrix& y = states[size_t(n)];
        if (!y.allFinite())
          throw NonFinite("state diverged at instant " + std::to_string(n + 1) +
                          "; reduce the substep");
        sum[size_t(n)] += y;
        sumsq[size_t(n)] += y.cwiseAbs2();
      }
      if (store) {
        for (size_t pos = 0; pos < traj.stored_instants_.size(); ++pos)
          traj.stored_states_[pos][size_t(ell)] =
              states[size_t(traj.stored_instants_[pos] - 1)];
      }
    }
  }

  traj.mean_n.resize(size_t(N));
  traj.sigma_n.resize(size_t(N));
  const double inv_mc = 1.0 / double(cfg.n_mc);
  for (int n = 0; n < N; ++n) {
    traj.mean_n[size_t(n)] = inv_mc * sum[size_t(n)];
    traj.sigma_n[size_t(n)] =
        (inv_mc * sumsq[size_t(n)] - traj.mean_n[size_t(n)].cwiseAbs2())
            .cwiseMax(0.0)
            .cwiseSqrt();
  }
  return traj;
}

void IsdeTrajectorySet::visit(
    std::span<const int> instants,
    const std::function<void(int, int, const Matrix&)>& fn) const {
  for (const int n : instants)
    if (std::find(stored_instants_.begin(), stored_instants_.end(), n) ==
        stored_instants_.end())
      throw Error("isde: instant was not declared in kernel_instants");

  if (stored()) {
    for (int ell = 0; ell < cfg_.n_mc; ++ell)
      for (size_t pos = 0; pos < instants.size(); ++pos)
        fn(ell, int(pos), stored_state(instants[pos], ell));
    return;
  }

  // Replay: identical noise indices reproduce the original pass bit for bit.
  const int max_instant = *std::max_element(instants.begin(), instants.end());
  const uint64_t noise_stride = uint64_t(cfg_.n_s) * uint64_t(cfg_.n_retained);
  std::vector<std::vector<Matrix>> keep(kBlock,
                                        std::vector<Matrix>(size_t(max_instant)));
  for (int ell0 = 0; ell0 < cfg_.n_mc; ell0 += kBlock) {
    const int ell1 = std::min(ell0 + kBlock, cfg_.n_mc);
    step_block(*model_, cfg_, cfg_.n_s * max_instant, noise_stride, ell0, ell1, keep);
    for (int ell = ell0; ell < ell1; ++ell)
      for (size_t pos = 0; pos < instants.size(); ++pos)
        fn(ell, int(pos), keep[size_t(ell - ell0)][size_t(instants[pos] - 1)]);
  }
}

const Matrix& IsdeTrajectorySet::stored_state(int instant, int ell) const {
  const auto it =
      std::find(stored_instants_.begin(), stored_instants_.end(), instant);
  if (it == stored_instants_.end() || !stored())
    throw Error("isde: state not stored for instant " + std::to_string(instant));
  return stored_states_[size_t(it - stored_instants_.begin())][size_t(ell)];
}

ConvergenceCurves convergence_curves(const IsdeTrajectorySet& traj) {
  ConvergenceCurves c;
  const double scale = 1.0 / std::sqrt(double(traj.nu()) * double(traj.n_d()));
  c.ybar.reserve(traj.mean_n.size());
  c.sbar.reserve(traj.sigma_n.size());
  for (const auto& m : traj.mean_n) c.ybar.push_back(scale * m.norm());
  for (const auto& s : traj.sigma_n) c.sbar.push_back(scale * s.norm());
  return c;
}

}  // namespace plom
