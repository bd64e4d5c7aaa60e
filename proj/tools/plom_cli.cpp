#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>

#include "plom/gaussian_reference.hpp"
#include "plom/info_metrics.hpp"
#include "plom/io.hpp"
#include "plom/pipeline.hpp"
#include "plom/plom_sampler.hpp"
#include "plom/rng.hpp"
#include "plom/synthetic_data.hpp"

namespace {

using plom::Index;
using plom::Matrix;
using plom::Vector;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void apply_out_dir_env(std::string& out_dir) {
  if (const char* env = std::getenv("PLOM_OUT"); env && *env) out_dir = env;
}

void add_run_options(CLI::App* cmd, plom::RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "matrix file (CSV or binary)");
  cmd->add_option("--synthetic", cfg.synthetic,
                  "dataset kind: gaussian|multiconnected|chaos|highdim");
  cmd->add_option("--nu", cfg.synth_nu, "synthetic dimension");
  cmd->add_option("--nd", cfg.synth_nd, "synthetic realization count");
  cmd->add_flag("--pca,!--skip-pca", [&cfg](int64_t v) { cfg.skip_pca = v <= 0; },
                "reduce the input with PCA before normalization");
  cmd->add_option("--eps-pca", cfg.eps_pca, "PCA retained-energy tolerance");
  cmd->add_option("--jump", cfg.jump_target, "spectral jump target in [0.1,0.5]");
  cmd->add_option("--kappa", cfg.kappa, "coarse-step divisor (delta_t = s_hat^2/kappa)");
  cmd->add_option("--delta-t", cfg.delta_t_override, "explicit coarse step");
  cmd->add_option("--n", cfg.n_retained, "retained instants");
  cmd->add_option("--ns", cfg.n_s, "substeps per instant");
  cmd->add_option("--nmc", cfg.n_mc, "realizations of the dynamics");
  cmd->add_option("--tau-c", cfg.tau_c, "admissibility threshold");
  cmd->add_option("--mi-cap", cfg.mi_cap, "subsample cap for the estimators");
  cmd->add_option("--f0", cfg.f0, "generator damping");
  cmd->add_option("--dt-sv", cfg.dt_sv, "generator step (0 = default)");
  cmd->add_option("--m0", cfg.m0, "generator steps to stationarity");
  cmd->add_option("--nmch", cfg.n_mch, "retained learned matrices");
  cmd->add_option("--constraints", cfg.constraint_mode, "none|diagonal|full");
  cmd->add_option("--beta1", cfg.beta1, "relaxation start");
  cmd->add_option("--beta2", cfg.beta2, "relaxation plateau");
  cmd->add_option("--i2", cfg.i2, "relaxation ramp length");
  cmd->add_option("--err-tol", cfg.err_tol, "constraint stopping tolerance");
  cmd->add_option("--max-iter", cfg.max_iter, "constraint iteration cap");
  cmd->add_flag("--baseline,!--no-baseline",
                [&cfg](int64_t v) { cfg.run_baseline = v > 0; },
                "also run the unprojected baseline");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = all)");
}

int cmd_reference(Index n_d, const std::vector<Index>& grid, double delta_t,
                  int n_retained, uint64_t seed, const std::string& out_dir,
                  int threads) {
  try {
    if (threads > 0) plom::set_num_threads(threads);
    fs::create_directories(fs::path(out_dir));

    const auto run_one = [&](Index nd) {
      plom::synth::GeneratorSpec spec;
      spec.kind = plom::synth::DatasetKind::Gaussian;
      spec.nu = 1;
      spec.n_d = nd;
      spec.seed = plom::rng::derive_seed(seed, "reference/data");
      const plom::TrainingSet ts = plom::synth::generate(spec);
      const plom::GkdeModel model(ts);
      const double dt = delta_t > 0 ? delta_t : model.bw().s_hat * model.bw().s_hat;
      plom::IsdeConfig icfg = plom::isde_config_from_delta_t(
          model.bw(), dt, n_retained, int(nd),
          plom::rng::derive_seed(seed, "reference/isde"));
      icfg.kernel_instants = {2};
      const plom::IsdeTrajectorySet traj = plom::simulate(model, icfg);
      const plom::KernelMatrix khat = plom::transient_exact_matrix(model, traj, 2);
      const plom::KernelBasis basis = plom::transient_basis(khat, 6);
      const plom::RateEstimates rates = plom::rate_estimates(basis, khat.t, 6);
      return std::pair{rates, khat.t};
    };

    const auto [rates, t] = run_one(n_d);
    std::vector<double> alpha(rates.lambda.size()), exact(rates.lambda.size());
    std::iota(alpha.begin(), alpha.end(), 0.0);
    for (size_t a = 0; a < exact.size(); ++a) exact[a] = double(a) / 2.0;
    plom::io::write_table_csv(fs::path(out_dir) / "spectrum.csv",
                              {"alpha", "lambda_exact", "lambda_hat"},
                              {alpha, exact, rates.lambda});
    const double err = plom::ou::spectrum_error(rates.lambda, 5);
    std::cout << "n_d=" << n_d << " t=" << t << " err_lambda=" << err << "\n";
    for (size_t a = 0; a < rates.lambda.size(); ++a)
      std::cout << "  alpha=" << a << " exact=" << exact[a]
                << " estimated=" << rates.lambda[a] << "\n";

    if (!grid.empty()) {
      std::vector<double> nds, errs;
      for (const Index nd : grid) {
        const auto [r, tt] = run_one(nd);
        (void)tt;
        nds.push_back(double(nd));
        errs.push_back(plom::ou::spectrum_error(r.lambda, 5));
        std::cout << "n_d=" << nd << " err_lambda=" << errs.back() << "\n";
      }
      plom::io::write_table_csv(fs::path(out_dir) / "err_lambda.csv",
                                {"n_d", "err_lambda"}, {nds, errs});
    }
    return plom::kExitOk;
  } catch (const plom::IoError& e) {
    std::cerr << "input-error: " << e.what() << "\n";
    return plom::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "numerical-error: " << e.what() << "\n";
    return plom::kExitNumericalError;
  }
}

int cmd_metrics(const std::string& file_a, const std::string& file_b, Index cap,
                uint64_t seed) {
  try {
    const plom::SampleSet a =
        plom::SampleSet::from_matrix(plom::io::read_matrix_auto(file_a), cap, seed);
    const plom::SampleSet b =
        plom::SampleSet::from_matrix(plom::io::read_matrix_auto(file_b), cap, seed);
    ordered_json j;
    j["kl_a_b"] = plom::kl_divergence(a, b);
    j["kl_b_a"] = plom::kl_divergence(b, a);
    j["mi_a"] = plom::mutual_information(a);
    j["mi_b"] = plom::mutual_information(b);
    j["entropy_a"] = plom::entropy(a);
    j["entropy_b"] = plom::entropy(b);
    j["subsample_cap"] = cap;
    std::cout << j.dump(2) << "\n";
    return plom::kExitOk;
  } catch (const plom::IoError& e) {
    std::cerr << "input-error: " << e.what() << "\n";
    return plom::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "numerical-error: " << e.what() << "\n";
    return plom::kExitNumericalError;
  }
}

int cmd_plom(const std::string& data_file, const std::string& basis_file,
             const plom::RunConfig& rc) {
  try {
    if (rc.threads > 0) plom::set_num_threads(rc.threads);
    fs::create_directories(fs::path(rc.out_dir));
    const plom::TrainingSet ts = plom::load_training_set(data_file);
    const plom::GkdeModel model(ts);

    plom::KernelBasis basis;
    if (basis_file.empty()) {
      basis = plom::identity_basis(ts.n_d());
    } else {
      basis.g = plom::io::read_matrix_auto(basis_file);
      basis.phi = basis.g;
      basis.m = basis.g.cols();
      basis.eigvals = Vector::Ones(basis.m);
    }

    plom::PlomConfig pc;
    pc.f0 = rc.f0;
    pc.dt_sv = rc.dt_sv;
    pc.m0 = rc.m0;
    pc.n_mch = rc.n_mch;
    pc.constraints = rc.constraint_mode == "none"
                         ? plom::ConstraintMode::None
                         : (rc.constraint_mode == "diagonal"
                                ? plom::ConstraintMode::Diagonal
                                : plom::ConstraintMode::Full);
    pc.beta1 = rc.beta1;
    pc.beta2 = rc.beta2;
    pc.i2 = rc.i2;
    pc.err_tol = rc.err_tol;
    pc.max_iter = rc.max_iter;
    pc.seed = plom::rng::derive_seed(rc.seed, "plom/standalone");

    const plom::LearnedSet set = pc.constraints == plom::ConstraintMode::None
                                     ? plom::generate(model, basis, pc)
                                     : plom::constrain(model, basis, pc);
    plom::io::write_matrix_bin(fs::path(rc.out_dir) / "learned.bin", set.eta_ar);
    plom::io::write_matrix_csv(fs::path(rc.out_dir) / "learned.csv", set.eta_ar);
    if (!set.err_trace.empty()) {
      std::vector<double> is(set.err_trace.size());
      std::iota(is.begin(), is.end(), 0.0);
      std::vector<double> alphas = set.alpha_trace;
      alphas.resize(set.err_trace.size(), 0.0);
      plom::io::write_table_csv(fs::path(rc.out_dir) / "constraint_trace.csv",
                                {"i", "err", "alpha_i"},
                                {is, set.err_trace, alphas});
    }
    std::cout << "learned " << set.n_mch() << " matrices (" << set.n_ar()
              << " realizations), converged=" << set.converged << "\n";
    return plom::kExitOk;
  } catch (const plom::IoError& e) {
    std::cerr << "input-error: " << e.what() << "\n";
    return plom::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "numerical-error: " << e.what() << "\n";
    return plom::kExitNumericalError;
  }
}

int cmd_gen(const std::string& kind, Index nu, Index n_d, uint64_t seed,
            const std::string& out, bool binary) {
  try {
    plom::synth::GeneratorSpec spec;
    spec.kind = plom::synth::kind_from_string(kind);
    spec.nu = nu;
    spec.n_d = n_d;
    spec.seed = seed;
    const plom::TrainingSet ts = plom::synth::generate(spec);
    if (binary)
      plom::io::write_matrix_bin(out, ts.eta);
    else
      plom::io::write_matrix_csv(out, ts.eta);
    std::cout << "wrote " << out << " (" << ts.nu() << " x " << ts.n_d() << ")\n";
    return plom::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "input-error: " << e.what() << "\n";
    return plom::kExitInputError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic learning on manifolds with transient reduced bases"};
  app.require_subcommand(1);

  plom::RunConfig run_cfg;
  apply_out_dir_env(run_cfg.out_dir);
  std::string run_config_path;
  auto* run = app.add_subcommand("run", "full pipeline from a config file");
  run->add_option("config", run_config_path, "experiment config file (INI-style)");
  add_run_options(run, run_cfg);

  plom::RunConfig bases_cfg;
  apply_out_dir_env(bases_cfg.out_dir);
  auto* bases = app.add_subcommand("bases", "bases and angle curve only");
  add_run_options(bases, bases_cfg);

  Index ref_nd = 1200;
  std::vector<Index> ref_grid;
  double ref_dt = 0;
  int ref_n = 150;
  uint64_t ref_seed = 0;
  std::string ref_out = "plom-out";
  int ref_threads = 0;
  apply_out_dir_env(ref_out);
  auto* reference = app.add_subcommand("reference", "exact-spectrum validation");
  reference->add_option("--nd", ref_nd, "sample count");
  reference->add_option("--grid", ref_grid, "sample-count grid for the error curve");
  reference->add_option("--delta-t", ref_dt, "coarse step (0 = s_hat^2)");
  reference->add_option("--n", ref_n, "retained instants");
  reference->add_option("--seed", ref_seed, "master seed");
  reference->add_option("--out", ref_out, "output directory");
  reference->add_option("--threads", ref_threads, "worker threads");

  std::string met_a, met_b;
  Index met_cap = 20000;
  uint64_t met_seed = 0;
  auto* metrics = app.add_subcommand("metrics", "divergence and information measures");
  metrics->add_option("file_a", met_a)->required();
  metrics->add_option("file_b", met_b)->required();
  metrics->add_option("--cap", met_cap, "subsample cap");
  metrics->add_option("--seed", met_seed, "subsample seed");

  plom::RunConfig plom_cfg;
  apply_out_dir_env(plom_cfg.out_dir);
  std::string plom_data, plom_basis;
  auto* sample = app.add_subcommand("plom", "generator only, given data and a basis");
  sample->add_option("--data", plom_data, "normalized training matrix")->required();
  sample->add_option("--basis", plom_basis, "basis matrix (empty = identity)");
  add_run_options(sample, plom_cfg);

  std::string gen_kind = "gaussian", gen_out = "dataset.csv";
  Index gen_nu = 9, gen_nd = 400;
  uint64_t gen_seed = 0;
  bool gen_bin = false;
  auto* gen = app.add_subcommand("gen", "write a synthetic dataset");
  gen->add_option("--kind", gen_kind, "gaussian|multiconnected|chaos|highdim");
  gen->add_option("--nu", gen_nu);
  gen->add_option("--nd", gen_nd);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out);
  gen->add_flag("--binary", gen_bin, "write the raw binary format");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed() && !run_config_path.empty()) {
    // File values fill in whatever the command line did not set explicitly.
    const auto flag_for = [](const std::string& key) {
      if (key == "pca" || key == "skip-pca") return std::string("--pca");
      if (key == "baseline" || key == "no-baseline") return std::string("--baseline");
      return "--" + key;
    };
    try {
      for (const auto& [key, value] : plom::parse_config_file(run_config_path))
        if (run->count(flag_for(key)) == 0) plom::apply_config_entry(run_cfg, key, value);
    } catch (const std::exception& e) {
      std::cerr << "input-error: " << e.what() << "\n";
      return plom::kExitInputError;
    }
  }
  if (run->parsed()) return plom::run_pipeline(run_cfg);
  if (bases->parsed()) return plom::run_bases(bases_cfg);
  if (reference->parsed())
    return cmd_reference(ref_nd, ref_grid, ref_dt, ref_n, ref_seed, ref_out,
                         ref_threads);
  if (metrics->parsed()) return cmd_metrics(met_a, met_b, met_cap, met_seed);
  if (sample->parsed()) return cmd_plom(plom_data, plom_basis, plom_cfg);
  if (gen->parsed()) return cmd_gen(gen_kind, gen_nu, gen_nd, gen_seed, gen_out, gen_bin);
  return plom::kExitOk;
}
