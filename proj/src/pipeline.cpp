#include "plom/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include "plom/info_metrics.hpp"
#include "plom/io.hpp"
#include "plom/plom_sampler.hpp"
#include "plom/rng.hpp"
#include "plom/synthetic_data.hpp"

namespace plom {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

ConstraintMode constraint_mode_from(const std::string& name) {
  if (name == "none") return ConstraintMode::None;
  if (name == "diagonal") return ConstraintMode::Diagonal;
  if (name == "full") return ConstraintMode::Full;
  throw Error("unknown constraint mode: " + name);
}

PlomConfig plom_config_from(const RunConfig& cfg, const char* seed_label) {
  PlomConfig pc;
  pc.f0 = cfg.f0;
  pc.dt_sv = cfg.dt_sv;
  pc.m0 = cfg.m0;
  pc.n_mch = cfg.n_mch;
  pc.constraints = constraint_mode_from(cfg.constraint_mode);
  pc.beta1 = cfg.beta1;
  pc.beta2 = cfg.beta2;
  pc.i2 = cfg.i2;
  pc.err_tol = cfg.err_tol;
  pc.max_iter = cfg.max_iter;
  pc.seed = rng::derive_seed(cfg.seed, seed_label);
  return pc;
}

LearnedSet run_generator(const GkdeModel& model, const KernelBasis& basis,
                         const PlomConfig& pc) {
  return pc.constraints == ConstraintMode::None ? generate(model, basis, pc)
                                                : constrain(model, basis, pc);
}

void write_error(const fs::path& out_dir, const std::string& kind,
                 const std::string& message) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!ec) {
    std::ofstream f(out_dir / "error.json");
    f << j.dump(2) << "\n";
  }
}

std::vector<double> eigvals_to_vec(const Vector& v, Index count) {
  std::vector<double> out;
  out.reserve(size_t(std::min(count, v.size())));
  for (Index i = 0; i < std::min(count, v.size()); ++i) out.push_back(v(i));
  return out;
}

struct LearnedSummary {
  double d2{0};
  double kl{0};
  double entropy_v{0};
  double mi{0};
  double err_last{0};
  int i_last{0};
  bool converged{true};
};

LearnedSummary summarize(const LearnedSet& set, const TrainingSet& ts,
                         const SampleSet& training_samples, Index mi_cap,
                         uint64_t seed, bool with_info) {
  LearnedSummary s;
  s.d2 = concentration(set.eta_ar, ts);
  s.i_last = set.i_last;
  s.converged = set.converged;
  s.err_last = set.err_trace.empty() ? 0.0 : set.err_trace.back();
  if (with_info) {
    const SampleSet learned = SampleSet::from_matrix(set.eta_ar, mi_cap, seed);
    s.kl = kl_divergence(learned, training_samples);
    s.entropy_v = entropy(learned);
    s.mi = mutual_information(learned);
  }
  return s;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_file(
    const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  const auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError("malformed config line: " + line);
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  const auto as_double = [&] { return std::stod(value); };
  const auto as_int = [&] { return std::stoi(value); };
  const auto as_index = [&] { return Index(std::stoll(value)); };
  const auto as_bool = [&] {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw IoError("config value for " + key + " is not a boolean: " + value);
  };
  if (key == "input") cfg.input = value;
  else if (key == "synthetic") cfg.synthetic = value;
  else if (key == "nu") cfg.synth_nu = as_index();
  else if (key == "nd") cfg.synth_nd = as_index();
  else if (key == "pca") cfg.skip_pca = !as_bool();
  else if (key == "skip-pca") cfg.skip_pca = as_bool();
  else if (key == "eps-pca") cfg.eps_pca = as_double();
  else if (key == "jump") cfg.jump_target = as_double();
  else if (key == "kappa") cfg.kappa = as_double();
  else if (key == "delta-t") cfg.delta_t_override = as_double();
  else if (key == "n") cfg.n_retained = as_int();
  else if (key == "ns") cfg.n_s = as_int();
  else if (key == "nmc") cfg.n_mc = as_int();
  else if (key == "tau-c") cfg.tau_c = as_double();
  else if (key == "mi-cap") cfg.mi_cap = as_index();
  else if (key == "f0") cfg.f0 = as_double();
  else if (key == "dt-sv") cfg.dt_sv = as_double();
  else if (key == "m0") cfg.m0 = as_int();
  else if (key == "nmch") cfg.n_mch = as_int();
  else if (key == "constraints") cfg.constraint_mode = value;
  else if (key == "beta1") cfg.beta1 = as_double();
  else if (key == "beta2") cfg.beta2 = as_double();
  else if (key == "i2") cfg.i2 = as_int();
  else if (key == "err-tol") cfg.err_tol = as_double();
  else if (key == "max-iter") cfg.max_iter = as_int();
  else if (key == "baseline") cfg.run_baseline = as_bool();
  else if (key == "no-baseline") cfg.run_baseline = !as_bool();
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "out") cfg.out_dir = value;
  else if (key == "threads") cfg.threads = as_int();
  else throw IoError("unknown config key: " + key);
}

TrainingSet load_input(const RunConfig& cfg) {
  if (!cfg.synthetic.empty()) {
    synth::GeneratorSpec spec;
    spec.kind = synth::kind_from_string(cfg.synthetic);
    spec.nu = cfg.synth_nu;
    spec.n_d = cfg.synth_nd;
    spec.seed = rng::derive_seed(cfg.seed, "data/synthetic");
    return synth::generate(spec);
  }
  if (cfg.input.empty()) throw IoError("no input file or synthetic kind given");
  if (cfg.skip_pca) return load_training_set(cfg.input);
  RawDataset raw{io::read_matrix_auto(cfg.input)};
  return pca_reduce(raw, cfg.eps_pca).second;
}

int run_bases(const RunConfig& cfg) {
  const fs::path out_dir(cfg.out_dir);
  try {
    if (cfg.threads > 0) set_num_threads(cfg.threads);
    fs::create_directories(out_dir / "curves");

    const TrainingSet ts = load_input(cfg);
    const GkdeModel model(ts);
    const KernelBasis rodb = dmaps_basis(ts, cfg.jump_target);

    IsdeConfig icfg =
        cfg.delta_t_override > 0
            ? isde_config_from_delta_t(model.bw(), cfg.delta_t_override,
                                       cfg.n_retained, cfg.n_mc,
                                       rng::derive_seed(cfg.seed, "isde"), cfg.n_s)
            : isde_config_from_kappa(model.bw(), cfg.kappa, cfg.n_retained, cfg.n_mc,
                                     rng::derive_seed(cfg.seed, "isde"), cfg.n_s);
    icfg.kernel_instants.resize(size_t(cfg.n_retained));
    std::iota(icfg.kernel_instants.begin(), icfg.kernel_instants.end(), 1);
    const IsdeTrajectorySet traj = simulate(model, icfg);
    const ConvergenceCurves curves = convergence_curves(traj);

    std::vector<double> ns, ts_axis, gammas, dist;
    for (int n = 1; n <= cfg.n_retained; ++n) {
      const KernelMatrix km = transient_connected_matrix(ts, traj, n, rodb.eps_dm);
      const KernelBasis rotb = transient_basis(km, ts.nu() + 1);
      ns.push_back(n);
      ts_axis.push_back(km.t);
      gammas.push_back(subspace_angle_deg(rotb, rodb));
      const KernelMatrix kdm = dmaps_matrix(ts, rodb.eps_dm);
      dist.push_back((km.k - kdm.k).norm() / kdm.k.norm());
    }
    io::write_table_csv(out_dir / "curves" / "angle.csv",
                        {"n", "t", "gamma_deg", "rel_frobenius_to_isotropic"},
                        {ns, ts_axis, gammas, dist});
    io::write_table_csv(
        out_dir / "curves" / "convergence.csv", {"n", "ybar", "sbar"},
        {ns, std::vector<double>(curves.ybar.begin(), curves.ybar.end()),
         std::vector<double>(curves.sbar.begin(), curves.sbar.end())});

    ordered_json j;
    j["schema_version"] = 1;
    j["provenance"] = {{"seed", cfg.seed}, {"version", kVersion}};
    j["bandwidths"] = {{"s", model.bw().s},
                       {"s_hat", model.bw().s_hat},
                       {"ratio", model.bw().ratio}};
    j["dmaps"] = {{"eps_opt", rodb.eps_dm},
                  {"m_opt", rodb.m},
                  {"jump", rodb.jump},
                  {"jump_achieved", rodb.jump_achieved}};
    j["isde"] = {{"delta_t", icfg.delta_t},
                 {"kappa", icfg.kappa},
                 {"n_retained", icfg.n_retained},
                 {"n_mc", icfg.n_mc},
                 {"ybar_last", curves.ybar.back()},
                 {"sbar_last", curves.sbar.back()}};
    j["angles_deg"] = gammas;
    std::ofstream f(out_dir / "bases.json");
    f << j.dump(2) << "\n";
    return kExitOk;
  } catch (const IoError& e) {
    write_error(out_dir, "input-error", e.what());
    return kExitInputError;
  } catch (const std::exception& e) {
    write_error(out_dir, "numerical-error", e.what());
    return kExitNumericalError;
  }
}

int run_pipeline(const RunConfig& cfg) {
  const fs::path out_dir(cfg.out_dir);
  try {
    if (cfg.threads > 0) set_num_threads(cfg.threads);
    fs::create_directories(out_dir / "curves");
    fs::create_directories(out_dir / "learned");

    // Data and probability model.
    const TrainingSet ts = load_input(cfg);
    const auto diag = validate_normalization(ts);
    const GkdeModel model(ts);
    const Index nu = ts.nu(), n_d = ts.n_d();

    // Reduced isotropic basis.
    const KernelBasis rodb = dmaps_basis(ts, cfg.jump_target);
    {
      std::vector<double> beta(size_t(rodb.eigvals.size())),
          vals(size_t(rodb.eigvals.size()));
      std::iota(beta.begin(), beta.end(), 1.0);
      for (Index i = 0; i < rodb.eigvals.size(); ++i)
        vals[size_t(i)] = rodb.eigvals(i);
      io::write_table_csv(out_dir / "curves" / "dmaps_eigvals.csv", {"beta", "value"},
                          {beta, vals});
    }

    // Sampling dynamics with every instant available to the kernels.
    IsdeConfig icfg =
        cfg.delta_t_override > 0
            ? isde_config_from_delta_t(model.bw(), cfg.delta_t_override,
                                       cfg.n_retained, cfg.n_mc,
                                       rng::derive_seed(cfg.seed, "isde"), cfg.n_s)
            : isde_config_from_kappa(model.bw(), cfg.kappa, cfg.n_retained, cfg.n_mc,
                                     rng::derive_seed(cfg.seed, "isde"), cfg.n_s);
    icfg.kernel_instants.resize(size_t(cfg.n_retained));
    std::iota(icfg.kernel_instants.begin(), icfg.kernel_instants.end(), 1);
    const IsdeTrajectorySet traj = simulate(model, icfg);
    const ConvergenceCurves curves = convergence_curves(traj);
    {
      std::vector<double> ns(size_t(cfg.n_retained));
      std::iota(ns.begin(), ns.end(), 1.0);
      io::write_table_csv(
          out_dir / "curves" / "convergence.csv", {"n", "ybar", "sbar"},
          {ns, std::vector<double>(curves.ybar.begin(), curves.ybar.end()),
           std::vector<double>(curves.sbar.begin(), curves.sbar.end())});
    }

    const SampleSet training_samples = SampleSet::from_matrix(ts.eta);
    const double mi_h = mutual_information(training_samples);

    // Per-instant transient bases, their generator runs and criteria.
    SelectionReport report;
    report.mi_subsample_cap = cfg.mi_cap;
    report.mi_h = mi_h;
    std::vector<int> all_instants(size_t(cfg.n_retained));
    std::iota(all_instants.begin(), all_instants.end(), 1);
    std::vector<double> d2_curve;
    std::vector<KernelBasis> tb_bases;
    std::vector<LearnedSet> tb_sets;
    for (const int n : all_instants) {
      const KernelMatrix km = transient_connected_matrix(ts, traj, n, rodb.eps_dm);
      KernelBasis rotb = transient_basis(km, nu + 1);
      SelectionRecord rec;
      rec.n = n;
      rec.t = km.t;
      rec.gamma_deg = subspace_angle_deg(rotb, rodb);
      PlomConfig pc = plom_config_from(cfg, "plom/rotb");
      const LearnedSet learned = run_generator(model, rotb, pc);
      rec.d2_over_nu = concentration(learned.eta_ar, ts) / double(nu);
      d2_curve.push_back(rec.d2_over_nu * double(nu));
      report.per_n.push_back(rec);
      tb_bases.push_back(std::move(rotb));
      tb_sets.push_back(std::move(learned));
    }

    const std::vector<int> admissible =
        admissible_set(all_instants, d2_curve, nu, cfg.tau_c);
    std::vector<double> mi_admissible;
    for (const int n : admissible) {
      auto& rec = report.per_n[size_t(n - 1)];
      rec.admissible = true;
      const LearnedSummary s =
          summarize(tb_sets[size_t(n - 1)], ts, training_samples, cfg.mi_cap,
                    rng::derive_seed(cfg.seed, "mi/tb"), true);
      rec.kl = s.kl;
      rec.entropy = s.entropy_v;
      rec.mi = s.mi;
      mi_admissible.push_back(s.mi);
    }

    // Isotropic-basis generator run.
    PlomConfig pc_db = plom_config_from(cfg, "plom/rodb");
    const LearnedSet db_set = run_generator(model, rodb, pc_db);
    const LearnedSummary db =
        summarize(db_set, ts, training_samples, cfg.mi_cap,
                  rng::derive_seed(cfg.seed, "mi/db"), true);
    report.mi_db = db.mi;

    // Unprojected baseline.
    std::optional<LearnedSummary> base;
    std::optional<LearnedSet> base_set;
    if (cfg.run_baseline) {
      PlomConfig pc_base = plom_config_from(cfg, "plom/baseline");
      pc_base.constraints = ConstraintMode::None;
      base_set = generate(model, identity_basis(n_d), pc_base);
      base = summarize(*base_set, ts, training_samples, cfg.mi_cap,
                       rng::derive_seed(cfg.seed, "mi/baseline"), true);
    }

    // Optimal instant and the normalization constant.
    const Index n_ar = Index(n_d) * Index(cfg.n_mch);
    if (admissible.empty()) {
      report.fallback_to_isotropic = true;
      report.n_opt = 0;
    } else {
      report.n_opt = select_optimal(admissible, mi_admissible);
      report.mi_tb_opt = report.per_n[size_t(report.n_opt - 1)].mi;
      if (report.mi_tb_opt != mi_h) {
        const ChiSolution chi = solve_chi(mi_h, report.mi_tb_opt, n_d, n_ar);
        report.chi_opt = chi.chi;
        report.chi_valid = chi.valid;
        if (chi.valid) {
          report.inorm_h = normalized_mi(mi_h, n_d, chi.chi);
          report.inorm_tb = normalized_mi(report.mi_tb_opt, n_ar, chi.chi);
          report.inorm_db = normalized_mi(report.mi_db, n_ar, chi.chi);
        }
      }
      report.ordering_improved =
          mi_h <= report.mi_tb_opt && report.mi_tb_opt < report.mi_db;
    }
    report.mi_assumption_violated = !(mi_h < report.mi_db);

    // Artifacts: learned sets, criteria curves, constraint traces.
    io::write_matrix_bin(out_dir / "learned" / "rodb.bin", db_set.eta_ar);
    if (base_set)
      io::write_matrix_bin(out_dir / "learned" / "baseline.bin", base_set->eta_ar);
    if (report.n_opt >= 1)
      io::write_matrix_bin(out_dir / "learned" / "rotb.bin",
                           tb_sets[size_t(report.n_opt - 1)].eta_ar);
    if (!db_set.err_trace.empty()) {
      std::vector<double> is(db_set.err_trace.size());
      std::iota(is.begin(), is.end(), 0.0);
      std::vector<double> alphas = db_set.alpha_trace;
      alphas.resize(db_set.err_trace.size(), 0.0);
      io::write_table_csv(out_dir / "curves" / "constraint_trace_rodb.csv",
                          {"i", "err", "alpha_i"}, {is, db_set.err_trace, alphas});
    }
    {
      std::vector<double> ns, t_axis, gam, d2nu, kls, ents, mis, adm;
      for (const auto& r : report.per_n) {
        ns.push_back(r.n);
        t_axis.push_back(r.t);
        gam.push_back(r.gamma_deg);
        d2nu.push_back(r.d2_over_nu);
        kls.push_back(r.admissible ? r.kl : std::nan(""));
        ents.push_back(r.admissible ? r.entropy : std::nan(""));
        mis.push_back(r.admissible ? r.mi : std::nan(""));
        adm.push_back(r.admissible ? 1.0 : 0.0);
      }
      io::write_table_csv(out_dir / "curves" / "criteria.csv",
                          {"n", "t", "gamma", "d2", "kl", "entropy", "mi", "admissible"},
                          {ns, t_axis, gam, d2nu, kls, ents, mis, adm});
    }

    ordered_json j;
    j["schema_version"] = 1;
    j["provenance"] = {{"seed", cfg.seed},
                       {"version", kVersion},
                       {"mi_subsample_cap", cfg.mi_cap}};
    j["data"] = {{"nu", nu},
                 {"n_d", n_d},
                 {"mean_norm", diag.mean_norm},
                 {"cov_dev", diag.cov_dev},
                 {"normalized", diag.pass()}};
    j["bandwidths"] = {{"s", model.bw().s},
                       {"s_hat", model.bw().s_hat},
                       {"ratio", model.bw().ratio}};
    j["dmaps"] = {{"eps_opt", rodb.eps_dm},
                  {"m_opt", rodb.m},
                  {"jump", rodb.jump},
                  {"jump_achieved", rodb.jump_achieved},
                  {"eigvals_head", eigvals_to_vec(rodb.eigvals, rodb.m + 1)}};
    j["isde"] = {{"delta_t", icfg.delta_t},
                 {"kappa", icfg.kappa},
                 {"n_s", icfg.n_s},
                 {"n_retained", icfg.n_retained},
                 {"n_mc", icfg.n_mc},
                 {"ybar_last", curves.ybar.back()},
                 {"sbar_last", curves.sbar.back()}};
    ordered_json per_n = ordered_json::array();
    for (const auto& r : report.per_n) {
      ordered_json rec = {{"n", r.n},           {"t", r.t},
                          {"gamma_deg", r.gamma_deg}, {"d2_over_nu", r.d2_over_nu},
                          {"admissible", r.admissible}};
      if (r.admissible) {
        rec["kl"] = r.kl;
        rec["entropy"] = r.entropy;
        rec["mi"] = r.mi;
      }
      per_n.push_back(rec);
    }
    j["per_n"] = per_n;
    ordered_json sel;
    sel["n_opt"] = report.n_opt;
    sel["fallback_to_isotropic"] = report.fallback_to_isotropic;
    sel["chi_opt"] = report.chi_opt;
    sel["chi_valid"] = report.chi_valid;
    sel["mi"] = {{"h", report.mi_h}, {"db", report.mi_db}, {"tb_opt", report.mi_tb_opt}};
    sel["mi_normalized"] = {{"h", report.inorm_h},
                            {"db", report.inorm_db},
                            {"tb_opt", report.inorm_tb}};
    sel["ordering_improved"] = report.ordering_improved;
    sel["mi_assumption_violated"] = report.mi_assumption_violated;
    j["selection"] = sel;
    ordered_json runs;
    runs["rodb"] = {{"d2", db.d2},
                    {"kl", db.kl},
                    {"entropy", db.entropy_v},
                    {"mi", db.mi},
                    {"i_last", db.i_last},
                    {"err_last", db.err_last},
                    {"converged", db.converged}};
    if (base)
      runs["baseline"] = {{"d2", base->d2},
                          {"kl", base->kl},
                          {"entropy", base->entropy_v},
                          {"mi", base->mi}};
    if (report.n_opt >= 1) {
      const auto& r = report.per_n[size_t(report.n_opt - 1)];
      runs["rotb_opt"] = {{"n", r.n},
                          {"d2", r.d2_over_nu * double(nu)},
                          {"kl", r.kl},
                          {"entropy", r.entropy},
                          {"mi", r.mi}};
    }
    j["runs"] = runs;

    std::ofstream f(out_dir / "run.json");
    f << j.dump(2) << "\n";
    return kExitOk;
  } catch (const IoError& e) {
    write_error(out_dir, "input-error", e.what());
    return kExitInputError;
  } catch (const std::exception& e) {
    write_error(out_dir, "numerical-error", e.what());
    return kExitNumericalError;
  }
}

}  // namespace plom
