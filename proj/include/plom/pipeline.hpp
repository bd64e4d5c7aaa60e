#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plom/selection.hpp"
#include "plom/types.hpp"

namespace plom {

inline constexpr const char* kVersion = "1.0.0";

// One experiment, reproducible from this structure alone. Fields default to
// the reference parameterization; a config file or CLI flags override them.
struct RunConfig {
  // Input: either a matrix file (CSV or binary) or a synthetic kind.
  std::string input;
  std::string synthetic;  // gaussian | multiconnected | chaos | highdim
  Index synth_nu{9};
  Index synth_nd{400};
  bool skip_pca{true};  // treat the input file as already normalized
  double eps_pca{1e-6};

  // Reduced-basis construction.
  double jump_target{0.1};

  // Sampling dynamics for the transient kernels.
  double kappa{30};
  double delta_t_override{0};  // > 0 wins over kappa
  int n_retained{9};
  int n_s{1};
  int n_mc{400000};

  // Selection.
  double tau_c{0.002};
  Index mi_cap{20000};

  // Generator block.
  double f0{4.0};
  double dt_sv{0};
  int m0{30};
  int n_mch{1000};
  std::string constraint_mode{"full"};  // none | diagonal | full
  double beta1{0.001};
  double beta2{0.05};
  int i2{20};
  double err_tol{0.001};
  int max_iter{5000};
  bool run_baseline{true};

  uint64_t seed{0};
  std::string out_dir{"plom-out"};
  int threads{0};
};

// Exit codes shared by the pipeline and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNumericalError = 2;

// Runs the full pipeline and writes the artifact tree (run.json, curves/,
// learned/) under cfg.out_dir. Returns an exit code; failures also leave a
// machine-readable error.json in the output directory.
int run_pipeline(const RunConfig& cfg);

// Pipeline prefix: bases and the angle curve only.
int run_bases(const RunConfig& cfg);

// Loads the training set named by cfg (file or synthetic).
TrainingSet load_input(const RunConfig& cfg);

// Key/value pairs of an INI-style experiment file (sections are structural
// only; keys are global).
std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::filesystem::path& path);

// Applies one key to the config; keys match the CLI long-option names.
// Throws on an unknown key or a malformed value.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace plom
