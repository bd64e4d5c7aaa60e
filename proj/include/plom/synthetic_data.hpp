#pragma once

#include <cstdint>
#include <string>

#include "plom/data_model.hpp"
#include "plom/types.hpp"

namespace plom::synth {

enum class DatasetKind {
  Gaussian,
  MulticonnectedManifold,  // union of low-dimensional patches
  ChaosExpansion,          // polynomial map of a two-dimensional germ
  HighDimHomogeneous,      // smooth low-rank factor structure
};

DatasetKind kind_from_string(const std::string& name);
std::string to_string(DatasetKind kind);

struct GeneratorSpec {
  DatasetKind kind{DatasetKind::Gaussian};
  Index nu{1};
  Index n_d{100};
  uint64_t seed{0};
  int patches{3};          // MulticonnectedManifold
  int chaos_degree{6};     // ChaosExpansion
  double noise{0.02};      // embedding noise for the manifold kinds
};

// Draws a dataset of the requested structure and whitens it, so the result
// always satisfies the training-set normalization exactly.
TrainingSet generate(const GeneratorSpec& spec);

}  // namespace plom::synth
