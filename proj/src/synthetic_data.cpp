#include "plom/synthetic_data.hpp"

#include <cmath>
#include <numbers>

#include "plom/rng.hpp"

namespace plom::synth {

namespace {

Matrix normals(Index rows, Index cols, uint64_t seed, const char* label) {
  Matrix m(rows, cols);
  rng::fill_normals(seed, rng::derive_seed(seed, label), 0,
                    {m.data(), size_t(m.size())});
  return m;
}

// Centers and whitens raw draws through the full-rank eigenbasis of their
// covariance; the output carries exact zero mean and identity covariance.
TrainingSet whiten(const Matrix& raw) {
  RawDataset rd{raw};
  auto [pca, ts] = pca_reduce(rd, 1e-15);
  if (pca.nu != raw.rows())
    throw DegenerateData("synthetic draws are rank-deficient; increase noise");
  return std::move(ts);
}

// Orthonormal Legendre value of order n on [-1, 1] (unit uniform weight).
double legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return 1.0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - double(k) * p0) / double(k + 1);
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * n + 1.0) * p1;
}

Matrix gaussian_raw(const GeneratorSpec& spec) {
  return normals(spec.nu, spec.n_d, spec.seed, "synth/gaussian");
}

Matrix multiconnected_raw(const GeneratorSpec& spec) {
  const int patches = std::max(1, spec.patches);
  const uint64_t u_stream = rng::derive_seed(spec.seed, "synth/manifold/latent");
  Matrix shape = normals(spec.nu, Index(4) * patches, spec.seed, "synth/manifold/shape");
  Matrix centers = 3.0 * normals(spec.nu, patches, spec.seed, "synth/manifold/centers");
  Matrix noise = normals(spec.nu, spec.n_d, spec.seed, "synth/manifold/noise");

  Matrix raw(spec.nu, spec.n_d);
  for (Index j = 0; j < spec.n_d; ++j) {
    const int p = int(j) % patches;
    const double t =
        2.0 * rng::uniform_at(spec.seed, u_stream, uint64_t(j)) - 1.0;
    Vector feat(4);
    feat << t, std::sin(std::numbers::pi * t * double(p + 1)),
        std::cos(std::numbers::pi * t * double(p + 1)), t * t;
    raw.col(j) =
        centers.col(p) + shape.middleCols(Index(4) * p, 4) * feat + spec.noise * noise.col(j);
  }
  return raw;
}

Matrix chaos_raw(const GeneratorSpec& spec) {
  const int degree = std::max(1, spec.chaos_degree);
  // Graded-lexicographic bivariate basis; rank 1 is the constant term.
  std::vector<std::pair<int, int>> orders;
  for (int d = 0; d <= degree; ++d)
    for (int a1 = d; a1 >= 0; --a1) orders.emplace_back(a1, d - a1);

  // Component ranks of the expansion; the canonical pick for eight
  // components, continued past rank 1 for other dimensions.
  static constexpr int kCanonical[8] = {2, 3, 6, 8, 12, 13, 17, 19};
  std::vector<int> ranks;
  for (Index k = 0; k < spec.nu; ++k) {
    const int r = spec.nu == 8 ? kCanonical[k] : int(k) + 2;
    if (r > int(orders.size()))
      throw Error("chaos generator: dimension exceeds the term count");
    ranks.push_back(r);
  }

  const uint64_t g1 = rng::derive_seed(spec.seed, "synth/chaos/g1");
  const uint64_t g2 = rng::derive_seed(spec.seed, "synth/chaos/g2");
  Matrix noise = normals(spec.nu, spec.n_d, spec.seed, "synth/chaos/noise");
  Matrix raw(spec.nu, spec.n_d);
  for (Index j = 0; j < spec.n_d; ++j) {
    // Two uniform germs with distinct supports, mapped to [-1, 1] for the
    // orthonormal polynomial evaluation.
    const double x1 = 2.0 * rng::uniform_at(spec.seed, g1, uint64_t(j)) - 1.0;
    const double x2 = 2.0 * rng::uniform_at(spec.seed, g2, uint64_t(j)) - 1.0;
    for (Index k = 0; k < spec.nu; ++k) {
      const auto [a1, a2] = orders[size_t(ranks[size_t(k)] - 1)];
      raw(k, j) = legendre(a1, x1) * legendre(a2, x2) + spec.noise * noise(k, j);
    }
  }
  return raw;
}

Matrix highdim_raw(const GeneratorSpec& spec) {
  const Index latent = std::max<Index>(2, spec.nu / 8);
  Matrix w1 = normals(spec.nu, latent, spec.seed, "synth/high/w1");
  Matrix w2 = normals(spec.nu, latent, spec.seed, "synth/high/w2");
  Matrix z = normals(latent, spec.n_d, spec.seed, "synth/high/z");
  Matrix noise = normals(spec.nu, spec.n_d, spec.seed, "synth/high/noise");
  Matrix raw = w1 * z + 0.3 * (w2 * z).array().tanh().matrix();
  raw += 0.05 * noise;
  return raw;
}

}  // namespace

DatasetKind kind_from_string(const std::string& name) {
  if (name == "gaussian") return DatasetKind::Gaussian;
  if (name == "multiconnected") return DatasetKind::MulticonnectedManifold;
  if (name == "chaos") return DatasetKind::ChaosExpansion;
  if (name == "highdim") return DatasetKind::HighDimHomogeneous;
  throw Error("unknown dataset kind: " + name);
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Gaussian:
      return "gaussian";
    case DatasetKind::MulticonnectedManifold:
      return "multiconnected";
    case DatasetKind::ChaosExpansion:
      return "chaos";
    case DatasetKind::HighDimHomogeneous:
      return "highdim";
  }
  return "unknown";
}

TrainingSet generate(const GeneratorSpec& spec) {
  if (spec.nu < 1 || spec.n_d < 2) throw Error("generator: nu >= 1, n_d >= 2 required");
  switch (spec.kind) {
    case DatasetKind::Gaussian:
      return whiten(gaussian_raw(spec));
    case DatasetKind::MulticonnectedManifold:
      return whiten(multiconnected_raw(spec));
    case DatasetKind::ChaosExpansion:
      return whiten(chaos_raw(spec));
    case DatasetKind::HighDimHomogeneous:
      return whiten(highdim_raw(spec));
  }
  throw Error("generator: unhandled kind");
}

}  // namespace plom::synth
