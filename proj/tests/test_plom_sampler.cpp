#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "plom/plom_sampler.hpp"
#include "plom/selection.hpp"
#include "plom/synthetic_data.hpp"

using namespace plom;

namespace {
TrainingSet make_ts(Index nu, Index n_d, uint64_t seed,
                    synth::DatasetKind kind = synth::DatasetKind::Gaussian) {
  synth::GeneratorSpec spec;
  spec.kind = kind;
  spec.nu = nu;
  spec.n_d = n_d;
  spec.seed = seed;
  return synth::generate(spec);
}

PlomConfig quick_config(uint64_t seed, int n_mch = 20) {
  PlomConfig pc;
  pc.n_mch = n_mch;
  pc.m0 = 30;
  pc.seed = seed;
  pc.constraints = ConstraintMode::None;
  return pc;
}
}  // namespace

TEST_CASE("projector inverts the basis Gram factor") {
  const TrainingSet ts = make_ts(3, 40, 1);
  const KernelBasis rodb = dmaps_basis(ts, 0.2);
  const Matrix a = projector(rodb);
  CHECK((rodb.g.transpose() * a - Matrix::Identity(rodb.m, rodb.m)).norm() < 1e-10);
  // g a^T is idempotent.
  const Matrix p = rodb.g * a.transpose();
  CHECK((p * p - p).norm() < 1e-8);
}

TEST_CASE("projector of orthonormal columns is the basis itself") {
  const KernelBasis id = identity_basis(12);
  CHECK((projector(id) - id.g).norm() == 0.0);
  KernelBasis scaled = id;
  scaled.g *= 2.0;
  CHECK((projector(scaled) - 0.5 * id.g).norm() < 1e-12);
}

TEST_CASE("projector rejects a singular Gram matrix") {
  KernelBasis bad = identity_basis(6);
  bad.g.col(1) = bad.g.col(0);
  CHECK_THROWS_AS(projector(bad), SingularGram);
}

TEST_CASE("multiplier packing sizes") {
  CHECK(multiplier_size(ConstraintMode::None, 9) == 0);
  CHECK(multiplier_size(ConstraintMode::Diagonal, 9) == 9);
  CHECK(multiplier_size(ConstraintMode::Full, 9) == 18 + 36);
}

TEST_CASE("generator output shape and seed determinism") {
  const TrainingSet ts = make_ts(2, 30, 3);
  const GkdeModel model(ts);
  const KernelBasis rodb = dmaps_basis(ts, 0.2);
  const PlomConfig pc = quick_config(5);
  const LearnedSet a = generate(model, rodb, pc);
  CHECK(a.n_ar() == 30 * 20);
  CHECK(a.n_mch() == 20);

  set_num_threads(1);
  const LearnedSet b = generate(model, rodb, pc);
  set_num_threads(2);
  const LearnedSet c = generate(model, rodb, pc);
  set_num_threads(0);
  CHECK((a.eta_ar - b.eta_ar).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.eta_ar - c.eta_ar).cwiseAbs().maxCoeff() == 0.0);

  PlomConfig other = pc;
  other.seed = 6;
  CHECK((generate(model, rodb, other).eta_ar - a.eta_ar).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero multipliers reproduce the unconstrained drift path") {
  const TrainingSet ts = make_ts(2, 20, 7);
  const GkdeModel model(ts);
  const KernelBasis rodb = dmaps_basis(ts, 0.2);
  const PlomConfig pc = quick_config(9, 8);
  const LearnedSet plain = generate(model, rodb, pc);
  const LearnedSet zero =
      generate(model, rodb, pc, Vector::Zero(multiplier_size(ConstraintMode::None, 2)));
  CHECK((plain.eta_ar - zero.eta_ar).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reduced basis preserves concentration, identity basis loses it") {
  const TrainingSet ts = make_ts(5, 100, 11, synth::DatasetKind::MulticonnectedManifold);
  const GkdeModel model(ts);
  const KernelBasis rodb = dmaps_basis(ts, 0.2);
  const PlomConfig pc = quick_config(13, 30);

  const LearnedSet reduced = generate(model, rodb, pc);
  const double d2_reduced = concentration(reduced.eta_ar, ts);
  CHECK(d2_reduced < 1.0 + double(rodb.m) / double(ts.n_d() - 1));
  CHECK(d2_reduced < 0.5);

  const LearnedSet full = generate(model, identity_basis(100), pc);
  const double d2_full = concentration(full.eta_ar, ts);
  // Even a partially decorrelated unprojected chain sits far above the
  // projected runs (complete loss would approach 2).
  CHECK(d2_full > 0.5);
  CHECK(d2_full > 10.0 * d2_reduced);
}

TEST_CASE("reshaped pooled variance agrees with per-matrix statistics") {
  const TrainingSet ts = make_ts(2, 25, 15);
  const GkdeModel model(ts);
  const KernelBasis rodb = dmaps_basis(ts, 0.2);
  const LearnedSet set = generate(model, rodb, quick_config(17, 10));
  double acc = 0;
  for (Index ell = 0; ell < set.n_mch(); ++ell)
    acc += set.matrix(ell).cwiseAbs2().sum();
  CHECK(set.eta_ar.cwiseAbs2().sum() == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("a repulsive multiplier blows the state up and is reported") {
  const TrainingSet ts = make_ts(2, 15, 19);
  const GkdeModel model(ts);
  PlomConfig pc = quick_config(21, 4);
  pc.constraints = ConstraintMode::Diagonal;
  // Strongly negative multipliers make the quadratic term repulsive.
  const Vector bad = Vector::Constant(2, -1e12);
  CHECK_THROWS_AS(generate(model, identity_basis(15), pc, bad), NonFinite);
}

TEST_CASE("constraint iteration reaches the moment targets") {
  const TrainingSet ts = make_ts(3, 60, 23);
  const GkdeModel model(ts);
  const KernelBasis rodb = dmaps_basis(ts, 0.2);
  PlomConfig pc = quick_config(25, 40);
  pc.constraints = ConstraintMode::Full;
  pc.err_tol = 0.005;
  pc.max_iter = 800;
  const LearnedSet set = constrain(model, rodb, pc);
  REQUIRE(set.converged);
  CHECK(set.err_trace.back() <= pc.err_tol);
  CHECK(set.i_last == int(set.err_trace.size()) - 1);

  const Vector mean = set.eta_ar.rowwise().mean();
  const Matrix centered = set.eta_ar.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / double(set.n_ar());
  CHECK(mean.norm() < 0.05);
  CHECK((cov - Matrix::Identity(3, 3)).norm() < 0.1 * std::sqrt(3.0));
}

TEST_CASE("generous tolerance stops the iteration immediately") {
  const TrainingSet ts = make_ts(2, 40, 27);
  const GkdeModel model(ts);
  const KernelBasis rodb = dmaps_basis(ts, 0.2);
  PlomConfig pc = quick_config(29, 20);
  pc.constraints = ConstraintMode::Diagonal;
  pc.err_tol = 0.9;
  const LearnedSet set = constrain(model, rodb, pc);
  CHECK(set.converged);
  CHECK(set.i_last == 0);
  CHECK(set.lambda.norm() == 0.0);
}

TEST_CASE("iteration cap is reported instead of spinning forever") {
  const TrainingSet ts = make_ts(2, 30, 31);
  const GkdeModel model(ts);
  const KernelBasis rodb = dmaps_basis(ts, 0.2);
  PlomConfig pc = quick_config(33, 10);
  pc.constraints = ConstraintMode::Full;
  pc.err_tol = 1e-9;
  pc.max_iter = 5;
  const LearnedSet set = constrain(model, rodb, pc);
  CHECK_FALSE(set.converged);
  CHECK(set.i_last == 5);
}

TEST_CASE("warm start continues instead of regenerating") {
  const TrainingSet ts = make_ts(2, 30, 35);
  const GkdeModel model(ts);
  const KernelBasis rodb = dmaps_basis(ts, 0.2);
  PlomConfig pc = quick_config(37, 10);
  pc.constraints = ConstraintMode::Diagonal;
  pc.err_tol = 0.02;
  pc.max_iter = 400;
  pc.warm_start = true;
  const LearnedSet set = constrain(model, rodb, pc);
  CHECK(set.err_trace.size() >= 1);
}
