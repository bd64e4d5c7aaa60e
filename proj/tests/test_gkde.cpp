#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "plom/gkde.hpp"
#include "plom/rng.hpp"
#include "plom/synthetic_data.hpp"

using namespace plom;

namespace {
TrainingSet gaussian_ts(Index nu, Index n_d, uint64_t seed) {
  synth::GeneratorSpec spec;
  spec.nu = nu;
  spec.n_d = n_d;
  spec.seed = seed;
  return synth::generate(spec);
}

// Central finite difference of the log-density.
Vector fd_grad_log_pdf(const GkdeModel& model, const Vector& at, double h) {
  Vector g(at.size());
  for (Index k = 0; k < at.size(); ++k) {
    Vector p = at, m = at;
    p(k) += h;
    m(k) -= h;
    g(k) = (model.log_pdf(p) - model.log_pdf(m)) / (2.0 * h);
  }
  return g;
}
}  // namespace

TEST_CASE("bandwidth formulas reproduce the reference parameterizations") {
  const BandwidthSet b1 = bandwidths(9, 400);
  CHECK(b1.s == doctest::Approx(0.5835).epsilon(1e-4));
  CHECK(b1.s_hat == doctest::Approx(0.5044).epsilon(1e-4));
  CHECK(b1.ratio == doctest::Approx(0.8645).epsilon(1e-4));

  // The published table lists s_hat = 0.4946 for this row, which contradicts
  // its own s * ratio = 0.4906; the closed form gives 0.4906.
  const BandwidthSet b2 = bandwidths(8, 400);
  CHECK(b2.s == doctest::Approx(0.5623).epsilon(1e-4));
  CHECK(b2.ratio == doctest::Approx(0.8725).epsilon(1e-4));
  CHECK(b2.s_hat == doctest::Approx(b2.s * b2.ratio).epsilon(1e-12));
  CHECK(b2.s_hat == doctest::Approx(0.4906).epsilon(1e-3));

  const BandwidthSet b3 = bandwidths(1, 1200);
  CHECK(b3.s_hat == doctest::Approx(0.2486).epsilon(1e-3));
  CHECK(b3.ratio == doctest::Approx(0.9690).epsilon(1e-4));

  // The high-dimensional application: its published bandwidths follow from
  // 45 retained components (the basis then has 46 columns).
  const BandwidthSet b4 = bandwidths(45, 560);
  CHECK(b4.s == doctest::Approx(0.8357).epsilon(1e-4));
  CHECK(b4.s_hat == doctest::Approx(0.6416).epsilon(1e-4));
  CHECK(b4.ratio == doctest::Approx(0.7677).epsilon(1e-4));
}

TEST_CASE("modified bandwidth shrinks the Silverman one for n_d >= 2") {
  for (const Index n_d : {2, 10, 400, 5000})
    for (const Index nu : {1, 3, 9, 46}) {
      const BandwidthSet b = bandwidths(nu, n_d);
      CHECK(b.s_hat > 0);
      CHECK(b.s_hat < b.s);
    }
}

TEST_CASE("log_pdf matches a two-kernel closed form") {
  TrainingSet ts;
  ts.eta.resize(1, 2);
  ts.eta << 1.0, -1.0;
  const GkdeModel model(ts);
  const double s_hat = model.bw().s_hat, r = model.bw().ratio;
  // Direct evaluation of the two-term mixture at the origin.
  const double term = std::exp(-(r * r) / (2.0 * s_hat * s_hat));
  const double expected =
      std::log(term / (std::sqrt(2.0 * std::numbers::pi) * s_hat));
  CHECK(model.log_pdf(Vector::Zero(1)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("density decays away from the mixture support") {
  const GkdeModel model(gaussian_ts(2, 50, 21));
  const Vector near = model.centers().col(0);
  CHECK(model.log_pdf(near) > model.log_pdf(Vector::Constant(2, 50.0)) + 100.0);
  CHECK(std::isfinite(model.log_pdf(Vector::Constant(2, 1e4))));
}

TEST_CASE("log_pdf is invariant under training-column permutation") {
  TrainingSet ts = gaussian_ts(3, 40, 5);
  TrainingSet perm = ts;
  perm.eta = ts.eta.rowwise().reverse();
  const GkdeModel a(ts), b(perm);
  const Vector at = Vector::Constant(3, 0.3);
  CHECK(a.log_pdf(at) == doctest::Approx(b.log_pdf(at)).epsilon(1e-14));
}

TEST_CASE("symmetric two-kernel model has zero drift at the midpoint") {
  TrainingSet ts;
  ts.eta.resize(1, 2);
  ts.eta << 1.0, -1.0;
  const GkdeModel model(ts);
  CHECK(std::abs(model.drift(Vector::Zero(1))(0)) < 1e-15);
}

TEST_CASE("single-kernel mode is a stationary point of the drift") {
  TrainingSet ts;
  ts.eta = Matrix::Zero(2, 1);
  const GkdeModel model(ts);
  CHECK(model.drift(Vector::Zero(2)).norm() == 0.0);
}

TEST_CASE("drift matches finite differences of half the log-density") {
  for (const Index nu : {1, 3, 9}) {
    const GkdeModel model(gaussian_ts(nu, 30, 17));
    for (int trial = 0; trial < 20; ++trial) {
      Vector at(nu);
      rng::fill_normals(100 + uint64_t(trial), uint64_t(nu), 0,
                        {at.data(), size_t(at.size())});
      at *= 1.5;
      const Vector expected = 0.5 * fd_grad_log_pdf(model, at, 1e-5);
      const Vector got = model.drift(at);
      CHECK((got - expected).norm() <= 1e-6 * std::max(1.0, expected.norm()));
    }
  }
}

TEST_CASE("matrix gradient equals twice the drift column by column") {
  const GkdeModel model(gaussian_ts(2, 25, 3));
  Matrix u(2, 6);
  rng::fill_normals(9, 0, 0, {u.data(), size_t(u.size())});
  const Matrix grad = model.grad_log_pdf_matrix(u);
  for (Index c = 0; c < u.cols(); ++c)
    CHECK((grad.col(c) - 2.0 * model.drift(u.col(c))).norm() < 1e-12);
}

TEST_CASE("matrix gradient of the training centers vanishes for one kernel") {
  TrainingSet ts;
  ts.eta = Matrix::Zero(3, 1);
  const GkdeModel model(ts);
  const Matrix grad = model.grad_log_pdf_matrix(model.centers());
  CHECK(grad.norm() == 0.0);
}

TEST_CASE("mixture draws reproduce the normalized moments") {
  const GkdeModel model(gaussian_ts(3, 80, 23));
  const Index n = 1000000;
  const Matrix draws = model.sample_mixture(n, 77);
  const Vector mean = draws.rowwise().mean();
  // Standard error of the mean is 1/sqrt(n) per component.
  CHECK(mean.norm() < 3.0 * std::sqrt(3.0 / double(n)));
  const Matrix centered = draws.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / double(n - 1);
  CHECK((cov - Matrix::Identity(3, 3)).norm() < 0.02 * std::sqrt(3.0));
}

TEST_CASE("drift stays bounded on a box (numerical Lipschitz check)") {
  const GkdeModel model(gaussian_ts(2, 40, 31));
  double max_jac = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Vector at(2);
    at << -3.0 + 6.0 * rng::uniform_at(1, 1, 2 * uint64_t(trial)),
        -3.0 + 6.0 * rng::uniform_at(1, 1, 2 * uint64_t(trial) + 1);
    Matrix jac(2, 2);
    const double h = 1e-5;
    for (Index k = 0; k < 2; ++k) {
      Vector p = at, m = at;
      p(k) += h;
      m(k) -= h;
      jac.col(k) = (model.drift(p) - model.drift(m)) / (2.0 * h);
    }
    max_jac = std::max(max_jac, jac.norm());
  }
  // Bounded by the kernel-scale curvature, far below any blowup.
  CHECK(max_jac < 10.0 / (model.bw().s_hat * model.bw().s_hat));
}
