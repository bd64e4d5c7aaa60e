#include "plom/gaussian_reference.hpp"

#include <cmath>
#include <numbers>

namespace plom::ou {

namespace {
constexpr double kSqrt2Pi = 2.506628274631000502;
}

Moments moments(double x, double t) {
  if (t < 0) throw Error("ou::moments: t >= 0 required");
  return {x * std::exp(-t / 2.0), std::sqrt(-std::expm1(-t))};
}

double transition_pdf(double y, double t, double x) {
  if (!(t > 0)) throw Error("ou::transition_pdf: t > 0 required");
  const auto [m, sigma] = moments(x, t);
  const double z = (y - m) / sigma;
  return std::exp(-0.5 * z * z) / (kSqrt2Pi * sigma);
}

double hermite(int alpha, double y) {
  if (alpha < 0) throw Error("ou::hermite: alpha >= 0 required");
  double h_prev = 1.0, h = y;
  if (alpha == 0) return h_prev;
  for (int a = 1; a < alpha; ++a) {
    const double h_next = y * h - double(a) * h_prev;
    h_prev = h;
    h = h_next;
  }
  return h;
}

double psi(int alpha, double y) {
  double log_fact = 0;
  for (int a = 2; a <= alpha; ++a) log_fact += std::log(double(a));
  return hermite(alpha, y) * std::exp(-0.5 * log_fact);
}

double kernel(double y, double t, double x) {
  const double pdf_inv = kSqrt2Pi * std::exp(0.5 * y * y);
  return transition_pdf(y, t, x) * pdf_inv;
}

double kernel_series(double y, double t, double x, int order) {
  double sum = 0;
  for (int a = 0; a <= order; ++a)
    sum += std::exp(-0.5 * double(a) * t) * psi(a, y) * psi(a, x);
  return sum;
}

double spectrum_error(std::span<const double> lambda_hat, int a_max) {
  if (int(lambda_hat.size()) < a_max + 1)
    throw DimensionMismatch("spectrum_error: need a_max+1 estimates");
  double num = 0, den = 0;
  for (int a = 0; a <= a_max; ++a) {
    const double exact = double(a) / 2.0;
    num += (exact - lambda_hat[size_t(a)]) * (exact - lambda_hat[size_t(a)]);
    den += exact * exact;
  }
  return num / den;
}

Quadrature gauss_hermite(int n) {
  if (n < 1) throw Error("gauss_hermite: n >= 1 required");
  // Golub-Welsch on the Jacobi matrix of the physicists' Hermite recurrence,
  // then substitute to the standard normal weight.
  Matrix jac = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(double(i) / 2.0);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jac);
  Quadrature q;
  q.nodes = std::numbers::sqrt2 * eig.eigenvalues();
  q.weights = eig.eigenvectors().row(0).transpose().array().square();
  return q;
}

}  // namespace plom::ou
