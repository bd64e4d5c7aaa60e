#pragma once

#include <span>

#include "plom/types.hpp"

namespace plom::ou {

// Closed forms for the one-dimensional Ornstein-Uhlenbeck process
// dY = -Y/2 dt + dW started at x, whose invariant measure is the standard
// normal. Used as the exact oracle for the kernel-spectrum pipeline.

struct Moments {
  double mean{0};
  double sigma{0};
};

// Mean and standard deviation of Y(t) | Y(0) = x.
Moments moments(double x, double t);

// Transition density of Y(t) | Y(0) = x.
double transition_pdf(double y, double t, double x);

// Probabilists' Hermite polynomial of order alpha.
double hermite(int alpha, double y);

// Orthonormal eigenfunctions hermite(alpha, y) / sqrt(alpha!).
double psi(int alpha, double y);

// Transition kernel relative to the invariant measure,
// k_t(y, x) = transition_pdf(y, t, x) / standard_normal_pdf(y).
double kernel(double y, double t, double x);

// Truncated eigenfunction expansion of the kernel (orders 0..order).
double kernel_series(double y, double t, double x, int order);

// Relative squared error of estimated decay rates against the exact
// spectrum alpha/2, over orders 0..a_max.
double spectrum_error(std::span<const double> lambda_hat, int a_max = 5);

// Gauss-Hermite rule rewritten for the standard normal weight:
// integral of f against N(0,1) ~= sum_i weights[i] * f(nodes[i]).
struct Quadrature {
  Vector nodes;
  Vector weights;
};
Quadrature gauss_hermite(int n);

}  // namespace plom::ou
