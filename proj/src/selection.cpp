#include "plom/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace plom {

namespace {

Matrix normalized_columns(const Matrix& g) {
  Matrix out = g;
  for (Index c = 0; c < out.cols(); ++c) {
    const double norm = out.col(c).norm();
    if (!(norm > 0)) throw RankDeficient("zero basis column");
    out.col(c) /= norm;
  }
  return out;
}

void check_full_rank(const Matrix& g, const char* which) {
  Eigen::JacobiSVD<Matrix> svd(g);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 1e-10 * smax))
    throw RankDeficient(std::string("basis ") + which + " is numerically rank-deficient");
}

}  // namespace

double subspace_angle_deg(const KernelBasis& a, const KernelBasis& b) {
  if (a.g.cols() != b.g.cols() || a.g.rows() != b.g.rows())
    throw DimensionMismatch("subspace_angle: basis shapes differ");
  const Matrix ga = normalized_columns(a.g);
  const Matrix gb = normalized_columns(b.g);
  check_full_rank(ga, "A");
  check_full_rank(gb, "B");
  Eigen::JacobiSVD<Matrix> svd(ga.transpose() * gb);
  const double smin = std::clamp(svd.singularValues().minCoeff(), 0.0, 1.0);
  return std::acos(smin) * 180.0 / std::numbers::pi;
}

double concentration(const Matrix& learned, const TrainingSet& ts) {
  const Index nu = ts.nu(), n_d = ts.n_d();
  if (learned.rows() != nu || learned.cols() % n_d != 0 || learned.cols() == 0)
    throw ShapeMismatch("learned realizations are not stacked nu x n_d matrices");
  const Index n_mch = learned.cols() / n_d;
  const double ref = ts.eta.squaredNorm();
  double acc = 0;
  for (Index ell = 0; ell < n_mch; ++ell)
    acc += (learned.middleCols(ell * n_d, n_d) - ts.eta).squaredNorm();
  return acc / (double(n_mch) * ref);
}

std::vector<int> admissible_set(const std::vector<int>& instants,
                                const std::vector<double>& d2_curve, Index nu,
                                double tau_c) {
  if (instants.size() != d2_curve.size())
    throw DimensionMismatch("admissible_set: curve length mismatch");
  if (!(tau_c > 0)) throw Error("admissible_set: tau_c > 0 required");
  std::vector<int> out;
  for (size_t i = 0; i < instants.size(); ++i)
    if (d2_curve[i] / double(nu) <= tau_c) out.push_back(instants[i]);
  return out;
}

int select_optimal(const std::vector<int>& admissible,
                   const std::vector<double>& mi_curve) {
  if (admissible.empty()) throw EmptyAdmissibleSet("no admissible instant");
  if (admissible.size() != mi_curve.size())
    throw DimensionMismatch("select_optimal: curve length mismatch");
  size_t best = 0;
  for (size_t i = 1; i < admissible.size(); ++i)
    if (mi_curve[i] < mi_curve[best]) best = i;
  return admissible[best];
}

}  // namespace plom
