#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace plom {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Array = Eigen::ArrayXd;
using Index = Eigen::Index;

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define PLOM_DEFINE_ERROR(name)                                   \
  class name : public Error {                                     \
  public:                                                         \
    explicit name(const std::string& what) : Error(what) {}       \
  }

PLOM_DEFINE_ERROR(DegenerateData);
PLOM_DEFINE_ERROR(RankDeficient);
PLOM_DEFINE_ERROR(NonFinite);
PLOM_DEFINE_ERROR(DegenerateSigma);
PLOM_DEFINE_ERROR(NoEpsilonFound);
PLOM_DEFINE_ERROR(DimensionMismatch);
PLOM_DEFINE_ERROR(NonPositiveDenominator);
PLOM_DEFINE_ERROR(DegenerateEquation);
PLOM_DEFINE_ERROR(ShapeMismatch);
PLOM_DEFINE_ERROR(EmptyAdmissibleSet);
PLOM_DEFINE_ERROR(SingularGram);
PLOM_DEFINE_ERROR(SingularCovariance);
PLOM_DEFINE_ERROR(Diverged);
PLOM_DEFINE_ERROR(IoError);

#undef PLOM_DEFINE_ERROR

// Number of worker threads used by the parallel loops in this library.
// 0 (default) means "use all hardware threads". Results are bitwise
// independent of this setting.
void set_num_threads(int n);
int num_threads();

}  // namespace plom
