#pragma once

#include <vector>

#include "plom/data_model.hpp"
#include "plom/kernels.hpp"
#include "plom/types.hpp"

namespace plom {

// Angle in degrees between the subspaces spanned by two reduced bases:
// arccos of the smallest singular value of the cross-Gram of the
// column-normalized bases. Both bases must have the same column count and
// full numerical column rank.
double subspace_angle_deg(const KernelBasis& a, const KernelBasis& b);

// Mean squared distance of learned matrices to the training matrix, relative
// to the training matrix norm. `learned` is nu x (n_d * n_mch), one learned
// matrix per consecutive n_d-column block.
double concentration(const Matrix& learned, const TrainingSet& ts);

// Instants whose concentration per dimension stays below tau_c.
// d2_curve[i] is the concentration at instant instants[i].
std::vector<int> admissible_set(const std::vector<int>& instants,
                                const std::vector<double>& d2_curve, Index nu,
                                double tau_c);

// Admissible instant with the smallest mutual information; ties break toward
// the smaller instant.
int select_optimal(const std::vector<int>& admissible,
                   const std::vector<double>& mi_curve);

// Per-instant record of the selection criteria.
struct SelectionRecord {
  int n{0};
  double t{0};
  double gamma_deg{0};
  double d2_over_nu{0};
  double kl{0};
  double entropy{0};
  double mi{0};
  bool admissible{false};
};

struct SelectionReport {
  std::vector<SelectionRecord> per_n;
  int n_opt{0};
  bool fallback_to_isotropic{false};  // empty admissible set
  double chi_opt{0};
  bool chi_valid{true};
  double mi_h{0}, mi_db{0}, mi_tb_opt{0};
  double inorm_h{0}, inorm_db{0}, inorm_tb{0};
  // Improvement ordering mi_h <= mi_tb_opt < mi_db; reported, not enforced.
  bool ordering_improved{false};
  // Set when the working assumption mi_h < mi_db fails.
  bool mi_assumption_violated{false};
  Index mi_subsample_cap{0};
};

}  // namespace plom
