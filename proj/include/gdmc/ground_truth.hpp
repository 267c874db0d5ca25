#ifndef GDMC_GROUND_TRUTH_HPP
#define GDMC_GROUND_TRUTH_HPP

#include "gdmc/core.hpp"

#include <vector>

namespace gdmc {

/// Planted PSD model M* = U* diag(lambda*) U*^T = X* X*^T.
struct GroundTruth {
  Index n = 0;
  std::vector<double> eigenvalues; ///< descending, strictly positive
  Factor eigenvectors;             ///< n x r, orthonormal columns
  Factor factor;                   ///< X* = U* Sigma*^{1/2}
  double mu = 0.0;                 ///< n * max_i ||U*_i||^2
  Seed seed = 0;

  Index rank() const { return static_cast<Index>(eigenvalues.size()); }
  double lambda_max() const { return eigenvalues.front(); }
  double lambda_min() const { return eigenvalues.back(); }
  double condition_number() const { return lambda_max() / lambda_min(); }

  /// Rank-1 accessors; column 0 of U* and X*.
  Vector u_star() const { return eigenvectors.col(0); }
  Vector x_star() const { return factor.col(0); }

  /// M*_{ij} computed from factor rows.
  double entry(Index i, Index j) const {
    return factor.row(i).dot(factor.row(j));
  }

  /// M* v without forming M*.
  Matrix apply(const Eigen::Ref<const Matrix> &v) const;
};

/// Samples an n x r Gaussian matrix, orthonormalizes it and attaches the
/// eigenvalues. Each column's largest-magnitude entry is made positive.
GroundTruth generate_ground_truth(Index n, std::vector<double> eigenvalues,
                                  Seed seed);

/// Builds a model from explicit orthonormal eigenvectors (validated).
GroundTruth make_ground_truth(Factor eigenvectors,
                              std::vector<double> eigenvalues, Seed seed = 0);

/// mu = n * max_i ||row i of U||^2. Throws if columns are not orthonormal to
/// within 1e-8.
double incoherence(const Eigen::Ref<const Matrix> &U);

/// Modified Gram-Schmidt with one re-orthogonalization pass.
Factor orthonormalize(Factor A);

} // namespace gdmc

#endif // GDMC_GROUND_TRUTH_HPP
