#ifndef GDMC_ORACLE_HPP
#define GDMC_ORACLE_HPP

// Slow reference implementations built from explicit scalar loops over
// dense matrices. Nothing here calls the sparse kernels in observation.cpp
// or the Eigen decompositions used by the fast paths.

#include "gdmc/observation.hpp"

#include <functional>
#include <vector>

namespace gdmc::oracle {

/// Dense row-major matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols, double value = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows * cols), value) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  double &operator()(Index i, Index j) {
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }
  double operator()(Index i, Index j) const {
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }

  static DenseMatrix from(const Matrix &m);
  Matrix to_eigen() const;

private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

// Dense realizations. All throw std::invalid_argument above kDenseThreshold.

/// 0/1 indicator of Omega built from the mask's directed adjacency.
DenseMatrix mask_indicator(const SampleMask &mask);
/// M* from factor rows.
DenseMatrix planted(const GroundTruth &ground);
/// Symmetric E restricted to Omega (zero elsewhere).
DenseMatrix noise(const Observation &obs);
/// X X^T for an n x r factor.
DenseMatrix outer(const Matrix &X);
/// (1/p) P_Omega(A).
DenseMatrix scaled_projection(const SampleMask &mask, const DenseMatrix &A);
/// P^(l)_Omega(A): A on row/column l, (1/p) P_Omega(A) elsewhere.
DenseMatrix loo_projection(const SampleMask &mask, Index l,
                           const DenseMatrix &A);
/// M^o = (1/p) P_Omega(M* + E).
DenseMatrix observed_matrix(const Observation &obs);
/// M^(l) = P^(l)_Omega(M*) + E^(l).
DenseMatrix loo_matrix(const Observation &obs, Index l);
/// diag(||x||_{2,i}) as a vector, from explicit sums over the indicator.
Vector row_norms(const SampleMask &mask, const Vector &x);

/// A x with the i-outer / j-inner loop order.
Matrix multiply(const DenseMatrix &A, const Matrix &X);
/// A x accumulated column by column (j-outer / i-inner).
Matrix multiply_by_columns(const DenseMatrix &A, const Matrix &X);

/// Observed loss from a double loop over all ordered (i, j).
double loss(const Observation &obs, const Matrix &X);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
Vector fd_gradient(const std::function<double(const Vector &)> &f,
                   const Vector &x, double h);

/// Step used by gradient checks: 1e-6 * max(1, ||x||_inf).
double fd_step(const Vector &x);

/// |a - b| <= atol + rtol * max(|a|, |b|).
bool close(double a, double b, double atol, double rtol);

struct JacobiResult {
  Vector eigenvalues;  ///< descending
  Matrix eigenvectors; ///< columns match eigenvalues
  Index sweeps = 0;
  double off_diagonal = 0.0; ///< final off-diagonal Frobenius norm
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (n <= 256).
/// Stops when the off-diagonal Frobenius norm is <= 1e-12 ||A||_F.
JacobiResult jacobi_eigen(const DenseMatrix &A);

} // namespace gdmc::oracle

#endif // GDMC_ORACLE_HPP
