#ifndef GDMC_CORE_HPP
#define GDMC_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gdmc {

using Scalar = double;
using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// n x r factor stored row-major so that row inner products are contiguous.
using Factor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Seed = std::uint64_t;

/// Above this dimension no dense n x n matrix is ever formed.
inline constexpr Index kDenseThreshold = 512;
/// Largest dimension accepted by the dense Jacobi eigensolver.
inline constexpr Index kEigenThreshold = 256;

/// Thrown when a GD iterate becomes non-finite or leaves the bounded region.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string &what, Index last_finite_iteration)
      : std::runtime_error(what), last_finite_(last_finite_iteration) {}

  Index last_finite_iteration() const noexcept { return last_finite_; }

private:
  Index last_finite_;
};

/// Thrown when an iterative eigen routine exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string &what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

inline void require(bool condition, const std::string &message) {
  if (!condition)
    throw std::invalid_argument(message);
}

} // namespace gdmc

#endif // GDMC_CORE_HPP
