#include "gdmc/ground_truth.hpp"

#include "gdmc/rng.hpp"

#include <cmath>

namespace gdmc {

namespace {

void check_eigenvalues(const std::vector<double> &eigenvalues) {
  require(!eigenvalues.empty(), "at least one eigenvalue is required");
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    require(std::isfinite(eigenvalues[k]) && eigenvalues[k] > 0.0,
            "eigenvalues must be strictly positive");
    if (k > 0)
      require(eigenvalues[k] <= eigenvalues[k - 1],
              "eigenvalues must be non-increasing");
  }
}

void normalize_signs(Factor &U) {
  for (Index k = 0; k < U.cols(); ++k) {
    Index arg = 0;
    U.col(k).cwiseAbs().maxCoeff(&arg);
    if (U(arg, k) < 0.0)
      U.col(k) *= -1.0;
  }
}

} // namespace

Matrix GroundTruth::apply(const Eigen::Ref<const Matrix> &v) const {
  return factor * (factor.transpose() * v);
}

Factor orthonormalize(Factor A) {
  const Index r = A.cols();
  for (Index k = 0; k < r; ++k) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < k; ++j) {
        const double proj = A.col(j).dot(A.col(k));
        A.col(k) -= proj * A.col(j);
      }
    }
    const double norm = A.col(k).norm();
    if (!(norm > 0.0))
      throw std::runtime_error("orthonormalize: rank-deficient input");
    A.col(k) /= norm;
  }
  return A;
}

double incoherence(const Eigen::Ref<const Matrix> &U) {
  const Index n = U.rows();
  require(n > 0 && U.cols() > 0, "incoherence: empty matrix");
  const Matrix gram = U.transpose() * U;
  const double off =
      (gram - Matrix::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
  require(off <= 1e-8, "incoherence: columns are not orthonormal");
  return static_cast<double>(n) * U.rowwise().squaredNorm().maxCoeff();
}

GroundTruth make_ground_truth(Factor eigenvectors,
                              std::vector<double> eigenvalues, Seed seed) {
  check_eigenvalues(eigenvalues);
  const Index n = eigenvectors.rows();
  const Index r = static_cast<Index>(eigenvalues.size());
  require(eigenvectors.cols() == r,
          "eigenvector count does not match eigenvalue count");
  require(r <= n, "rank exceeds dimension");

  GroundTruth gt;
  gt.n = n;
  gt.seed = seed;
  gt.mu = incoherence(eigenvectors);
  gt.factor = eigenvectors;
  for (Index k = 0; k < r; ++k)
    gt.factor.col(k) *= std::sqrt(eigenvalues[static_cast<std::size_t>(k)]);
  gt.eigenvectors = std::move(eigenvectors);
  gt.eigenvalues = std::move(eigenvalues);
  return gt;
}

GroundTruth generate_ground_truth(Index n, std::vector<double> eigenvalues,
                                  Seed seed) {
  check_eigenvalues(eigenvalues);
  const Index r = static_cast<Index>(eigenvalues.size());
  require(n >= r, "rank exceeds dimension");
  Factor U = orthonormalize(gaussian_factor(n, r, 1.0, seed));
  normalize_signs(U);
  return make_ground_truth(std::move(U), std::move(eigenvalues), seed);
}

} // namespace gdmc
