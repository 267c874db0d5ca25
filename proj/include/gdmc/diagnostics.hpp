#ifndef GDMC_DIAGNOSTICS_HPP
#define GDMC_DIAGNOSTICS_HPP

#include "gdmc/observation.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace gdmc {

// ---------------------------------------------------------------------------
// Per-iterate quantities

struct SignalParts {
  double alpha = 0.0; ///< |u*^T x|
  double beta = 0.0;  ///< ||x||_2
  double gamma = 0.0; ///< ||x - u* u*^T x||_2
};

/// Splits x into its component along the unit vector u and the orthogonal
/// remainder.
template <class DerivedX, class DerivedU>
SignalParts signal_decomposition(const Eigen::MatrixBase<DerivedX> &x,
                                 const Eigen::MatrixBase<DerivedU> &u) {
  require(x.size() == u.size(), "signal_decomposition: dimension mismatch");
  require(std::abs(u.norm() - 1.0) <= 1e-10,
          "signal_decomposition: direction must have unit norm");
  const double proj = u.dot(x);
  return {std::abs(proj), x.norm(), (x - proj * u).norm()};
}

enum class NormKind { L2, Inf };

/// ||x +- y|| = min(||x - y||, ||x + y||).
template <class DerivedX, class DerivedY>
double aligned_error(const Eigen::MatrixBase<DerivedX> &x,
                     const Eigen::MatrixBase<DerivedY> &y,
                     NormKind kind = NormKind::L2) {
  require(x.rows() == y.rows() && x.cols() == y.cols(),
          "aligned_error: dimension mismatch");
  if (kind == NormKind::L2)
    return std::min((x - y).norm(), (x + y).norm());
  return std::min((x - y).cwiseAbs().maxCoeff(),
                  (x + y).cwiseAbs().maxCoeff());
}

/// n ||x||_inf^2 / ||x||_2^2 (row-norm version for n x r blocks).
template <class Derived>
double incoherence_track(const Eigen::MatrixBase<Derived> &x) {
  const double total = x.squaredNorm();
  require(total > 0.0, "incoherence_track: zero input");
  return static_cast<double>(x.rows()) * x.rowwise().squaredNorm().maxCoeff() /
         total;
}

/// Orthogonal R minimizing ||X R - Y||_F: the polar factor of X^T Y.
Matrix optimal_rotation(const Matrix &X, const Matrix &Y);

/// min over orthogonal R of ||X R - Y||_F.
double procrustes_error(const Matrix &X, const Matrix &Y);

/// Singular values of an n x r block, descending.
Vector singular_values(const Matrix &X);

// ---------------------------------------------------------------------------
// Spectral quantities

/// Symmetric linear map on R^n given in matrix-free form.
using LinearOperator = std::function<Vector(const Vector &)>;

struct PowerOptions {
  double tol = 1e-8;
  Index max_iter = 5000;
  Seed seed = 0x70776572ULL;
};

struct EigenPair {
  double lambda = 0.0;
  Vector v;
  Index iterations = 0;
  double residual = 0.0; ///< ||A v - lambda v||_2
};

/// Dominant (largest |lambda|) eigenpair by power iteration with a Rayleigh
/// quotient estimate. Stops once ||A v - lambda v|| <= tol |lambda|; the
/// returned vector has its largest-magnitude entry positive. Throws
/// ConvergenceError after max_iter.
EigenPair top_eigenpair(const LinearOperator &op, Index n,
                        const PowerOptions &options = {});

struct NormEstimate {
  double value = 0.0;
  Index iterations = 0;
};

/// ||A|| for symmetric A: power iteration on v -> A(A v), square root of the
/// converged Rayleigh quotient. Stops on relative change <= tol. The
/// composition has a double top eigenvalue whenever +-||A|| are both
/// (nearly) eigenvalues, so residual-based stopping is not used here.
NormEstimate spectral_norm(const LinearOperator &op, Index n,
                           const PowerOptions &options = {});

struct LooSpectral {
  Index l = 0;
  double lambda = 0.0;   ///< top eigenvalue of M^(l)
  double u_dist = 0.0;   ///< ||u^(l) - u*||_2 after sign alignment
  Vector u;              ///< sign-aligned u^(l)
};

struct SpectralReport {
  double h_norm = 0.0;     ///< ||M^o - M*||
  double lambda_o = 0.0;   ///< top eigenvalue of M^o
  double u_o_dist = 0.0;   ///< ||u^o - u*||_2, sign aligned
  double bound = 0.0;      ///< lambda* mu sqrt(log n / (n p))
  double bound_ratio = 0.0;
  double tol = 0.0;
  std::vector<LooSpectral> loo;

  /// |lambda^o - lambda*| <= ||H|| + 2 tol.
  bool weyl_consistent(double lambda_star) const {
    return std::abs(lambda_o - lambda_star) <= h_norm + 2.0 * tol;
  }
};

/// Top eigenvector of M^(l) aligned so that u^(l)^T u* >= 0.
LooSpectral loo_spectral(const Observation &obs, Index l,
                         const PowerOptions &options = {});

/// Rank-1 spectral measurements of an observation.
SpectralReport spectral_report(const Observation &obs,
                               const std::vector<Index> &loo_indices = {},
                               const PowerOptions &options = {});

// ---------------------------------------------------------------------------
// Series and phases

/// Scalars tracked for one leave-one-out sequence.
struct LooSeries {
  Index l = 0;
  std::vector<double> dev;    ///< ||x - x^(l)||_2
  std::vector<double> entry;  ///< |(x^(l) -+ x*)_l|, sign aligned
  std::vector<double> signal; ///< |u^(l)^T (x - x^(l))|, rank-1 only
};

/// Per-iteration diagnostics; entry t describes the iterate x^(t).
///
/// For rank r > 1, alpha/beta/gamma are Frobenius analogues
/// (||U*^T X||, ||X||, ||(I - U*U*^T) X||) and aligned_l2 is the
/// rotation-aligned (Procrustes) error.
struct DiagnosticsSeries {
  std::vector<double> alpha, beta, gamma;
  std::vector<double> loss;
  std::vector<double> aligned_l2, aligned_inf;
  std::vector<double> dev_ref_l2, dev_ref_inf;
  std::vector<double> x_inf;
  std::vector<double> incoherence_x;
  std::vector<double> ref_alpha, ref_beta, ref_gamma;
  std::vector<double> dev_proxy_l2; ///< empty unless the proxy is tracked
  std::vector<std::vector<double>> singular_values; ///< one r-vector per t
  std::vector<LooSeries> loo;

  Index size() const { return static_cast<Index>(beta.size()); }
};

struct PhaseReport {
  double t1_theory = 0.0; ///< may exceed any practical horizon
  bool t1_vacuous = false;
  std::optional<Index> t2_emp;
  std::optional<Index> t2_prime_emp;
  double t_star_pred = 0.0;
  std::optional<Index> t_star_emp;
};

/// (1 / log(1 + eta lambda)) log(sqrt(lambda n) / beta0).
double predicted_t_star(double lambda, double eta, Index n, double beta0);

/// Phase boundaries measured from a series (natural logarithms):
///   T2'  first t with ref_beta^2 > lambda / (64 log n)
///   T2   first t with ref_beta^2 > lambda (1 - 1 / log n)
///   T*   first t with aligned_l2 <= sqrt(lambda / log n)
/// Boundaries not reached within the series stay empty.
PhaseReport phase_boundaries(const DiagnosticsSeries &series,
                             const GroundTruth &ground, double eta,
                             double beta0, double p);

} // namespace gdmc

#endif // GDMC_DIAGNOSTICS_HPP
