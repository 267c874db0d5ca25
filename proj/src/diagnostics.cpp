#include "gdmc/diagnostics.hpp"

#include "gdmc/rng.hpp"

#include <Eigen/SVD>

#include <limits>

namespace gdmc {

Matrix optimal_rotation(const Matrix &X, const Matrix &Y) {
  require(X.rows() == Y.rows() && X.cols() == Y.cols(),
          "optimal_rotation: shape mismatch");
  const Matrix cross = X.transpose() * Y;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

double procrustes_error(const Matrix &X, const Matrix &Y) {
  require(X.rows() == Y.rows() && X.cols() == Y.cols(),
          "procrustes_error: shape mismatch");
  if (X.cols() == 1)
    return aligned_error(X.col(0), Y.col(0), NormKind::L2);
  return (X * optimal_rotation(X, Y) - Y).norm();
}

Vector singular_values(const Matrix &X) {
  Eigen::JacobiSVD<Matrix> svd(X);
  return svd.singularValues();
}

namespace {

Vector random_unit(Index n, Seed seed) {
  Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = rng.normal();
  return v / v.norm();
}

void normalize_sign(Vector &v) {
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0)
    v = -v;
}

} // namespace

EigenPair top_eigenpair(const LinearOperator &op, Index n,
                        const PowerOptions &options) {
  require(n >= 1, "top_eigenpair: empty operator");
  require(options.tol > 0.0, "top_eigenpair: tolerance must be positive");
  Vector v = random_unit(n, options.seed);
  EigenPair out;
  for (Index it = 1; it <= options.max_iter; ++it) {
    const Vector w = op(v);
    const double lambda = v.dot(w);
    const double residual = (w - lambda * v).norm();
    if (residual <= options.tol * std::abs(lambda)) {
      out.lambda = lambda;
      out.v = v;
      out.iterations = it;
      out.residual = residual;
      normalize_sign(out.v);
      return out;
    }
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw ConvergenceError("top_eigenpair: operator annihilated iterate",
                             residual);
    v = w / norm;
    out.residual = residual;
  }
  throw ConvergenceError("top_eigenpair: no convergence within max_iter",
                         out.residual);
}

NormEstimate spectral_norm(const LinearOperator &op, Index n,
                           const PowerOptions &options) {
  require(n >= 1, "spectral_norm: empty operator");
  require(options.tol > 0.0, "spectral_norm: tolerance must be positive");
  Vector v = random_unit(n, options.seed);
  double previous = -1.0;
  for (Index it = 1; it <= options.max_iter; ++it) {
    const Vector w = op(op(v));
    const double rho = v.dot(w);
    const double norm = w.norm();
    if (!(norm > 0.0))
      return {0.0, it};
    if (previous >= 0.0 && std::abs(rho - previous) <= options.tol * rho)
      return {std::sqrt(rho), it};
    previous = rho;
    v = w / norm;
  }
  throw ConvergenceError("spectral_norm: no convergence within max_iter",
                         previous);
}

LooSpectral loo_spectral(const Observation &obs, Index l,
                         const PowerOptions &options) {
  const Vector u_star = obs.ground().u_star();
  const EigenPair pair = top_eigenpair(
      [&](const Vector &v) { return loo_mo_product(obs, l, v); }, obs.n(),
      options);
  LooSpectral out;
  out.l = l;
  out.lambda = pair.lambda;
  out.u = pair.v.dot(u_star) < 0.0 ? Vector(-pair.v) : pair.v;
  out.u_dist = (out.u - u_star).norm();
  return out;
}

SpectralReport spectral_report(const Observation &obs,
                               const std::vector<Index> &loo_indices,
                               const PowerOptions &options) {
  const GroundTruth &gt = obs.ground();
  require(gt.rank() == 1, "spectral_report: rank-1 ground truth required");
  const Index n = obs.n();
  const Vector u_star = gt.u_star();
  const double lambda_star = gt.lambda_max();

  SpectralReport report;
  report.tol = options.tol;
  report.h_norm =
      spectral_norm(
          [&](const Vector &v) {
            Vector out = mo_product(obs, v);
            out.noalias() -= lambda_star * u_star.dot(v) * u_star;
            return out;
          },
          n, options)
          .value;

  const EigenPair top = top_eigenpair(
      [&](const Vector &v) { return mo_product(obs, v); }, n, options);
  report.lambda_o = top.lambda;
  report.u_o_dist = aligned_error(top.v, u_star, NormKind::L2);

  const double dn = static_cast<double>(n);
  report.bound = lambda_star * gt.mu * std::sqrt(std::log(dn) / (dn * obs.p()));
  report.bound_ratio = report.h_norm / report.bound;

  for (Index l : loo_indices)
    report.loo.push_back(loo_spectral(obs, l, options));
  return report;
}

double predicted_t_star(double lambda, double eta, Index n, double beta0) {
  require(lambda > 0.0 && eta > 0.0 && beta0 > 0.0 && n >= 1,
          "predicted_t_star: parameters must be positive");
  return std::log(std::sqrt(lambda * static_cast<double>(n)) / beta0) /
         std::log1p(eta * lambda);
}

namespace {

template <class Pred>
std::optional<Index> first_index(const std::vector<double> &values,
                                 Pred &&pred) {
  for (std::size_t t = 0; t < values.size(); ++t)
    if (pred(values[t]))
      return static_cast<Index>(t);
  return std::nullopt;
}

} // namespace

PhaseReport phase_boundaries(const DiagnosticsSeries &series,
                             const GroundTruth &ground, double eta,
                             double beta0, double p) {
  const double lambda = ground.lambda_max();
  const double n = static_cast<double>(ground.n);
  const double log_n = std::log(n);

  PhaseReport report;
  const double rate = std::log1p(eta * lambda);
  // (1 + eta lambda)^t <= sqrt(mu^4 log^21 n / (n p)) sqrt(n), in log form.
  const double log_rhs = 0.5 * (4.0 * std::log(ground.mu) +
                                21.0 * std::log(log_n) - std::log(n * p)) +
                         0.5 * std::log(n);
  report.t1_theory = std::floor(log_rhs / rate);
  report.t_star_pred = predicted_t_star(lambda, eta, ground.n, beta0);
  report.t1_vacuous = report.t1_theory >= report.t_star_pred;

  if (series.size() == 0)
    return report;

  const double t2_level = lambda * (1.0 - 1.0 / log_n);
  const double t2p_level = lambda / (64.0 * log_n);
  report.t2_emp = first_index(series.ref_beta,
                              [&](double b) { return b * b > t2_level; });
  report.t2_prime_emp = first_index(
      series.ref_beta, [&](double b) { return b * b > t2p_level; });
  const double star_level = std::sqrt(lambda / log_n);
  report.t_star_emp = first_index(
      series.aligned_l2, [&](double e) { return e <= star_level; });
  return report;
}

} // namespace gdmc
