#ifndef GDMC_SOLVER_HPP
#define GDMC_SOLVER_HPP

#include "gdmc/diagnostics.hpp"

#include <vector>

namespace gdmc {

struct SolverConfig {
  double eta = 0.1;
  Index T = 1;
  double beta0 = 1e-3;
  Index record_every = 10;       ///< snapshot stride; scalars every iteration
  std::vector<Index> loo_indices; ///< leave-one-out sequences to advance
  bool track_loo_signal = true;  ///< compute u^(l) for loo_signal (rank-1)
  bool track_proxy = false;      ///< advance the x-hat proxy sequence
  double divergence_factor = 100.0;
};

/// Checks a config against a model: eta lambda_1 < 0.5 (warning above 0.1),
/// T >= 1, beta0 > 0, loo indices in range. Returns warnings; throws on error.
std::vector<std::string> validate_config(const SolverConfig &config,
                                         const GroundTruth &ground);

/// ceil(predicted T*) + 200.
Index default_horizon(const GroundTruth &ground, double eta, double beta0);

/// `count` evenly spaced indices plus the argmax of |u*_i|, sorted, unique.
std::vector<Index> default_loo_indices(const GroundTruth &ground,
                                       Index count = 8);

/// n x r block with i.i.d. N(0, beta0^2 / n) entries.
Factor init_point(Index n, Index r, double beta0, Seed seed);

/// f(X) = (1/4p) sum_{(i,j) in Omega} (X_i.X_j - M*_ij - E_ij)^2.
double loss(const Observation &obs, const Factor &X);
double loss(const Observation &obs, const Vector &x);

/// grad f(X) = (1/p) P_Omega(X X^T) X - M^o X.
Factor gradient(const Observation &obs, const Factor &X);
Vector gradient(const Observation &obs, const Vector &x);

/// Rank-1 gradient assembled as ||x||^2 I_x x - M^o x.
Vector gradient_sampling_form(const Observation &obs, const Vector &x);

/// grad F(X) = X X^T X - M* X for the fully observed noiseless loss.
Factor full_gradient(const GroundTruth &ground, const Factor &X);

struct Snapshot {
  Index t = 0;
  Factor x;
  Factor reference;
  std::vector<Factor> loo; ///< aligned with config.loo_indices
  Factor proxy;            ///< empty unless tracked
};

struct TrajectoryRecord {
  Index rank = 1;
  Seed seed = 0;
  SolverConfig config;
  Factor x0;
  std::vector<Snapshot> snapshots; ///< t = 0, stride, ..., and the final t
  DiagnosticsSeries series;        ///< t = 0..T
  Snapshot final_state;
};

/// Rank-1 GD from x^(0) drawn with `seed`. Main, fully observed and
/// leave-one-out sequences advance in one loop from the same start.
/// Throws DivergenceError on a non-finite iterate or one whose norm exceeds
/// divergence_factor sqrt(lambda_1).
TrajectoryRecord gd_run(const Observation &obs, const SolverConfig &config,
                        Seed seed);

/// Rank-r GD; gd_run is its r = 1 specialization.
TrajectoryRecord gd_run_rank_r(const Observation &obs,
                               const SolverConfig &config, Seed seed);

/// GD from an explicit starting block.
TrajectoryRecord gd_run_from(const Observation &obs, const SolverConfig &config,
                             const Factor &x0, Seed seed = 0);

/// Trajectory scalars of the fully observed rank-1 dynamics.
struct ScalarDynamics {
  std::vector<double> alpha, beta, gamma;
};

/// alpha_{t+1} = (1 - eta beta_t^2 + eta lambda) alpha_t,
/// gamma_{t+1} = (1 - eta beta_t^2) gamma_t, beta_t^2 = alpha_t^2 + gamma_t^2.
ScalarDynamics scalar_dynamics(double alpha0, double gamma0, double lambda,
                               double eta, Index T);

/// x~^(t) = A^(t) x0_perp + B^(t) u*, with x0_perp = x0 - (u*^T x0) u*,
/// A^(t) = prod_{s<t} (1 - eta beta_s^2) and
/// B^(t) = prod_{s<t} (1 - eta beta_s^2 + eta lambda) (u*^T x0).
struct ClosedFormCoeffs {
  std::vector<double> A, B;
  Vector x0_perp;
  Vector u_star;

  Vector reconstruct(Index t) const {
    return A[static_cast<std::size_t>(t)] * x0_perp +
           B[static_cast<std::size_t>(t)] * u_star;
  }
};

struct FullObsResult {
  Matrix trajectory; ///< n x (T + 1), column t is x~^(t)
  ScalarDynamics scalars;
  ClosedFormCoeffs coeffs;
};

/// Fully observed rank-1 trajectory in three representations: the vector
/// recursion, the closed form and the scalar recursion.
FullObsResult full_obs_run(const GroundTruth &ground, const Vector &x0,
                           double eta, Index T);

} // namespace gdmc

#endif // GDMC_SOLVER_HPP
