#include "gdmc/solver.hpp"

#include "gdmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gdmc {

std::vector<std::string> validate_config(const SolverConfig &config,
                                         const GroundTruth &ground) {
  require(config.eta > 0.0 && std::isfinite(config.eta),
          "step size must be positive");
  require(config.T >= 1, "iteration count must be at least 1");
  require(config.beta0 > 0.0 && std::isfinite(config.beta0),
          "initialization scale must be positive");
  require(config.record_every >= 1, "record stride must be at least 1");
  const double step = config.eta * ground.lambda_max();
  require(step < 0.5, "eta * lambda_1 must be below 0.5");
  for (Index l : config.loo_indices)
    require(l >= 0 && l < ground.n, "leave-one-out index out of range");

  std::vector<std::string> warnings;
  if (step > 0.1) {
    std::ostringstream os;
    os << "eta * lambda_1 = " << step
       << " exceeds 0.1; convergence guarantees assume a smaller step";
    warnings.push_back(os.str());
  }
  return warnings;
}

Index default_horizon(const GroundTruth &ground, double eta, double beta0) {
  return static_cast<Index>(
             std::ceil(predicted_t_star(ground.lambda_max(), eta, ground.n,
                                        beta0))) +
         200;
}

std::vector<Index> default_loo_indices(const GroundTruth &ground,
                                       Index count) {
  const Index n = ground.n;
  std::vector<Index> out;
  for (Index k = 0; k < std::min(count, n); ++k)
    out.push_back(k * n / std::min(count, n));
  Index arg = 0;
  ground.eigenvectors.col(0).cwiseAbs().maxCoeff(&arg);
  out.push_back(arg);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Factor init_point(Index n, Index r, double beta0, Seed seed) {
  require(n >= 1 && r >= 1, "init_point: dimensions must be positive");
  require(beta0 > 0.0 && std::isfinite(beta0),
          "init_point: initialization scale must be positive");
  return gaussian_factor(n, r, beta0 / std::sqrt(static_cast<double>(n)),
                         seed);
}

namespace {

Factor as_factor(const Vector &x) {
  return Eigen::Map<const Factor>(x.data(), x.size(), 1);
}

Vector as_vector(const Factor &X) {
  return Eigen::Map<const Vector>(X.data(), X.rows());
}

/// One GD step of the fully observed noiseless loss F.
void reference_step(const GroundTruth &ground, Factor &ref, double eta) {
  const Factor grad = full_gradient(ground, ref);
  ref -= eta * grad;
}

} // namespace

double loss(const Observation &obs, const Factor &X) {
  require(X.cols() == obs.ground().rank(), "loss: rank mismatch");
  double value = 0.0;
  masked_residual_product(obs, X, &value);
  return value;
}

double loss(const Observation &obs, const Vector &x) {
  return loss(obs, as_factor(x));
}

Factor gradient(const Observation &obs, const Factor &X) {
  require(X.cols() == obs.ground().rank(), "gradient: rank mismatch");
  return masked_residual_product(obs, X);
}

Vector gradient(const Observation &obs, const Vector &x) {
  return as_vector(gradient(obs, as_factor(x)));
}

Vector gradient_sampling_form(const Observation &obs, const Vector &x) {
  require(x.size() == obs.n(), "gradient_sampling_form: dimension mismatch");
  const double sq = x.squaredNorm();
  if (sq == 0.0)
    return -mo_product(obs, x);
  const Vector weights = sampling_weights(obs.mask(), x);
  return (sq * weights.array() * x.array()).matrix() - mo_product(obs, x);
}

Factor full_gradient(const GroundTruth &ground, const Factor &X) {
  require(X.rows() == ground.n && X.cols() == ground.rank(),
          "full_gradient: shape mismatch");
  const Factor &Xs = ground.factor;
  return X * (X.transpose() * X) - Xs * (Xs.transpose() * X);
}

namespace {

struct Recorder {
  const Observation &obs;
  const SolverConfig &config;
  std::vector<Vector> loo_directions;
  DiagnosticsSeries series;

  void record(const Factor &X, const Factor &ref,
              const std::vector<Factor> &loo, const Factor *proxy,
              double loss_value) {
    const GroundTruth &gt = obs.ground();
    const Index r = gt.rank();
    const Matrix Xm = X;
    const Matrix Xs = gt.factor;

    if (r == 1) {
      const SignalParts parts = signal_decomposition(X.col(0), gt.eigenvectors.col(0));
      const SignalParts ref_parts =
          signal_decomposition(ref.col(0), gt.eigenvectors.col(0));
      push_parts(parts, ref_parts);
      series.aligned_l2.push_back(aligned_error(Xm, Xs, NormKind::L2));
      series.aligned_inf.push_back(aligned_error(Xm, Xs, NormKind::Inf));
    } else {
      const Matrix Us = gt.eigenvectors;
      push_parts(frobenius_parts(Xm, Us), frobenius_parts(Matrix(ref), Us));
      const Matrix R = optimal_rotation(Xm, Xs);
      const Matrix diff = Xm * R - Xs;
      series.aligned_l2.push_back(diff.norm());
      series.aligned_inf.push_back(diff.cwiseAbs().maxCoeff());
    }
    series.loss.push_back(loss_value);
    series.dev_ref_l2.push_back((X - ref).norm());
    series.dev_ref_inf.push_back((X - ref).cwiseAbs().maxCoeff());
    series.x_inf.push_back(X.cwiseAbs().maxCoeff());
    series.incoherence_x.push_back(incoherence_track(X));
    const Vector sv = singular_values(Xm);
    series.singular_values.emplace_back(sv.data(), sv.data() + sv.size());
    if (proxy != nullptr)
      series.dev_proxy_l2.push_back((X - *proxy).norm());

    for (std::size_t k = 0; k < loo.size(); ++k) {
      LooSeries &track = series.loo[k];
      const Factor &Xl = loo[k];
      const Index l = track.l;
      track.dev.push_back((X - Xl).norm());
      if (r == 1) {
        const double xs_l = Xs(l, 0);
        track.entry.push_back(
            std::min(std::abs(Xl(l, 0) - xs_l), std::abs(Xl(l, 0) + xs_l)));
        if (!loo_directions.empty())
          track.signal.push_back(
              std::abs(loo_directions[k].dot(as_vector(X - Xl))));
      } else {
        const Matrix Xlm = Xl;
        const Matrix R = optimal_rotation(Xlm, Xs);
        track.entry.push_back((Xlm.row(l) * R - Xs.row(l)).norm());
      }
    }
  }

private:
  static SignalParts frobenius_parts(const Matrix &X, const Matrix &U) {
    const Matrix proj = U.transpose() * X;
    return {proj.norm(), X.norm(), (X - U * proj).norm()};
  }

  void push_parts(const SignalParts &main, const SignalParts &ref) {
    series.alpha.push_back(main.alpha);
    series.beta.push_back(main.beta);
    series.gamma.push_back(main.gamma);
    series.ref_alpha.push_back(ref.alpha);
    series.ref_beta.push_back(ref.beta);
    series.ref_gamma.push_back(ref.gamma);
  }
};

Snapshot make_snapshot(Index t, const Factor &X, const Factor &ref,
                       const std::vector<Factor> &loo, const Factor *proxy) {
  Snapshot s;
  s.t = t;
  s.x = X;
  s.reference = ref;
  s.loo = loo;
  if (proxy != nullptr)
    s.proxy = *proxy;
  return s;
}

} // namespace

TrajectoryRecord gd_run_from(const Observation &obs, const SolverConfig &config,
                             const Factor &x0, Seed seed) {
  const GroundTruth &gt = obs.ground();
  validate_config(config, gt);
  const Index r = gt.rank();
  require(x0.rows() == gt.n && x0.cols() == r,
          "initial point does not match ground truth shape");

  TrajectoryRecord record;
  record.rank = r;
  record.seed = seed;
  record.config = config;
  record.x0 = x0;

  Recorder recorder{obs, config, {}, {}};
  for (Index l : config.loo_indices) {
    LooSeries track;
    track.l = l;
    recorder.series.loo.push_back(std::move(track));
    if (r == 1 && config.track_loo_signal)
      recorder.loo_directions.push_back(loo_spectral(obs, l).u);
  }

  Factor X = x0;
  Factor ref = x0;
  std::vector<Factor> loo(config.loo_indices.size(), x0);
  Factor proxy;
  if (config.track_proxy)
    proxy = x0;
  const Factor *proxy_ptr = config.track_proxy ? &proxy : nullptr;

  const double eta = config.eta;
  const double bound = config.divergence_factor * std::sqrt(gt.lambda_max());

  for (Index t = 0;; ++t) {
    double loss_value = 0.0;
    const Factor grad = masked_residual_product(obs, X, &loss_value);
    recorder.record(X, ref, loo, proxy_ptr, loss_value);
    if (t % config.record_every == 0 || t == config.T)
      record.snapshots.push_back(make_snapshot(t, X, ref, loo, proxy_ptr));
    if (t == config.T) {
      record.final_state = make_snapshot(t, X, ref, loo, proxy_ptr);
      break;
    }

    if (config.track_proxy) {
      const double scale = ref.squaredNorm();
      const Factor mo = mo_product(obs, Matrix(proxy));
      proxy = proxy - eta * scale * proxy + eta * mo;
    }
    for (std::size_t k = 0; k < loo.size(); ++k)
      loo[k] -= eta * loo_residual_product(obs, config.loo_indices[k], loo[k]);
    X -= eta * grad;
    reference_step(gt, ref, eta);

    const double norm = X.norm();
    if (!std::isfinite(norm) || !X.allFinite() || norm > bound) {
      std::ostringstream os;
      os << "gradient descent diverged after iteration " << t
         << " (norm " << norm << ")";
      throw DivergenceError(os.str(), t);
    }
  }
  record.series = std::move(recorder.series);
  return record;
}

TrajectoryRecord gd_run_rank_r(const Observation &obs,
                               const SolverConfig &config, Seed seed) {
  const GroundTruth &gt = obs.ground();
  validate_config(config, gt);
  const Factor x0 = init_point(gt.n, gt.rank(), config.beta0, seed);
  return gd_run_from(obs, config, x0, seed);
}

TrajectoryRecord gd_run(const Observation &obs, const SolverConfig &config,
                        Seed seed) {
  require(obs.ground().rank() == 1, "gd_run: rank-1 ground truth required");
  return gd_run_rank_r(obs, config, seed);
}

ScalarDynamics scalar_dynamics(double alpha0, double gamma0, double lambda,
                               double eta, Index T) {
  require(T >= 0, "scalar_dynamics: negative horizon");
  ScalarDynamics out;
  out.alpha.reserve(static_cast<std::size_t>(T) + 1);
  out.gamma.reserve(static_cast<std::size_t>(T) + 1);
  out.beta.reserve(static_cast<std::size_t>(T) + 1);
  double alpha = alpha0;
  double gamma = gamma0;
  for (Index t = 0; t <= T; ++t) {
    const double beta_sq = alpha * alpha + gamma * gamma;
    out.alpha.push_back(alpha);
    out.gamma.push_back(gamma);
    out.beta.push_back(std::sqrt(beta_sq));
    alpha *= 1.0 - eta * beta_sq + eta * lambda;
    gamma *= 1.0 - eta * beta_sq;
  }
  return out;
}

FullObsResult full_obs_run(const GroundTruth &ground, const Vector &x0,
                           double eta, Index T) {
  require(ground.rank() == 1, "full_obs_run: rank-1 ground truth required");
  require(x0.size() == ground.n, "full_obs_run: dimension mismatch");
  require(eta > 0.0, "full_obs_run: step size must be positive");
  require(T >= 0, "full_obs_run: negative horizon");

  const double lambda = ground.lambda_max();
  const Vector u = ground.u_star();

  FullObsResult out;
  out.trajectory.resize(ground.n, T + 1);
  Factor ref = as_factor(x0);
  for (Index t = 0; t <= T; ++t) {
    out.trajectory.col(t) = as_vector(ref);
    if (t < T)
      reference_step(ground, ref, eta);
  }

  const double signal0 = u.dot(x0);
  ClosedFormCoeffs &cf = out.coeffs;
  cf.u_star = u;
  cf.x0_perp = x0 - signal0 * u;
  const double gamma0 = cf.x0_perp.norm();
  out.scalars = scalar_dynamics(std::abs(signal0), gamma0, lambda, eta, T);

  double A = 1.0;
  double B = signal0;
  for (Index t = 0; t <= T; ++t) {
    cf.A.push_back(A);
    cf.B.push_back(B);
    const double beta = out.scalars.beta[static_cast<std::size_t>(t)];
    const double beta_sq = beta * beta;
    A *= 1.0 - eta * beta_sq;
    B *= 1.0 - eta * beta_sq + eta * lambda;
  }
  return out;
}

} // namespace gdmc
