#include "gdmc/oracle.hpp"
#include "gdmc/rng.hpp"
#include "gdmc/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace gdmc;

namespace {

std::shared_ptr<const Observation> instance(Index n, double p, double sigma,
                                            Seed seed,
                                            std::vector<double> ev = {1.0}) {
  auto gt = std::make_shared<const GroundTruth>(
      generate_ground_truth(n, std::move(ev), derive_seed(seed, {1})));
  return std::make_shared<const Observation>(Observation::sample(
      gt, p, sigma, derive_seed(seed, {2}), derive_seed(seed, {3})));
}

} // namespace

TEST_CASE("loss vanishes at the planted solution and its negation") {
  const auto obs = instance(60, 0.3, 0.0, 1);
  const Vector xs = obs->ground().x_star();
  CHECK(std::abs(loss(*obs, xs)) <= 1e-15);
  CHECK(std::abs(loss(*obs, Vector(-xs))) <= 1e-15);
}

TEST_CASE("loss matches the double-loop oracle") {
  for (Seed s = 0; s < 5; ++s) {
    const auto obs = instance(32, 0.3, 0.1, s);
    const Vector x = gaussian_factor(32, 1, 0.2, s + 100).col(0);
    CHECK(std::abs(loss(*obs, x) - oracle::loss(*obs, x)) <= 1e-12);
  }
}

TEST_CASE("gradient at the origin is zero") {
  const auto obs = instance(30, 0.5, 0.1, 2);
  CHECK(gradient(*obs, Vector(Vector::Zero(30))).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient matches central differences") {
  for (Seed s = 0; s < 10; ++s) {
    const auto obs = instance(32, 0.3, 0.1, s + 50);
    const Vector x = gaussian_factor(32, 1, 0.3, s + 60).col(0);
    const Vector g = gradient(*obs, x);
    const Vector fd = oracle::fd_gradient(
        [&](const Vector &v) { return loss(*obs, v); }, x, oracle::fd_step(x));
    for (Index i = 0; i < 32; ++i)
      CHECK(oracle::close(g[i], fd[i], 1e-10, 1e-5));
  }
}

TEST_CASE("full-sampling gradient equals the fully observed gradient") {
  const auto obs = instance(50, 1.0, 0.0, 3);
  const Vector x = gaussian_factor(50, 1, 0.3, 4).col(0);
  const Vector u = obs->ground().u_star();
  const Vector expected = x.squaredNorm() * x - u.dot(x) * u;
  CHECK((gradient(*obs, x) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((Vector(full_gradient(obs->ground(), Factor(x)).col(0)) - expected)
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
  CHECK((gradient_sampling_form(*obs, x) - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("descent once the iterate leaves the origin") {
  const auto obs = instance(200, 0.3, 0.0, 5);
  SolverConfig sc;
  sc.T = 200;
  sc.beta0 = 1e-3;
  sc.record_every = 1;
  const TrajectoryRecord rec = gd_run(*obs, sc, 6);
  Index increases = 0, eligible = 0;
  for (Index t = 0; t + 1 < rec.series.size(); ++t)
    if (rec.series.beta[t] > 10.0 * sc.beta0) {
      ++eligible;
      if (rec.series.loss[t + 1] > rec.series.loss[t] + 1e-15)
        ++increases;
    }
  CHECK(eligible > 0);
  CHECK(increases == 0);
}

TEST_CASE("init_point scale") {
  const double beta0 = 1.0 / 5000.0;
  const double norm = init_point(5000, 1, beta0, 3).norm();
  CHECK(norm >= beta0 / 2.0);
  CHECK(norm <= 1.5 * beta0);

  const Index n = 500;
  const int seeds = 1000;
  double sum = 0.0, sq = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const double v = init_point(n, 1, 1.0, Seed(s)).squaredNorm();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / seeds;
  // ||x0||^2 is beta0^2 chi^2_n / n, variance 2 beta0^4 / n.
  const double sd = std::sqrt(2.0 / double(n) / seeds);
  CHECK(std::abs(mean - 1.0) <= 3.0 * sd);
  CHECK_THROWS_AS(init_point(10, 1, 0.0, 1), std::invalid_argument);
}

TEST_CASE("full observation collapses every sequence") {
  const auto obs = instance(100, 1.0, 0.0, 7);
  SolverConfig sc;
  sc.T = 200;
  sc.beta0 = 0.01;
  sc.record_every = 20;
  sc.loo_indices = {0, 13, 57, 99};
  const TrajectoryRecord rec = gd_run(*obs, sc, 8);
  CHECK(rec.series.size() == 201);
  for (double v : rec.series.dev_ref_inf)
    CHECK(v <= 1e-12);
  for (const auto &track : rec.series.loo)
    for (double v : track.dev)
      CHECK(v == 0.0);
  for (const auto &snap : rec.snapshots)
    for (const auto &l : snap.loo)
      CHECK(l == snap.x);
}

TEST_CASE("sign symmetry of the trajectory") {
  const auto obs = instance(80, 0.3, 0.1, 9);
  SolverConfig sc;
  sc.T = 150;
  sc.record_every = 10;
  sc.loo_indices = {4};
  const Factor x0 = init_point(80, 1, 0.05, 10);
  const TrajectoryRecord a = gd_run_from(*obs, sc, x0);
  const TrajectoryRecord b = gd_run_from(*obs, sc, Factor(-x0));
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    CHECK(b.snapshots[k].x == Factor(-a.snapshots[k].x));
    CHECK(b.snapshots[k].loo[0] == Factor(-a.snapshots[k].loo[0]));
  }
}

TEST_CASE("rank-r run with r = 1 equals the rank-1 run") {
  const auto obs = instance(60, 0.4, 0.05, 11);
  SolverConfig sc;
  sc.T = 100;
  sc.loo_indices = {2, 30};
  const TrajectoryRecord a = gd_run(*obs, sc, 12);
  const TrajectoryRecord b = gd_run_rank_r(*obs, sc, 12);
  CHECK(a.final_state.x == b.final_state.x);
  CHECK(a.series.aligned_l2 == b.series.aligned_l2);
  CHECK(a.series.loo[1].dev == b.series.loo[1].dev);
}

TEST_CASE("fully observed rank-3 run recovers the factor") {
  const auto obs = instance(64, 1.0, 0.0, 13, {1.0, 0.75, 0.5});
  SolverConfig sc;
  sc.T = 500;
  sc.beta0 = 1.0 / 64.0;
  sc.record_every = 100;
  const TrajectoryRecord rec = gd_run_rank_r(*obs, sc, 14);
  CHECK(procrustes_error(rec.final_state.x, obs->ground().factor) < 1e-6);
  CHECK(rec.series.aligned_l2.back() < 1e-6);
}

TEST_CASE("closed form and scalar recursion track the vector recursion") {
  const GroundTruth gt = generate_ground_truth(1000, {1.0}, 15);
  const Vector x0 = init_point(1000, 1, 1e-3, 16).col(0);
  const FullObsResult run = full_obs_run(gt, x0, 0.1, 2000);
  for (Index t = 0; t <= 2000; ++t) {
    const Vector x = run.trajectory.col(t);
    REQUIRE((x - run.coeffs.reconstruct(t)).cwiseAbs().maxCoeff() <= 1e-10);
    const auto k = static_cast<std::size_t>(t);
    const double a = run.scalars.alpha[k], b = run.scalars.beta[k],
                 g = run.scalars.gamma[k];
    REQUIRE(std::abs(b * b - a * a - g * g) <= 1e-10 * b * b);
    const SignalParts parts = signal_decomposition(x, gt.u_star());
    REQUIRE(std::abs(parts.beta - b) <= 1e-10 * b);
  }
}

TEST_CASE("aligned start keeps a zero orthogonal component") {
  const GroundTruth gt = generate_ground_truth(300, {1.0}, 17);
  const FullObsResult run = full_obs_run(gt, Vector(1e-3 * gt.u_star()), 0.1, 300);
  // Zero up to the rounding of x0 - (u*^T x0) u*.
  for (std::size_t t = 0; t < run.scalars.gamma.size(); ++t)
    CHECK(run.scalars.gamma[t] <= 1e-12 * run.scalars.beta[t]);
  CHECK(run.scalars.alpha.back() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("config validation") {
  const GroundTruth gt = generate_ground_truth(20, {1.0}, 1);
  SolverConfig sc;
  CHECK(validate_config(sc, gt).empty());
  sc.eta = 0.2;
  CHECK(validate_config(sc, gt).size() == 1);
  sc.eta = 0.5;
  CHECK_THROWS_AS(validate_config(sc, gt), std::invalid_argument);
  sc.eta = 0.1;
  sc.T = 0;
  CHECK_THROWS_AS(validate_config(sc, gt), std::invalid_argument);
  sc.T = 1;
  sc.loo_indices = {20};
  CHECK_THROWS_AS(validate_config(sc, gt), std::invalid_argument);
}

TEST_CASE("divergence is detected") {
  const auto obs = instance(40, 1.0, 0.0, 18);
  SolverConfig sc;
  sc.T = 50;
  sc.eta = 0.45;
  const Factor x0 = Factor::Constant(40, 1, 20.0);
  try {
    gd_run_from(*obs, sc, x0);
    FAIL("expected divergence");
  } catch (const DivergenceError &e) {
    CHECK(e.last_finite_iteration() >= 0);
  }
}

TEST_CASE("default leave-one-out indices") {
  const GroundTruth gt = generate_ground_truth(100, {1.0}, 19);
  const auto idx = default_loo_indices(gt);
  CHECK(idx.size() >= 8);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  Index arg = 0;
  gt.u_star().cwiseAbs().maxCoeff(&arg);
  CHECK(std::find(idx.begin(), idx.end(), arg) != idx.end());
}

TEST_CASE("leave-one-out sequences stay close at T*") {
  const Index n = 1000;
  Index close = 0, total = 0;
  for (Seed s = 0; s < 50; ++s) {
    const auto obs = instance(n, 0.2, 0.0, 1000 + s);
    const GroundTruth &gt = obs->ground();
    SolverConfig sc;
    sc.beta0 = 1.0 / double(n);
    sc.T = static_cast<Index>(
        std::ceil(predicted_t_star(1.0, sc.eta, n, sc.beta0)));
    sc.record_every = sc.T;
    sc.loo_indices = {0, 500};
    sc.track_loo_signal = false;
    const TrajectoryRecord rec = gd_run(*obs, sc, derive_seed(1000 + s, {4}));
    const double bound = gt.x_star().cwiseAbs().maxCoeff();
    ++total;
    bool ok = true;
    for (const auto &track : rec.series.loo)
      ok = ok && track.dev.back() < bound;
    close += ok;
  }
  MESSAGE("trials with every sampled l close: " << close << "/" << total);
  CHECK(close >= 48);
}
