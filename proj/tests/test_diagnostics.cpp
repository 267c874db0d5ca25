#include "gdmc/oracle.hpp"
#include "gdmc/rng.hpp"
#include "gdmc/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace gdmc;

namespace {

Matrix random_rotation(Index r, Seed seed) {
  return orthonormalize(gaussian_factor(r, r, 1.0, seed));
}

} // namespace

TEST_CASE("signal decomposition limits") {
  const GroundTruth gt = generate_ground_truth(100, {1.0}, 1);
  const Vector u = gt.u_star();
  SignalParts s = signal_decomposition(Vector(-3.0 * u), u);
  CHECK(s.alpha == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.beta == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.gamma <= 1e-13);

  Vector v = gaussian_factor(100, 1, 1.0, 2).col(0);
  v -= u.dot(v) * u;
  s = signal_decomposition(v, u);
  CHECK(s.alpha <= 1e-14);
  CHECK(s.gamma == doctest::Approx(v.norm()).epsilon(1e-14));
}

TEST_CASE("signal decomposition matches a dense projector") {
  const GroundTruth gt = generate_ground_truth(100, {1.0}, 3);
  const Vector u = gt.u_star();
  const Vector x = gaussian_factor(100, 1, 1.0, 4).col(0);
  const Matrix P = Matrix::Identity(100, 100) - u * u.transpose();
  const SignalParts s = signal_decomposition(x, u);
  CHECK(std::abs(s.alpha - std::abs((u.transpose() * x)(0))) <= 1e-12);
  CHECK(std::abs(s.gamma - (P * x).norm()) <= 1e-12);
  CHECK(std::abs(s.beta * s.beta - s.alpha * s.alpha - s.gamma * s.gamma) <=
        1e-10 * s.beta * s.beta);
  CHECK_THROWS_AS(signal_decomposition(x, Vector(2.0 * u)), std::invalid_argument);
}

TEST_CASE("aligned error") {
  const Vector xs = gaussian_factor(30, 1, 1.0, 5).col(0);
  CHECK(aligned_error(Vector(-xs), xs) == 0.0);
  CHECK(aligned_error(Vector(Vector::Zero(30)), xs) == doctest::Approx(xs.norm()));
  CHECK(aligned_error(Vector(Vector::Zero(30)), xs, NormKind::Inf) ==
        xs.cwiseAbs().maxCoeff());
  const Vector x = gaussian_factor(30, 1, 1.0, 6).col(0);
  const double l2 = std::min((x - xs).norm(), (x + xs).norm());
  const double inf =
      std::min((x - xs).cwiseAbs().maxCoeff(), (x + xs).cwiseAbs().maxCoeff());
  CHECK(aligned_error(x, xs) == l2);
  CHECK(aligned_error(x, xs, NormKind::Inf) == inf);
  CHECK(aligned_error(Vector(-x), xs) == aligned_error(x, xs));
}

TEST_CASE("incoherence track") {
  Vector e = Vector::Zero(50);
  e[0] = 1.0;
  CHECK(incoherence_track(e) == 50.0);
  const Vector flat = Vector::Constant(50, 1.0 / std::sqrt(50.0));
  CHECK(incoherence_track(flat) == doctest::Approx(1.0).epsilon(1e-14));
  const Vector x = gaussian_factor(50, 1, 1.0, 7).col(0);
  CHECK(incoherence_track(Vector(-4.2 * x)) ==
        doctest::Approx(incoherence_track(x)).epsilon(1e-14));
}

TEST_CASE("procrustes error") {
  const Matrix X = gaussian_factor(32, 3, 1.0, 8);
  const Matrix R0 = random_rotation(3, 9);
  CHECK(procrustes_error(Matrix(X * R0), X) <= 1e-10);

  const Matrix Y = gaussian_factor(32, 3, 1.0, 10);
  const Matrix R1 = random_rotation(3, 11);
  CHECK(std::abs(procrustes_error(Matrix(X * R1), Y) - procrustes_error(X, Y)) <=
        1e-10);

  const Vector a = gaussian_factor(32, 1, 1.0, 12).col(0);
  const Vector b = gaussian_factor(32, 1, 1.0, 13).col(0);
  CHECK(std::abs(procrustes_error(Matrix(a), Matrix(b)) - aligned_error(a, b)) <=
        1e-12);

  const Matrix Z = X * R0 + gaussian_factor(32, 3, 0.5, 14);
  const double best = procrustes_error(X, Z);
  double sampled = INFINITY;
  Rng rng(15);
  for (int k = 0; k < 100000; ++k)
    sampled = std::min(sampled,
                       (X * random_rotation(3, rng.next_u64()) - Z).norm());
  CHECK(best <= sampled);
  MESSAGE("procrustes " << best << " vs sampled minimum " << sampled);
}

TEST_CASE("singular values") {
  const Matrix X = gaussian_factor(40, 3, 1.0, 16);
  const Vector s = singular_values(X);
  const Matrix XtX = X.transpose() * X;
  const oracle::JacobiResult jac = oracle::jacobi_eigen(oracle::DenseMatrix::from(XtX));
  for (Index k = 0; k < 3; ++k)
    CHECK(s[k] == doctest::Approx(std::sqrt(jac.eigenvalues[k])).epsilon(1e-10));
}

TEST_CASE("top eigenpair of the planted matrix") {
  const GroundTruth gt = generate_ground_truth(200, {1.5}, 17);
  PowerOptions po;
  const EigenPair ep =
      top_eigenpair([&](const Vector &v) { return Vector(gt.apply(v)); }, 200, po);
  CHECK(std::abs(ep.lambda - 1.5) <= po.tol * 1.5);
  CHECK(aligned_error(ep.v, gt.u_star()) <= 1e-6);

  auto shared = std::make_shared<const GroundTruth>(gt);
  const Observation obs = Observation::sample(shared, 1.0, 0.0, 1, 2);
  const EigenPair full =
      top_eigenpair([&](const Vector &v) { return mo_product(obs, v); }, 200, po);
  CHECK(std::abs(full.lambda - 1.5) <= po.tol * 1.5);
}

TEST_CASE("top eigenpair matches Jacobi on a random symmetric matrix") {
  const Matrix G = gaussian_factor(32, 32, 1.0, 18);
  Matrix A = G + G.transpose();
  // Separate the top of the spectrum.
  const Vector w = gaussian_factor(32, 1, 1.0, 19).col(0).normalized();
  A += 30.0 * w * w.transpose();
  const oracle::JacobiResult jac = oracle::jacobi_eigen(oracle::DenseMatrix::from(A));
  PowerOptions po;
  const EigenPair ep = top_eigenpair([&](const Vector &v) { return Vector(A * v); },
                                     32, po);
  CHECK(std::abs(ep.lambda - jac.eigenvalues[0]) <=
        10.0 * po.tol * std::abs(jac.eigenvalues[0]));
  const Vector u = jac.eigenvectors.col(0);
  CHECK(std::min((ep.v - u).norm(), (ep.v + u).norm()) <= 1e-6);
}

TEST_CASE("power iteration reports non-convergence") {
  // Rotation by 90 degrees has no real dominant eigenvector.
  PowerOptions po;
  po.max_iter = 50;
  const auto op = [](const Vector &v) {
    Vector out(2);
    out << -v[1], v[0];
    return out;
  };
  CHECK_THROWS_AS(top_eigenpair(op, 2, po), ConvergenceError);
}

TEST_CASE("spectral report consistency") {
  auto gt = std::make_shared<const GroundTruth>(generate_ground_truth(300, {1.0}, 20));
  const Observation obs = Observation::sample(gt, 0.2, 0.0, 21, 22);
  const SpectralReport rep = spectral_report(obs, {0, 150});
  CHECK(rep.weyl_consistent(1.0));
  CHECK(rep.h_norm > 0.0);
  CHECK(rep.bound_ratio == doctest::Approx(rep.h_norm / rep.bound));
  REQUIRE(rep.loo.size() == 2);
  for (const auto &l : rep.loo) {
    CHECK(l.u.dot(gt->u_star()) >= 0.0);
    CHECK(l.u_dist == doctest::Approx((l.u - gt->u_star()).norm()));
  }
  // Dense check of ||M^o - M*|| at this size.
  oracle::DenseMatrix h = oracle::observed_matrix(obs);
  const oracle::DenseMatrix star = oracle::planted(*gt);
  for (Index i = 0; i < 300; ++i)
    for (Index j = 0; j < 300; ++j)
      h(i, j) -= star(i, j);
  const Matrix H = h.to_eigen();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  CHECK(rep.h_norm == doctest::Approx(es.eigenvalues().cwiseAbs().maxCoeff())
                          .epsilon(1e-6));
}

TEST_CASE("predicted T* follows the closed-form expression") {
  const double t = predicted_t_star(1.0, 0.1, 5000, 1.0 / 5000.0);
  CHECK(t == doctest::Approx(std::log(std::sqrt(5000.0) * 5000.0) / std::log(1.1)));
}

TEST_CASE("phase boundaries on an aligned fully observed run") {
  const Index n = 1000;
  const double beta0 = 1e-3;
  auto gt = std::make_shared<const GroundTruth>(generate_ground_truth(n, {1.0}, 23));
  const Observation obs = Observation::sample(gt, 1.0, 0.0, 1, 2);
  SolverConfig sc;
  sc.T = 400;
  sc.beta0 = beta0;
  sc.record_every = 400;
  const Factor x0 = Factor(beta0 * gt->u_star());
  const TrajectoryRecord rec = gd_run_from(obs, sc, x0);
  const PhaseReport rep = phase_boundaries(rec.series, *gt, sc.eta, beta0, 1.0);

  // Scalar recursion oracle for the same start.
  const ScalarDynamics sd = scalar_dynamics(beta0, 0.0, 1.0, sc.eta, sc.T);
  const double logn = std::log(double(n));
  std::optional<Index> t2p, t2;
  for (std::size_t t = 0; t < sd.beta.size(); ++t) {
    const double b2 = sd.beta[t] * sd.beta[t];
    if (!t2p && b2 > 1.0 / (64.0 * logn))
      t2p = Index(t);
    if (!t2 && b2 > 1.0 - 1.0 / logn)
      t2 = Index(t);
  }
  REQUIRE(rep.t2_prime_emp);
  REQUIRE(rep.t2_emp);
  CHECK(*rep.t2_prime_emp == *t2p);
  CHECK(*rep.t2_emp == *t2);
  CHECK(*rep.t2_prime_emp <= *rep.t2_emp);
  CHECK(rep.t1_vacuous);
}

TEST_CASE("one-step run detects nothing") {
  auto gt = std::make_shared<const GroundTruth>(generate_ground_truth(100, {1.0}, 24));
  const Observation obs = Observation::sample(gt, 0.5, 0.0, 1, 2);
  SolverConfig sc;
  sc.T = 1;
  sc.beta0 = 0.01;
  const TrajectoryRecord rec = gd_run(obs, sc, 3);
  const PhaseReport rep = phase_boundaries(rec.series, *gt, sc.eta, sc.beta0, 0.5);
  CHECK_FALSE(rep.t2_emp);
  CHECK_FALSE(rep.t2_prime_emp);
  CHECK_FALSE(rep.t_star_emp);
}

TEST_CASE("series invariants along a sampled run") {
  auto gt = std::make_shared<const GroundTruth>(generate_ground_truth(300, {1.0}, 25));
  const Observation obs = Observation::sample(gt, 0.2, 0.001, 26, 27);
  SolverConfig sc;
  sc.T = 250;
  sc.beta0 = 1.0 / 300.0;
  sc.loo_indices = {1, 2};
  const TrajectoryRecord rec = gd_run(obs, sc, 28);
  const auto &s = rec.series;
  for (Index t = 0; t < s.size(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    CHECK(std::abs(s.beta[k] * s.beta[k] - s.alpha[k] * s.alpha[k] -
                   s.gamma[k] * s.gamma[k]) <= 1e-10 * s.beta[k] * s.beta[k]);
    CHECK(s.aligned_l2[k] >= 0.0);
    CHECK(s.aligned_inf[k] <= s.aligned_l2[k]);
    CHECK(s.dev_ref_inf[k] <= s.dev_ref_l2[k] + 1e-15);
  }
}
