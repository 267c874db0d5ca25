#include "gdmc/oracle.hpp"
#include "gdmc/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace gdmc;

TEST_CASE("full projection is the identity") {
  const SampleMask mask = SampleMask::sample(12, 1.0, 0);
  const Matrix G = gaussian_factor(12, 12, 1.0, 1);
  const auto A = oracle::DenseMatrix::from(G + G.transpose());
  const auto P = oracle::scaled_projection(mask, A);
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j)
      CHECK(P(i, j) == A(i, j));
}

TEST_CASE("leave-one-out projection by construction") {
  const SampleMask mask = SampleMask::sample(16, 0.3, 2);
  const Matrix G = gaussian_factor(16, 16, 1.0, 3);
  const auto A = oracle::DenseMatrix::from(G + G.transpose());
  const Index l = 5;
  const auto P = oracle::loo_projection(mask, l, A);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j) {
      if (i == l || j == l)
        CHECK(P(i, j) == A(i, j));
      else
        CHECK(P(i, j) == (mask.contains(i, j) ? A(i, j) / 0.3 : 0.0));
    }
}

TEST_CASE("two loop orders agree") {
  const Matrix G = gaussian_factor(32, 32, 1.0, 4);
  const auto A = oracle::DenseMatrix::from(G + G.transpose());
  const Matrix X = gaussian_factor(32, 2, 1.0, 5);
  CHECK((oracle::multiply(A, X) - oracle::multiply_by_columns(A, X))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("finite differences of a quadratic") {
  const Vector x = gaussian_factor(10, 1, 1.0, 6).col(0);
  const Vector fd = oracle::fd_gradient(
      [](const Vector &v) { return v.squaredNorm(); }, x, 1e-6);
  for (Index i = 0; i < 10; ++i)
    CHECK(std::abs(fd[i] - 2.0 * x[i]) <= 1e-8 * std::max(1.0, std::abs(2.0 * x[i])));
}

TEST_CASE("finite differences at the origin of the loss") {
  auto gt = std::make_shared<const GroundTruth>(generate_ground_truth(32, {1.0}, 7));
  const Observation obs = Observation::sample(gt, 0.3, 0.1, 8, 9);
  const Vector x = Vector::Zero(32);
  const double h = oracle::fd_step(x);
  CHECK(h == 1e-6);
  const Vector fd =
      oracle::fd_gradient([&](const Vector &v) { return oracle::loss(obs, v); }, x, h);
  for (Index i = 0; i < 32; ++i)
    CHECK(std::abs(fd[i]) <= 1e-6);
}

TEST_CASE("mixed tolerance comparison") {
  CHECK(oracle::close(1.0, 1.0 + 5e-6, 1e-10, 1e-5));
  CHECK_FALSE(oracle::close(1.0, 1.0 + 5e-5, 1e-10, 1e-5));
  CHECK(oracle::close(0.0, 5e-11, 1e-10, 1e-5));
}

TEST_CASE("Jacobi on a diagonal matrix") {
  oracle::DenseMatrix D(4, 4);
  D(0, 0) = 2.0;
  D(1, 1) = -1.0;
  D(2, 2) = 5.0;
  D(3, 3) = 0.5;
  const auto res = oracle::jacobi_eigen(D);
  CHECK(res.eigenvalues[0] == 5.0);
  CHECK(res.eigenvalues[1] == 2.0);
  CHECK(res.eigenvalues[2] == 0.5);
  CHECK(res.eigenvalues[3] == -1.0);
  for (Index k = 0; k < 4; ++k)
    CHECK(res.eigenvectors.col(k).cwiseAbs().maxCoeff() == 1.0);
}

TEST_CASE("Jacobi on a rank-1 planted matrix") {
  const GroundTruth gt = generate_ground_truth(32, {1.0}, 10);
  const auto res = oracle::jacobi_eigen(oracle::planted(gt));
  CHECK(std::abs(res.eigenvalues[0] - 1.0) <= 1e-12);
  for (Index k = 1; k < 32; ++k)
    CHECK(std::abs(res.eigenvalues[k]) <= 1e-10);
}

TEST_CASE("Jacobi reconstruction") {
  const Matrix G = gaussian_factor(16, 16, 1.0, 11);
  const Matrix A = G + G.transpose();
  const auto res = oracle::jacobi_eigen(oracle::DenseMatrix::from(A));
  const Matrix R = res.eigenvectors * res.eigenvalues.asDiagonal() *
                   res.eigenvectors.transpose();
  CHECK((R - A).cwiseAbs().maxCoeff() <= 1e-8);
  for (Index k = 1; k < 16; ++k)
    CHECK(res.eigenvalues[k] <= res.eigenvalues[k - 1]);
}

TEST_CASE("oracle guards") {
  oracle::DenseMatrix A(3, 3);
  A(0, 1) = 1.0;
  CHECK_THROWS_AS(oracle::jacobi_eigen(A), std::invalid_argument);
  const SampleMask big = SampleMask::sample(600, 1e-4, 1);
  CHECK_THROWS_AS(oracle::mask_indicator(big), std::invalid_argument);
}

TEST_CASE("noise oracle is symmetric and observed-only") {
  auto gt = std::make_shared<const GroundTruth>(generate_ground_truth(20, {1.0}, 12));
  const Observation obs = Observation::sample(gt, 0.4, 0.2, 13, 14);
  const auto E = oracle::noise(obs);
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 20; ++j) {
      CHECK(E(i, j) == E(j, i));
      if (!obs.mask().contains(i, j))
        CHECK(E(i, j) == 0.0);
    }
}
