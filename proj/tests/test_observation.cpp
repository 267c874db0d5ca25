#include "gdmc/observation.hpp"
#include "gdmc/oracle.hpp"
#include "gdmc/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace gdmc;

namespace {

std::shared_ptr<const GroundTruth> model(Index n, Seed seed,
                                         std::vector<double> ev = {1.0}) {
  return std::make_shared<const GroundTruth>(
      generate_ground_truth(n, std::move(ev), seed));
}

Vector random_vector(Index n, Seed seed) {
  return gaussian_factor(n, 1, 1.0 / std::sqrt(double(n)), seed).col(0);
}

double max_diff(const Matrix &a, const Matrix &b) {
  return (a - b).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("full mask holds every unordered pair") {
  const SampleMask mask = SampleMask::sample(10, 1.0, 3);
  CHECK(mask.pair_count() == 55);
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 10; ++j)
      CHECK(mask.contains(i, j));
}

TEST_CASE("pair count is within five binomial deviations") {
  const Index n = 5000;
  const double p = 0.1;
  const SampleMask mask = SampleMask::sample(n, p, 17);
  const double m = double(n) * double(n + 1) / 2.0;
  const double sd = std::sqrt(m * p * (1.0 - p));
  CHECK(std::abs(double(mask.pair_count()) - p * m) <= 5.0 * sd);
}

TEST_CASE("mask matches a scalar reference sampler") {
  const Index n = 50;
  const double p = 0.3;
  const Seed seed = 99;
  const SampleMask mask = SampleMask::sample(n, p, seed);
  Rng rng(seed);
  std::vector<std::pair<Index, Index>> expected;
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j)
      if (rng.uniform() < p)
        expected.emplace_back(i, j);
  CHECK(mask.pairs() == expected);
}

TEST_CASE("mask is symmetric and in range") {
  const SampleMask mask = SampleMask::sample(64, 0.2, 5);
  for (const auto &[i, j] : mask.directed_entries()) {
    CHECK(i >= 0);
    CHECK(j < 64);
    CHECK(mask.contains(j, i));
  }
  const auto ind = oracle::mask_indicator(mask);
  for (Index i = 0; i < 64; ++i)
    for (Index j = 0; j < 64; ++j)
      CHECK(ind(i, j) == ind(j, i));
}

TEST_CASE("from_pairs canonicalizes and deduplicates") {
  const SampleMask mask =
      SampleMask::from_pairs(4, 0.5, 0, {{2, 1}, {1, 2}, {0, 0}, {3, 1}});
  CHECK(mask.pair_count() == 3);
  CHECK(mask.contains(1, 2));
  CHECK(mask.contains(1, 3));
  CHECK_FALSE(mask.contains(0, 1));
  CHECK_THROWS_AS(SampleMask::from_pairs(4, 0.5, 0, {{0, 4}}),
                  std::out_of_range);
}

TEST_CASE("noise is zero at sigma 0 and scales with sigma") {
  const SampleMask mask = SampleMask::sample(30, 0.5, 1);
  const NoiseField zero = NoiseField::generate(mask, 0.0, 2);
  for (double v : zero.values())
    CHECK(v == 0.0);
  const NoiseField a = NoiseField::generate(mask, 0.1, 2);
  const NoiseField b = NoiseField::generate(mask, 0.2, 2);
  CHECK(a.values().size() == static_cast<std::size_t>(mask.pair_count()));
  for (Index k = 0; k < mask.pair_count(); ++k)
    CHECK(b[k] == 2.0 * a[k]);
}

TEST_CASE("observed_product at full sampling is ||x||^2 x") {
  const SampleMask mask = SampleMask::sample(40, 1.0, 0);
  const Vector x = random_vector(40, 8);
  CHECK(max_diff(observed_product(mask, x), x.squaredNorm() * x) <= 1e-12);
  CHECK(observed_product(mask, Vector(Vector::Zero(40))).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("masked operators match dense oracles") {
  for (double p : {0.3, 1.0})
    for (double sigma : {0.0, 0.1}) {
      auto gt = model(32, 4);
      const Observation obs = Observation::sample(gt, p, sigma, 10, 11);
      const Vector x = random_vector(32, 12);
      const Matrix X = x;
      const auto xx = oracle::outer(X);
      CHECK(max_diff(observed_product(obs.mask(), x),
                     oracle::multiply(oracle::scaled_projection(obs.mask(), xx), X)) <=
            1e-12);
      CHECK(max_diff(mo_product(obs, x),
                     oracle::multiply(oracle::observed_matrix(obs), X)) <= 1e-12);
      for (Index l = 0; l < 32; ++l) {
        CHECK(max_diff(loo_product(obs.mask(), l, x),
                       oracle::multiply(oracle::loo_projection(obs.mask(), l, xx),
                                        X)) <= 1e-12);
        CHECK(max_diff(loo_mo_product(obs, l, x),
                       oracle::multiply(oracle::loo_matrix(obs, l), X)) <= 1e-12);
      }
    }
}

TEST_CASE("mo_product without noise at full sampling is M* x") {
  auto gt = model(50, 2);
  const Observation obs = Observation::sample(gt, 1.0, 0.0, 1, 2);
  const Vector x = random_vector(50, 3);
  const Vector u = gt->u_star();
  CHECK(max_diff(mo_product(obs, x), gt->lambda_max() * u.dot(x) * u) <= 1e-12);
  for (Index l : {Index{0}, Index{17}, Index{49}}) {
    CHECK(max_diff(loo_product(obs.mask(), l, x), observed_product(obs.mask(), x)) <=
          1e-12);
    CHECK(max_diff(loo_mo_product(obs, l, x), mo_product(obs, x)) <= 1e-12);
  }
}

TEST_CASE("mo_product on u* stays within the sampling bound") {
  const Index n = 1000;
  const double p = 0.1;
  auto gt = model(n, 21);
  const Observation obs = Observation::sample(gt, p, 0.0, 22, 23);
  const Vector u = gt->u_star();
  const double dev = (mo_product(obs, u) - gt->lambda_max() * u).norm();
  const double bound = gt->lambda_max() * gt->mu *
                       std::sqrt(std::log(double(n)) / (double(n) * p));
  MESSAGE("||M^o u* - lambda u*|| / bound = " << dev / bound);
  CHECK(dev <= 10.0 * bound);
}

TEST_CASE("loo_product on row l uses exact values") {
  // Row 0 observed only on the diagonal.
  const SampleMask mask =
      SampleMask::from_pairs(6, 0.25, 0, {{0, 0}, {1, 2}, {3, 4}, {2, 5}});
  Vector x = Vector::Zero(6);
  x[0] = 1.0;
  const Vector row = loo_product(mask, 0, x);
  // P^(0)(x x^T) x with x = e_0: only the exact (0, 0) entry survives.
  CHECK(row[0] == 1.0);
  for (Index i = 1; i < 6; ++i)
    CHECK(row[i] == 0.0);
  Vector y = random_vector(6, 4);
  const Matrix Y = y;
  const Matrix dense =
      oracle::multiply(oracle::loo_projection(mask, 0, oracle::outer(Y)), Y);
  CHECK(max_diff(loo_product(mask, 0, y), dense) <= 1e-14);
}

TEST_CASE("row norm estimates") {
  const SampleMask full = SampleMask::sample(20, 1.0, 0);
  const Vector x = random_vector(20, 1);
  for (Index i = 0; i < 20; ++i)
    CHECK(std::abs(row_norm_estimate(full, x, i) - x.norm()) <= 1e-14);

  const SampleMask mask = SampleMask::from_pairs(5, 0.2, 0, {{1, 3}, {0, 0}});
  Vector e = Vector::Zero(5);
  e[3] = -2.0;
  CHECK(row_norm_estimate(mask, e, 1) == doctest::Approx(std::sqrt(1.0 / 0.2) * 2.0));

  const SampleMask random = SampleMask::sample(64, 0.3, 8);
  const Vector z = random_vector(64, 9);
  CHECK(max_diff(row_norm_estimates(random, z), oracle::row_norms(random, z)) <=
        1e-12);
  for (Index i = 0; i < 64; ++i)
    CHECK(std::abs(row_norm_estimate(random, z, i) - oracle::row_norms(random, z)[i]) <=
          1e-12);
}

TEST_CASE("linearity and cubic homogeneity") {
  auto gt = model(48, 6);
  const Observation obs = Observation::sample(gt, 0.3, 0.1, 7, 8);
  const Vector x = random_vector(48, 1), y = random_vector(48, 2);
  const double a = 1.7, b = -0.6, c = -2.5;
  CHECK(max_diff(mo_product(obs, Vector(a * x + b * y)),
                 a * mo_product(obs, x) + b * mo_product(obs, y)) <= 1e-12);
  CHECK(max_diff(loo_mo_product(obs, 5, Vector(a * x + b * y)),
                 a * loo_mo_product(obs, 5, x) + b * loo_mo_product(obs, 5, y)) <=
        1e-12);
  CHECK(max_diff(observed_product(obs.mask(), Vector(c * x)),
                 c * c * c * observed_product(obs.mask(), x)) <= 1e-12);
}

TEST_CASE("implied operator matrices are symmetric") {
  auto gt = model(24, 3);
  const Observation obs = Observation::sample(gt, 0.4, 0.1, 4, 5);
  const Vector x = random_vector(24, 6);
  // Column k of each operator is its image of e_k.
  Matrix mo(24, 24), loo(24, 24), hess(24, 24);
  for (Index k = 0; k < 24; ++k) {
    Vector e = Vector::Zero(24);
    e[k] = 1.0;
    mo.col(k) = mo_product(obs, e);
    loo.col(k) = loo_mo_product(obs, 3, e);
    hess.col(k) = masked_quartic_hessian_product(obs.mask(), x, e);
  }
  CHECK(max_diff(mo, mo.transpose()) <= 1e-12);
  CHECK(max_diff(loo, loo.transpose()) <= 1e-12);
  CHECK(max_diff(hess, hess.transpose()) <= 1e-12);
}

TEST_CASE("dimension and index errors") {
  auto gt = model(10, 1);
  const Observation obs = Observation::sample(gt, 0.5, 0.0, 1, 2);
  CHECK_THROWS_AS(mo_product(obs, Vector(Vector::Zero(9))), std::invalid_argument);
  CHECK_THROWS_AS(loo_product(obs.mask(), 10, Vector(Vector::Zero(10))),
                  std::out_of_range);
  CHECK_THROWS_AS(SampleMask::sample(10, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(SampleMask::sample(10, 1.5, 1), std::invalid_argument);
}

TEST_CASE("residual product agrees with its parts") {
  auto gt = model(40, 2, {1.0, 0.5});
  const Observation obs = Observation::sample(gt, 0.3, 0.05, 3, 4);
  const Factor X = gaussian_factor(40, 2, 0.2, 5);
  double f = 0.0;
  const Factor r = masked_residual_product(obs, X, &f);
  const Matrix expected = Matrix(observed_product(obs.mask(), X)) - mo_product(obs, Matrix(X));
  CHECK(max_diff(r, expected) <= 1e-12);
  CHECK(std::abs(f - oracle::loss(obs, X)) <= 1e-12);
  const Matrix loo_expected =
      Matrix(loo_product(obs.mask(), 7, X)) - loo_mo_product(obs, 7, Matrix(X));
  CHECK(max_diff(loo_residual_product(obs, 7, X), loo_expected) <= 1e-12);
}
