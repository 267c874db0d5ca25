#ifndef GDMC_OBSERVATION_HPP
#define GDMC_OBSERVATION_HPP

#include "gdmc/ground_truth.hpp"

#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace gdmc {

/// Symmetric Bernoulli(p) sample set Omega over the upper triangle including
/// the diagonal. Each unordered pair {i, j} is stored once; pair k is the
/// k-th entry in row-major upper-triangle order.
///
/// Indices are 0-based throughout.
class SampleMask {
public:
  SampleMask() = default;

  /// Draws delta_ij ~ Bernoulli(p) for i <= j in row-major order from one
  /// stream. p == 1 yields the full index set without consuming randomness.
  static SampleMask sample(Index n, double p, Seed seed);

  /// Builds a mask from explicit pairs (either orientation accepted). Pairs
  /// are canonicalized to i <= j, sorted and deduplicated.
  static SampleMask from_pairs(Index n, double p, Seed seed,
                               std::vector<std::pair<Index, Index>> pairs);

  Index n() const { return n_; }
  double p() const { return p_; }
  Seed seed() const { return seed_; }

  /// Number of stored unordered pairs (diagonal included).
  Index pair_count() const { return static_cast<Index>(upper_cols_.size()); }

  /// Columns j >= i observed in row i, sorted.
  std::span<const Index> upper_row(Index i) const {
    return {upper_cols_.data() + upper_start_[i],
            upper_cols_.data() + upper_start_[i + 1]};
  }
  /// Pair index of the first entry of upper_row(i).
  Index upper_offset(Index i) const { return upper_start_[i]; }

  /// All j with (i, j) in Omega, sorted. Adjacency for both orientations.
  std::span<const Index> neighbors(Index i) const {
    return {adj_cols_.data() + adj_start_[i],
            adj_cols_.data() + adj_start_[i + 1]};
  }

  bool contains(Index i, Index j) const;

  /// Canonical (i <= j) pair list in storage order.
  std::vector<std::pair<Index, Index>> pairs() const;

  /// Ordered (i, j) list built from the adjacency lists; a symmetric mask
  /// yields each off-diagonal pair in both orientations.
  std::vector<std::pair<Index, Index>> directed_entries() const;

  /// f(k, i, j) for every stored pair with i <= j, in storage order.
  template <class F> void for_each_pair(F &&f) const {
    for (Index i = 0; i < n_; ++i)
      for (Index k = upper_start_[i]; k < upper_start_[i + 1]; ++k)
        f(k, i, upper_cols_[static_cast<std::size_t>(k)]);
  }

private:
  SampleMask(Index n, double p, Seed seed, std::vector<Index> upper_start,
             std::vector<Index> upper_cols);
  void build_adjacency();

  Index n_ = 0;
  double p_ = 1.0;
  Seed seed_ = 0;
  std::vector<Index> upper_start_{0};
  std::vector<Index> upper_cols_;
  std::vector<Index> adj_start_{0};
  std::vector<Index> adj_cols_;
};

/// Symmetric Gaussian noise E_ij = E_ji ~ N(0, sigma^2), stored only on the
/// observed pairs and aligned with the mask's pair indices.
class NoiseField {
public:
  NoiseField() = default;

  /// Values drawn in mask pair order from a dedicated stream. sigma == 0
  /// gives an all-zero field without consuming randomness.
  static NoiseField generate(const SampleMask &mask, double sigma, Seed seed);

  double sigma() const { return sigma_; }
  Seed seed() const { return seed_; }
  std::span<const double> values() const { return values_; }
  double operator[](Index pair) const {
    return values_[static_cast<std::size_t>(pair)];
  }

private:
  double sigma_ = 0.0;
  Seed seed_ = 0;
  std::vector<double> values_;
};

/// The observed matrix M^o = (1/p) P_Omega(M* + E), held in operator form.
/// Immutable after construction and safe to share across threads.
class Observation {
public:
  Observation(std::shared_ptr<const GroundTruth> ground, SampleMask mask,
              NoiseField noise);

  static Observation sample(std::shared_ptr<const GroundTruth> ground,
                            double p, double sigma, Seed mask_seed,
                            Seed noise_seed);

  const GroundTruth &ground() const { return *ground_; }
  std::shared_ptr<const GroundTruth> ground_ptr() const { return ground_; }
  const SampleMask &mask() const { return mask_; }
  const NoiseField &noise() const { return noise_; }
  Index n() const { return mask_.n(); }
  double p() const { return mask_.p(); }

  /// M*_ij for stored pair k.
  double planted(Index pair) const {
    return planted_[static_cast<std::size_t>(pair)];
  }

private:
  std::shared_ptr<const GroundTruth> ground_;
  SampleMask mask_;
  NoiseField noise_;
  std::vector<double> planted_;
};

// Masked operators. Every product is a single sequential pass over the
// stored pairs with symmetric accumulation, so results are bitwise
// reproducible. Cost O(|Omega| r).

/// (1/p) P_Omega(X X^T) X.
Factor observed_product(const SampleMask &mask, const Factor &X);
Vector observed_product(const SampleMask &mask, const Vector &x);

/// M^o V for any n x k block V.
Matrix mo_product(const Observation &obs, const Matrix &V);
Vector mo_product(const Observation &obs, const Vector &x);

/// P^(l)_Omega(X X^T) X: exact values on row/column l, (1/p) P_Omega elsewhere.
Factor loo_product(const SampleMask &mask, Index l, const Factor &X);
Vector loo_product(const SampleMask &mask, Index l, const Vector &x);

/// M^(l) V with M^(l) = P^(l)_Omega(M*) + E^(l); E^(l) is (1/p) P_Omega(E)
/// with row and column l zeroed.
Matrix loo_mo_product(const Observation &obs, Index l, const Matrix &V);
Vector loo_mo_product(const Observation &obs, Index l, const Vector &x);

/// ||x||_{2,i} = sqrt((1/p) sum_j delta_ij x_j^2).
double row_norm_estimate(const SampleMask &mask, const Vector &x, Index i);
/// All n row-norm estimates.
Vector row_norm_estimates(const SampleMask &mask, const Vector &x);
/// Diagonal of I_x = diag(||x||_{2,i}^2) / ||x||^2.
Vector sampling_weights(const SampleMask &mask, const Vector &x);

/// g(x) = (1/4p) ||P_Omega(x x^T)||_F^2.
double masked_quartic(const SampleMask &mask, const Vector &x);
/// Hessian of g applied to v: ||x||^2 I_x v + (2/p) P_Omega(x x^T) v.
Vector masked_quartic_hessian_product(const SampleMask &mask, const Vector &x,
                                      const Vector &v);

/// Residual product (1/p) P_Omega(X X^T - M* - E) X, i.e. the gradient of the
/// observed loss. If `loss` is non-null it receives the loss value at X.
Factor masked_residual_product(const Observation &obs, const Factor &X,
                               double *loss = nullptr);

/// Leave-one-out residual P^(l)(X X^T) X - M^(l) X.
Factor loo_residual_product(const Observation &obs, Index l, const Factor &X);

} // namespace gdmc

#endif // GDMC_OBSERVATION_HPP
