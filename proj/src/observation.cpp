#include "gdmc/observation.hpp"

#include "gdmc/rng.hpp"

#include <algorithm>
#include <cmath>

namespace gdmc {

// ---------------------------------------------------------------------------
// SampleMask

SampleMask::SampleMask(Index n, double p, Seed seed,
                       std::vector<Index> upper_start,
                       std::vector<Index> upper_cols)
    : n_(n), p_(p), seed_(seed), upper_start_(std::move(upper_start)),
      upper_cols_(std::move(upper_cols)) {
  build_adjacency();
}

void SampleMask::build_adjacency() {
  std::vector<Index> degree(static_cast<std::size_t>(n_), 0);
  for_each_pair([&](Index, Index i, Index j) {
    ++degree[static_cast<std::size_t>(i)];
    if (i != j)
      ++degree[static_cast<std::size_t>(j)];
  });
  adj_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (Index i = 0; i < n_; ++i)
    adj_start_[i + 1] = adj_start_[i] + degree[static_cast<std::size_t>(i)];
  adj_cols_.assign(static_cast<std::size_t>(adj_start_.back()), 0);
  std::vector<Index> fill(adj_start_.begin(), adj_start_.end() - 1);
  // Visiting rows in order appends lower entries (j < i) before the upper
  // ones, so each adjacency list comes out sorted.
  for_each_pair([&](Index, Index i, Index j) {
    if (i != j)
      adj_cols_[static_cast<std::size_t>(fill[j]++)] = i;
  });
  for_each_pair([&](Index, Index i, Index j) {
    adj_cols_[static_cast<std::size_t>(fill[i]++)] = j;
  });
  for (Index i = 0; i < n_; ++i) {
    auto first = adj_cols_.begin() + adj_start_[i];
    auto last = adj_cols_.begin() + adj_start_[i + 1];
    std::sort(first, last);
  }
}

SampleMask SampleMask::sample(Index n, double p, Seed seed) {
  require(n >= 1, "mask dimension must be positive");
  require(p > 0.0 && p <= 1.0, "sampling probability must lie in (0, 1]");
  std::vector<Index> start{0};
  std::vector<Index> cols;
  start.reserve(static_cast<std::size_t>(n) + 1);
  const double expected = p * static_cast<double>(n) * (n + 1) / 2.0;
  cols.reserve(static_cast<std::size_t>(expected * 1.05 + 16));
  if (p == 1.0) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = i; j < n; ++j)
        cols.push_back(j);
      start.push_back(static_cast<Index>(cols.size()));
    }
  } else {
    Rng rng(seed);
    for (Index i = 0; i < n; ++i) {
      for (Index j = i; j < n; ++j)
        if (rng.uniform() < p)
          cols.push_back(j);
      start.push_back(static_cast<Index>(cols.size()));
    }
  }
  return SampleMask(n, p, seed, std::move(start), std::move(cols));
}

SampleMask SampleMask::from_pairs(Index n, double p, Seed seed,
                                  std::vector<std::pair<Index, Index>> pairs) {
  require(n >= 1, "mask dimension must be positive");
  require(p > 0.0 && p <= 1.0, "sampling probability must lie in (0, 1]");
  for (auto &[i, j] : pairs) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw std::out_of_range("mask pair out of range");
    if (i > j)
      std::swap(i, j);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<Index> start(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> cols;
  cols.reserve(pairs.size());
  for (const auto &[i, j] : pairs) {
    ++start[static_cast<std::size_t>(i) + 1];
    cols.push_back(j);
  }
  for (Index i = 0; i < n; ++i)
    start[i + 1] += start[i];
  return SampleMask(n, p, seed, std::move(start), std::move(cols));
}

bool SampleMask::contains(Index i, Index j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_)
    return false;
  if (i > j)
    std::swap(i, j);
  const auto row = upper_row(i);
  return std::binary_search(row.begin(), row.end(), j);
}

std::vector<std::pair<Index, Index>> SampleMask::pairs() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(upper_cols_.size());
  for_each_pair([&](Index, Index i, Index j) { out.emplace_back(i, j); });
  return out;
}

std::vector<std::pair<Index, Index>> SampleMask::directed_entries() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(adj_cols_.size());
  for (Index i = 0; i < n_; ++i)
    for (Index j : neighbors(i))
      out.emplace_back(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// NoiseField / Observation

NoiseField NoiseField::generate(const SampleMask &mask, double sigma,
                                Seed seed) {
  require(std::isfinite(sigma) && sigma >= 0.0,
          "noise level must be non-negative");
  NoiseField field;
  field.sigma_ = sigma;
  field.seed_ = seed;
  field.values_.assign(static_cast<std::size_t>(mask.pair_count()), 0.0);
  if (sigma > 0.0) {
    Rng rng(seed);
    for (double &v : field.values_)
      v = sigma * rng.normal();
  }
  return field;
}

Observation::Observation(std::shared_ptr<const GroundTruth> ground,
                         SampleMask mask, NoiseField noise)
    : ground_(std::move(ground)), mask_(std::move(mask)),
      noise_(std::move(noise)) {
  require(ground_ != nullptr, "observation requires a ground truth");
  require(ground_->n == mask_.n(), "mask and ground truth dimensions differ");
  require(static_cast<Index>(noise_.values().size()) == mask_.pair_count(),
          "noise field does not match mask");
  planted_.resize(static_cast<std::size_t>(mask_.pair_count()));
  mask_.for_each_pair([&](Index k, Index i, Index j) {
    planted_[static_cast<std::size_t>(k)] = ground_->entry(i, j);
  });
}

Observation Observation::sample(std::shared_ptr<const GroundTruth> ground,
                                double p, double sigma, Seed mask_seed,
                                Seed noise_seed) {
  require(ground != nullptr, "observation requires a ground truth");
  SampleMask mask = SampleMask::sample(ground->n, p, mask_seed);
  NoiseField noise = NoiseField::generate(mask, sigma, noise_seed);
  return Observation(std::move(ground), std::move(mask), std::move(noise));
}

// ---------------------------------------------------------------------------
// Kernels

namespace {

inline double row_dot(const double *a, const double *b, Index r) {
  double s = 0.0;
  for (Index c = 0; c < r; ++c)
    s += a[c] * b[c];
  return s;
}

inline void axpy_row(double w, const double *src, double *dst, Index r) {
  for (Index c = 0; c < r; ++c)
    dst[c] += w * src[c];
}

/// out += A V over the stored pairs, with A_ij = A_ji = weight(k, i, j).
template <class Weight>
void accumulate_pairs(const SampleMask &mask, const double *V, Index r,
                      double *out, Weight &&weight) {
  mask.for_each_pair([&](Index k, Index i, Index j) {
    const double w = weight(k, i, j);
    axpy_row(w, V + j * r, out + i * r, r);
    if (i != j)
      axpy_row(w, V + i * r, out + j * r, r);
  });
}

/// out += A V over the pairs {l, j} that are NOT in Omega, with A_lj = exact(j).
template <class Exact>
void accumulate_missing_row(const SampleMask &mask, Index l, const double *V,
                            Index r, double *out, Exact &&exact) {
  const auto observed = mask.neighbors(l);
  auto it = observed.begin();
  for (Index j = 0; j < mask.n(); ++j) {
    if (it != observed.end() && *it == j) {
      ++it;
      continue;
    }
    const double w = exact(j);
    axpy_row(w, V + j * r, out + l * r, r);
    if (j != l)
      axpy_row(w, V + l * r, out + j * r, r);
  }
}

void check_rows(Index rows, Index n, const char *what) {
  if (rows != n)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

void check_index(Index l, Index n, const char *what) {
  if (l < 0 || l >= n)
    throw std::out_of_range(std::string(what) + ": index out of range");
}

Factor to_factor(const Vector &x) { return Eigen::Map<const Factor>(x.data(), x.size(), 1); }

Vector to_vector(const Factor &X) { return Eigen::Map<const Vector>(X.data(), X.rows()); }

} // namespace

Factor observed_product(const SampleMask &mask, const Factor &X) {
  check_rows(X.rows(), mask.n(), "observed_product");
  const Index r = X.cols();
  const double inv_p = 1.0 / mask.p();
  const double *data = X.data();
  Factor out = Factor::Zero(X.rows(), r);
  accumulate_pairs(mask, data, r, out.data(), [&](Index, Index i, Index j) {
    return row_dot(data + i * r, data + j * r, r) * inv_p;
  });
  return out;
}

Vector observed_product(const SampleMask &mask, const Vector &x) {
  return to_vector(observed_product(mask, to_factor(x)));
}

Matrix mo_product(const Observation &obs, const Matrix &V) {
  check_rows(V.rows(), obs.n(), "mo_product");
  const Factor rows = V;
  const Index r = rows.cols();
  const double inv_p = 1.0 / obs.p();
  const auto noise = obs.noise().values();
  Factor out = Factor::Zero(rows.rows(), r);
  accumulate_pairs(obs.mask(), rows.data(), r, out.data(),
                   [&](Index k, Index, Index) {
                     return (obs.planted(k) + noise[k]) * inv_p;
                   });
  return out;
}

Vector mo_product(const Observation &obs, const Vector &x) {
  return mo_product(obs, Matrix(x)).col(0);
}

Factor loo_product(const SampleMask &mask, Index l, const Factor &X) {
  check_rows(X.rows(), mask.n(), "loo_product");
  check_index(l, mask.n(), "loo_product");
  const Index r = X.cols();
  const double inv_p = 1.0 / mask.p();
  const double *data = X.data();
  Factor out = Factor::Zero(X.rows(), r);
  accumulate_pairs(mask, data, r, out.data(), [&](Index, Index i, Index j) {
    const double value = row_dot(data + i * r, data + j * r, r);
    return (i == l || j == l) ? value : value * inv_p;
  });
  accumulate_missing_row(mask, l, data, r, out.data(), [&](Index j) {
    return row_dot(data + l * r, data + j * r, r);
  });
  return out;
}

Vector loo_product(const SampleMask &mask, Index l, const Vector &x) {
  return to_vector(loo_product(mask, l, to_factor(x)));
}

Matrix loo_mo_product(const Observation &obs, Index l, const Matrix &V) {
  check_rows(V.rows(), obs.n(), "loo_mo_product");
  check_index(l, obs.n(), "loo_mo_product");
  const Factor rows = V;
  const Index r = rows.cols();
  const double inv_p = 1.0 / obs.p();
  const auto noise = obs.noise().values();
  const GroundTruth &gt = obs.ground();
  Factor out = Factor::Zero(rows.rows(), r);
  accumulate_pairs(obs.mask(), rows.data(), r, out.data(),
                   [&](Index k, Index i, Index j) {
                     if (i == l || j == l)
                       return obs.planted(k);
                     return (obs.planted(k) + noise[k]) * inv_p;
                   });
  accumulate_missing_row(obs.mask(), l, rows.data(), r, out.data(),
                         [&](Index j) { return gt.entry(l, j); });
  return out;
}

Vector loo_mo_product(const Observation &obs, Index l, const Vector &x) {
  return loo_mo_product(obs, l, Matrix(x)).col(0);
}

double row_norm_estimate(const SampleMask &mask, const Vector &x, Index i) {
  check_rows(x.size(), mask.n(), "row_norm_estimate");
  check_index(i, mask.n(), "row_norm_estimate");
  double s = 0.0;
  for (Index j : mask.neighbors(i))
    s += x[j] * x[j];
  return std::sqrt(s / mask.p());
}

Vector row_norm_estimates(const SampleMask &mask, const Vector &x) {
  check_rows(x.size(), mask.n(), "row_norm_estimates");
  Vector acc = Vector::Zero(x.size());
  mask.for_each_pair([&](Index, Index i, Index j) {
    acc[i] += x[j] * x[j];
    if (i != j)
      acc[j] += x[i] * x[i];
  });
  return (acc / mask.p()).cwiseSqrt();
}

Vector sampling_weights(const SampleMask &mask, const Vector &x) {
  const double sq = x.squaredNorm();
  require(sq > 0.0, "sampling_weights: zero vector");
  return row_norm_estimates(mask, x).array().square() / sq;
}

double masked_quartic(const SampleMask &mask, const Vector &x) {
  check_rows(x.size(), mask.n(), "masked_quartic");
  double s = 0.0;
  mask.for_each_pair([&](Index, Index i, Index j) {
    const double v = x[i] * x[j];
    s += (i == j ? 1.0 : 2.0) * v * v;
  });
  return s / (4.0 * mask.p());
}

Vector masked_quartic_hessian_product(const SampleMask &mask, const Vector &x,
                                      const Vector &v) {
  check_rows(x.size(), mask.n(), "masked_quartic_hessian_product");
  check_rows(v.size(), mask.n(), "masked_quartic_hessian_product");
  const Vector est = row_norm_estimates(mask, x);
  Vector out = est.array().square() * v.array();
  const double scale = 2.0 / mask.p();
  accumulate_pairs(mask, v.data(), 1, out.data(), [&](Index, Index i, Index j) {
    return scale * x[i] * x[j];
  });
  return out;
}

Factor masked_residual_product(const Observation &obs, const Factor &X,
                               double *loss) {
  check_rows(X.rows(), obs.n(), "masked_residual_product");
  const Index r = X.cols();
  const double inv_p = 1.0 / obs.p();
  const auto noise = obs.noise().values();
  const double *data = X.data();
  double sum_sq = 0.0;
  Factor out = Factor::Zero(X.rows(), r);
  accumulate_pairs(obs.mask(), data, r, out.data(),
                   [&](Index k, Index i, Index j) {
                     const double d =
                         (row_dot(data + i * r, data + j * r, r) -
                          obs.planted(k)) -
                         noise[k];
                     sum_sq += (i == j ? 1.0 : 2.0) * d * d;
                     return d * inv_p;
                   });
  if (loss != nullptr)
    *loss = sum_sq * inv_p / 4.0;
  return out;
}

Factor loo_residual_product(const Observation &obs, Index l, const Factor &X) {
  check_rows(X.rows(), obs.n(), "loo_residual_product");
  check_index(l, obs.n(), "loo_residual_product");
  const Index r = X.cols();
  const double inv_p = 1.0 / obs.p();
  const auto noise = obs.noise().values();
  const double *data = X.data();
  const GroundTruth &gt = obs.ground();
  Factor out = Factor::Zero(X.rows(), r);
  accumulate_pairs(obs.mask(), data, r, out.data(),
                   [&](Index k, Index i, Index j) {
                     const double d = row_dot(data + i * r, data + j * r, r) -
                                      obs.planted(k);
                     if (i == l || j == l)
                       return d;
                     return (d - noise[k]) * inv_p;
                   });
  accumulate_missing_row(obs.mask(), l, data, r, out.data(), [&](Index j) {
    return row_dot(data + l * r, data + j * r, r) - gt.entry(l, j);
  });
  return out;
}

} // namespace gdmc
