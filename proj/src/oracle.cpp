#include "gdmc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gdmc::oracle {

namespace {

void check_dense(Index n) {
  require(n <= kDenseThreshold, "dense oracle: dimension above threshold");
}

} // namespace

DenseMatrix DenseMatrix::from(const Matrix &m) {
  DenseMatrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      out(i, j) = m(i, j);
  return out;
}

Matrix DenseMatrix::to_eigen() const {
  Matrix out(rows_, cols_);
  for (Index i = 0; i < rows_; ++i)
    for (Index j = 0; j < cols_; ++j)
      out(i, j) = (*this)(i, j);
  return out;
}

DenseMatrix mask_indicator(const SampleMask &mask) {
  check_dense(mask.n());
  DenseMatrix out(mask.n(), mask.n());
  for (const auto &[i, j] : mask.directed_entries())
    out(i, j) = 1.0;
  return out;
}

DenseMatrix planted(const GroundTruth &ground) {
  check_dense(ground.n);
  DenseMatrix out(ground.n, ground.n);
  for (Index i = 0; i < ground.n; ++i)
    for (Index j = 0; j < ground.n; ++j) {
      double s = 0.0;
      for (Index k = 0; k < ground.rank(); ++k)
        s += ground.eigenvalues[static_cast<std::size_t>(k)] *
             ground.eigenvectors(i, k) * ground.eigenvectors(j, k);
      out(i, j) = s;
    }
  return out;
}

DenseMatrix noise(const Observation &obs) {
  check_dense(obs.n());
  DenseMatrix out(obs.n(), obs.n());
  const auto pairs = obs.mask().pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    out(i, j) = obs.noise()[static_cast<Index>(k)];
    out(j, i) = obs.noise()[static_cast<Index>(k)];
  }
  return out;
}

DenseMatrix outer(const Matrix &X) {
  check_dense(X.rows());
  DenseMatrix out(X.rows(), X.rows());
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = 0; j < X.rows(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < X.cols(); ++k)
        s += X(i, k) * X(j, k);
      out(i, j) = s;
    }
  return out;
}

DenseMatrix scaled_projection(const SampleMask &mask, const DenseMatrix &A) {
  const DenseMatrix ind = mask_indicator(mask);
  DenseMatrix out(A.rows(), A.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      out(i, j) = ind(i, j) * A(i, j) / mask.p();
  return out;
}

DenseMatrix loo_projection(const SampleMask &mask, Index l,
                           const DenseMatrix &A) {
  require(l >= 0 && l < mask.n(), "loo_projection: index out of range");
  DenseMatrix out = scaled_projection(mask, A);
  for (Index j = 0; j < A.cols(); ++j) {
    out(l, j) = A(l, j);
    out(j, l) = A(j, l);
  }
  return out;
}

DenseMatrix observed_matrix(const Observation &obs) {
  const DenseMatrix star = planted(obs.ground());
  const DenseMatrix e = noise(obs);
  DenseMatrix sum(obs.n(), obs.n());
  for (Index i = 0; i < obs.n(); ++i)
    for (Index j = 0; j < obs.n(); ++j)
      sum(i, j) = star(i, j) + e(i, j);
  return scaled_projection(obs.mask(), sum);
}

DenseMatrix loo_matrix(const Observation &obs, Index l) {
  DenseMatrix out = loo_projection(obs.mask(), l, planted(obs.ground()));
  const DenseMatrix e = scaled_projection(obs.mask(), noise(obs));
  for (Index i = 0; i < obs.n(); ++i)
    for (Index j = 0; j < obs.n(); ++j)
      if (i != l && j != l)
        out(i, j) += e(i, j);
  return out;
}

Vector row_norms(const SampleMask &mask, const Vector &x) {
  const DenseMatrix ind = mask_indicator(mask);
  Vector out(mask.n());
  for (Index i = 0; i < mask.n(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < mask.n(); ++j)
      s += ind(i, j) * x[j] * x[j];
    out[i] = std::sqrt(s / mask.p());
  }
  return out;
}

Matrix multiply(const DenseMatrix &A, const Matrix &X) {
  require(A.cols() == X.rows(), "multiply: dimension mismatch");
  Matrix out(A.rows(), X.cols());
  for (Index c = 0; c < X.cols(); ++c)
    for (Index i = 0; i < A.rows(); ++i) {
      double s = 0.0;
      for (Index j = 0; j < A.cols(); ++j)
        s += A(i, j) * X(j, c);
      out(i, c) = s;
    }
  return out;
}

Matrix multiply_by_columns(const DenseMatrix &A, const Matrix &X) {
  require(A.cols() == X.rows(), "multiply_by_columns: dimension mismatch");
  Matrix out = Matrix::Zero(A.rows(), X.cols());
  for (Index c = 0; c < X.cols(); ++c)
    for (Index j = 0; j < A.cols(); ++j)
      for (Index i = 0; i < A.rows(); ++i)
        out(i, c) += A(i, j) * X(j, c);
  return out;
}

double loss(const Observation &obs, const Matrix &X) {
  const Index n = obs.n();
  require(X.rows() == n, "oracle loss: dimension mismatch");
  const DenseMatrix ind = mask_indicator(obs.mask());
  const DenseMatrix star = planted(obs.ground());
  const DenseMatrix e = noise(obs);
  const DenseMatrix xx = outer(X);
  double s = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (ind(i, j) != 0.0) {
        const double d = xx(i, j) - star(i, j) - e(i, j);
        s += d * d;
      }
  return s / (4.0 * obs.p());
}

Vector fd_gradient(const std::function<double(const Vector &)> &f,
                   const Vector &x, double h) {
  require(h > 0.0, "fd_gradient: step must be positive");
  Vector out(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

double fd_step(const Vector &x) {
  double m = 1.0;
  for (Index i = 0; i < x.size(); ++i)
    m = std::max(m, std::abs(x[i]));
  return 1e-6 * m;
}

bool close(double a, double b, double atol, double rtol) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

JacobiResult jacobi_eigen(const DenseMatrix &input) {
  const Index n = input.rows();
  require(n == input.cols(), "jacobi_eigen: matrix must be square");
  require(n <= kEigenThreshold, "jacobi_eigen: dimension above threshold");
  double frob = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      require(std::abs(input(i, j) - input(j, i)) <= 1e-10,
              "jacobi_eigen: matrix is not symmetric");
      frob += input(i, j) * input(i, j);
    }
  frob = std::sqrt(frob);

  DenseMatrix a = input;
  DenseMatrix v(n, n);
  for (Index i = 0; i < n; ++i)
    v(i, i) = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j)
          s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  JacobiResult result;
  const double target = 1e-12 * frob;
  double off = off_norm();
  const Index max_sweeps = 100;
  while (off > target && result.sweeps < max_sweeps) {
    for (Index p = 0; p < n - 1; ++p)
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0)
          continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    ++result.sweeps;
    off = off_norm();
  }
  if (off > target)
    throw ConvergenceError("jacobi_eigen: sweep limit reached", off);

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return a(x, x) > a(y, y); });
  result.eigenvalues.resize(n);
  result.eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    result.eigenvalues[k] = a(src, src);
    for (Index i = 0; i < n; ++i)
      result.eigenvectors(i, k) = v(i, src);
  }
  result.off_diagonal = off;
  return result;
}

} // namespace gdmc::oracle
