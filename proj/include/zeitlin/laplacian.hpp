#pragma once

// Quantized spherical Laplacian in block-tridiagonal form.
//
// The operator maps the m-th diagonal of a matrix to the m-th diagonal of the
// image, and on each diagonal it acts as a symmetric tridiagonal matrix. The
// blocks are stored positive (semi)definite, with eigenvalues l(l+1) for
// l = m..N-1. The physical operator, whose eigenvalues are -l(l+1), is minus the
// blockwise action.

#include "zeitlin/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace zeitlin {

/// Tridiagonal block of the quantized Laplacian acting on diagonal m.
struct LaplacianBlock {
  int n_total = 0;
  int m = 0;
  Eigen::VectorXd diag;     // length N - m
  Eigen::VectorXd offdiag;  // length N - m - 1

  int size() const { return static_cast<int>(diag.size()); }

  /// y = block * x for a real or complex vector.
  template <typename Derived>
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> apply(
      const Eigen::MatrixBase<Derived>& x) const {
    const int n = size();
    if (x.size() != n) throw std::invalid_argument("LaplacianBlock::apply: size mismatch");
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> y(n);
    for (int i = 0; i < n; ++i) {
      auto acc = diag[i] * x[i];
      if (i > 0) acc += offdiag[i - 1] * x[i - 1];
      if (i + 1 < n) acc += offdiag[i] * x[i + 1];
      y[i] = acc;
    }
    return y;
  }

  /// Dense copy, for eigensolver checks.
  Eigen::MatrixXd dense() const {
    const int n = size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a.diagonal() = diag;
    if (n > 1) {
      a.diagonal(1) = offdiag;
      a.diagonal(-1) = offdiag;
    }
    return a;
  }
};

inline LaplacianBlock build_block(int n_total, int m) {
  if (n_total < 2) throw std::invalid_argument("build_block: N must be >= 2");
  if (m < 0 || m > n_total - 1) {
    throw std::invalid_argument("build_block: diagonal index " + std::to_string(m) +
                                " out of range for N=" + std::to_string(n_total));
  }
  const double nn = n_total;
  const double s = (nn - 1.0) / 2.0;
  const int size = n_total - m;
  LaplacianBlock b;
  b.n_total = n_total;
  b.m = m;
  b.diag.resize(size);
  b.offdiag.resize(size - 1);
  for (int i = 0; i < size; ++i) {
    const double di = i;
    b.diag[i] = 2.0 * (s * (2.0 * di + 1.0 + m) - di * (di + m));
  }
  for (int i = 0; i + 1 < size; ++i) {
    const double di = i;
    b.offdiag[i] = -std::sqrt((di + m + 1.0) * (nn - 1.0 - di - m)) *
                   std::sqrt((di + 1.0) * (nn - 1.0 - di));
  }
  return b;
}

/// How solve_stream treats a right-hand side with nonzero trace.
enum class TracePolicy {
  reject,   ///< SolverError when |Tr W| exceeds the admissibility tolerance
  project,  ///< drop the identity component (it lies in the kernel of Delta_N)
};

enum class Sign {
  physical,  ///< Delta_N: eigenvalues -l(l+1)
  positive,  ///< blockwise action as stored: eigenvalues +l(l+1)
};

/// LDL^T factorization of a symmetric positive definite tridiagonal block.
struct TridiagonalFactor {
  Eigen::VectorXd pivot;  // D
  Eigen::VectorXd lower;  // unit lower bidiagonal multipliers

  static TridiagonalFactor factor(const LaplacianBlock& b) {
    const int n = b.size();
    TridiagonalFactor f;
    f.pivot.resize(n);
    f.lower.resize(std::max(n - 1, 0));
    f.pivot[0] = b.diag[0];
    for (int i = 0; i + 1 < n; ++i) {
      if (!(f.pivot[i] > 0.0)) {
        throw SolverError("LDL^T: non-positive pivot in block m=" + std::to_string(b.m));
      }
      f.lower[i] = b.offdiag[i] / f.pivot[i];
      f.pivot[i + 1] = b.diag[i + 1] - f.lower[i] * b.offdiag[i];
    }
    if (!(f.pivot[n - 1] > 0.0)) {
      throw SolverError("LDL^T: non-positive pivot in block m=" + std::to_string(b.m));
    }
    return f;
  }

  /// Solves in place.
  template <typename Vec>
  void solve(Vec& x) const {
    const Eigen::Index n = pivot.size();
    for (Eigen::Index i = 1; i < n; ++i) x[i] -= lower[i - 1] * x[i - 1];
    for (Eigen::Index i = 0; i < n; ++i) x[i] /= pivot[i];
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= lower[i] * x[i + 1];
  }
};

/// Blocks and factorizations of Delta_N for a fixed N. Immutable after
/// construction; safe to share across threads.
class QuantizedLaplacian {
 public:
  explicit QuantizedLaplacian(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("QuantizedLaplacian: N must be >= 2");
    blocks_.reserve(n);
    for (int m = 0; m < n; ++m) blocks_.push_back(build_block(n, m));
    factors_.resize(n);
    for (int m = 1; m < n; ++m) factors_[m] = TridiagonalFactor::factor(blocks_[m]);
    // The m = 0 block is a weighted path-graph Laplacian: rows sum to zero and
    // the constant vector spans the kernel. Edge weights are -offdiag.
    edge_weight_ = -blocks_[0].offdiag;
  }

  int n() const { return n_; }
  const LaplacianBlock& block(int m) const { return blocks_.at(m); }

  /// Applies +/- the blockwise Laplacian to the lower triangle and main diagonal
  /// of `w`; the upper triangle is reconstructed by skew-Hermitian symmetry.
  Matrix apply(const Matrix& w, Sign sign = Sign::physical) const {
    require_square(w, n_, "apply_laplacian");
    const double sgn = sign == Sign::physical ? -1.0 : 1.0;
    Matrix out(n_, n_);
#pragma omp parallel for schedule(dynamic, 8)
    for (int m = 0; m < n_; ++m) {
      Eigen::VectorXcd y = blocks_[m].apply(w.diagonal(-m));
      y *= sgn;
      out.diagonal(-m) = y;
      if (m > 0) out.diagonal(m) = -y.conjugate();
    }
    return out;
  }

  /// Stream matrix P with Delta_N P = W (physical sign); P is traceless. O(N^2).
  Matrix solve_stream(const Matrix& w, TracePolicy policy = TracePolicy::reject) const {
    require_square(w, n_, "solve_stream");
    const double scale = w.norm();
    const Complex trace = w.trace();
    if (policy == TracePolicy::reject && std::abs(trace) > kAdmissibleTol * scale) {
      throw SolverError("solve_stream: input is not traceless (|Tr W| = " +
                        std::to_string(std::abs(trace)) + ")");
    }
    Matrix p(n_, n_);
#pragma omp parallel for schedule(dynamic, 8)
    for (int m = 0; m < n_; ++m) {
      Eigen::VectorXcd x = -w.diagonal(-m);
      if (m == 0) {
        solve_null_block(x);
      } else {
        factors_[m].solve(x);
      }
      p.diagonal(-m) = x;
      if (m > 0) p.diagonal(m) = -x.conjugate();
    }
    return p;
  }

 private:
  // Solves block0 * x = b for b with zero sum, returning the zero-mean solution.
  // With flux f_i = c_i (x_i - x_{i+1}), the system reads f_i = sum_{k<=i} b_k.
  void solve_null_block(Eigen::VectorXcd& b) const {
    const Complex mean = b.mean();
    b.array() -= mean;
    Eigen::VectorXcd x(n_);
    x[0] = 0.0;
    Complex flux = 0.0;
    for (int i = 0; i + 1 < n_; ++i) {
      flux += b[i];
      x[i + 1] = x[i] - flux / edge_weight_[i];
    }
    x.array() -= x.mean();
    b = x;
  }

  int n_;
  std::vector<LaplacianBlock> blocks_;
  std::vector<TridiagonalFactor> factors_;
  Eigen::VectorXd edge_weight_;
};

inline Matrix apply_laplacian(const Matrix& w, Sign sign = Sign::physical) {
  return QuantizedLaplacian(static_cast<int>(w.rows())).apply(w, sign);
}

inline Matrix solve_stream(const Matrix& w, TracePolicy policy = TracePolicy::reject) {
  return QuantizedLaplacian(static_cast<int>(w.rows())).solve_stream(w, policy);
}

}  // namespace zeitlin
