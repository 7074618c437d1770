#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace zeitlin {

using Complex = std::complex<double>;

/// N x N complex matrix, column-major. Used for the vorticity matrix W and the
/// stream matrix P; both live in su(N) (skew-Hermitian, traceless).
using Matrix = Eigen::MatrixXcd;
using VorticityMatrix = Matrix;

inline constexpr Complex kI{0.0, 1.0};

/// Relative tolerance for skewness/trace validation of inputs.
inline constexpr double kAdmissibleTol = 1e-10;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: eigensolver breakdown, fixed-point non-convergence,
/// inconsistent stream problem.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what, double residual = 0.0, int iterations = 0)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

inline void require_square(const Matrix& a, int n, const char* who) {
  if (a.rows() != n || a.cols() != n) {
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(n) + "x" +
                                std::to_string(n) + " matrix, got " + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()));
  }
}

/// ||A + A^H||_F
inline double skew_residual(const Matrix& a) { return (a + a.adjoint()).norm(); }

/// Largest entry modulus.
inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Re Tr(A^H B), computed without forming the product.
inline double real_inner(const Matrix& a, const Matrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

/// Throws std::invalid_argument if `w` is not skew-Hermitian and traceless to `rel_tol`.
inline void require_admissible(const Matrix& w, const char* who, double rel_tol = kAdmissibleTol) {
  const double scale = w.norm();
  if (scale == 0.0) return;
  if (skew_residual(w) > rel_tol * scale) {
    throw std::invalid_argument(std::string(who) + ": matrix is not skew-Hermitian");
  }
  if (std::abs(w.trace()) > rel_tol * scale) {
    throw std::invalid_argument(std::string(who) + ": matrix is not traceless");
  }
}

/// Spectral norm of a skew-Hermitian matrix (largest |eigenvalue| of -iW).
inline double spectral_norm_skew(const Matrix& w) {
  if (w.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(-kI * w, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("spectral_norm_skew: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Column block width used by the reproducible product. Fixed so results do not
/// depend on the thread count.
inline constexpr Eigen::Index kDeterministicPanel = 64;

/// out = a * b. With `deterministic`, the product is split into fixed-width column
/// panels, each computed single-threaded, so the bits of the result are
/// independent of the number of threads.
inline void multiply(const Matrix& a, const Matrix& b, Matrix& out, bool deterministic = false) {
  out.resize(a.rows(), b.cols());
  if (!deterministic) {
    out.noalias() = a * b;
    return;
  }
  const Eigen::Index cols = b.cols();
  const Eigen::Index panels = (cols + kDeterministicPanel - 1) / kDeterministicPanel;
#pragma omp parallel for schedule(static)
  for (Eigen::Index p = 0; p < panels; ++p) {
    const Eigen::Index c0 = p * kDeterministicPanel;
    const Eigen::Index w = std::min(kDeterministicPanel, cols - c0);
    out.middleCols(c0, w).noalias() = a * b.middleCols(c0, w);
  }
}

inline void set_thread_count(int threads) {
  if (threads <= 0) return;
#ifdef _OPENMP
  omp_set_num_threads(threads);
#endif
  Eigen::setNbThreads(threads);
}

}  // namespace zeitlin
