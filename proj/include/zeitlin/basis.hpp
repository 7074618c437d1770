#pragma once

// Quantized spherical harmonics T_lm (the hatted basis of u(N)) and the maps
// between harmonic coefficients and vorticity matrices.
//
// For m >= 0, T_lm is supported on the m-th sub-diagonal and is stored as the
// real unit vector v_lm with (T_lm)_{i+m, i} = v_lm[i]. Negative orders follow
// from T_{l,-m} = (-1)^m T_lm^H, which lives on the m-th super-diagonal.

#include "zeitlin/laplacian.hpp"
#include "zeitlin/matrix.hpp"
#include "zeitlin/wigner.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zeitlin {

/// Largest N for which the exact 3j construction is offered.
inline constexpr int kOracleLimit = 16;

enum class PhaseConvention : std::uint8_t {
  sign_rule,       ///< largest-magnitude entry positive (lowest index on ties)
  oracle_aligned,  ///< sign rule, then matched to the 3j closed form
  closed_form,     ///< evaluated directly from the 3j closed form
};

class QuantizedBasis {
 public:
  QuantizedBasis() = default;

  /// `diagonals[m]` holds v_lm as columns for l = first_degree(m)..N-1.
  QuantizedBasis(int n, std::vector<Eigen::MatrixXd> diagonals, PhaseConvention phase)
      : n_(n), diagonals_(std::move(diagonals)), phase_(phase) {
    if (static_cast<int>(diagonals_.size()) != n) {
      throw std::invalid_argument("QuantizedBasis: expected one block per diagonal");
    }
    for (int m = 0; m < n; ++m) {
      if (diagonals_[m].rows() != n - m || diagonals_[m].cols() != n - first_degree(m)) {
        throw std::invalid_argument("QuantizedBasis: bad block shape at m=" + std::to_string(m));
      }
    }
  }

  int n() const { return n_; }
  PhaseConvention phase() const { return phase_; }

  static int first_degree(int m) { return m == 0 ? 1 : m; }

  /// Columns v_lm for l = first_degree(m)..N-1.
  const Eigen::MatrixXd& diagonal_block(int m) const { return diagonals_.at(m); }
  Eigen::MatrixXd& diagonal_block(int m) { return diagonals_.at(m); }

  auto vector(int l, int m) const {
    check(l, m);
    return diagonals_[m].col(l - first_degree(m));
  }

  /// Dense T_lm; m may be negative.
  Matrix element(int l, int mm) const {
    const int m = std::abs(mm);
    check(l, m);
    Matrix t = Matrix::Zero(n_, n_);
    const Eigen::VectorXd v = vector(l, m);
    if (mm >= 0) {
      t.diagonal(-m) = v.cast<Complex>();
    } else {
      t.diagonal(m) = ((m % 2) ? -1.0 : 1.0) * v.cast<Complex>();
    }
    return t;
  }

 private:
  void check(int l, int m) const {
    if (m < 0 || m >= n_ || l < first_degree(m) || l >= n_) {
      throw std::out_of_range("QuantizedBasis: (l,m)=(" + std::to_string(l) + "," +
                              std::to_string(m) + ") out of range for N=" + std::to_string(n_));
    }
  }

  int n_ = 0;
  std::vector<Eigen::MatrixXd> diagonals_;
  PhaseConvention phase_ = PhaseConvention::sign_rule;
};

/// Complex coefficients omega_lm, 1 <= l <= N-1, -l <= m <= l.
class HarmonicCoefficients {
 public:
  HarmonicCoefficients() = default;
  explicit HarmonicCoefficients(int n) : n_(n), values_(static_cast<std::size_t>(n) * n - 1) {
    if (n < 2) throw std::invalid_argument("HarmonicCoefficients: N must be >= 2");
  }

  int n() const { return n_; }
  int max_degree() const { return n_ - 1; }

  static std::size_t index(int l, int m) {
    return static_cast<std::size_t>(l) * l + static_cast<std::size_t>(l + m) - 1;
  }

  Complex& operator()(int l, int m) { return values_[checked(l, m)]; }
  const Complex& operator()(int l, int m) const { return values_[checked(l, m)]; }

  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }

  double max_abs() const {
    double r = 0.0;
    for (const auto& v : values_) r = std::max(r, std::abs(v));
    return r;
  }

  /// max |omega_{l,-m} - (-1)^m conj(omega_lm)|; zero for coefficients of a real field.
  double reality_residual() const {
    double r = 0.0;
    for (int l = 1; l < n_; ++l) {
      for (int m = 0; m <= l; ++m) {
        const Complex expect = ((m % 2) ? -1.0 : 1.0) * std::conj((*this)(l, m));
        r = std::max(r, std::abs((*this)(l, -m) - expect));
      }
    }
    return r;
  }

 private:
  std::size_t checked(int l, int m) const {
    if (l < 1 || l >= n_ || m < -l || m > l) {
      throw std::out_of_range("HarmonicCoefficients: (l,m)=(" + std::to_string(l) + "," +
                              std::to_string(m) + ") out of range for N=" + std::to_string(n_));
    }
    return index(l, m);
  }

  int n_ = 0;
  std::vector<Complex> values_;
};

namespace detail {

// Flip v so its largest-magnitude entry (lowest index on ties) is positive.
inline void apply_sign_rule(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (v[best] < 0.0) v = -v;
}

}  // namespace detail

/// Basis from the 3j closed form, exact up to the final square root.
///   (T_lm)_{ab} = (-1)^(s - i_a) sqrt(2l+1) (s l s; -i_a m j_b),  i_a = a - s.
inline QuantizedBasis wigner_basis_oracle(int n, int oracle_limit = kOracleLimit) {
  if (n < 2) throw std::invalid_argument("wigner_basis_oracle: N must be >= 2");
  if (n > oracle_limit) {
    throw std::invalid_argument("wigner_basis_oracle: N=" + std::to_string(n) +
                                " exceeds the exact-arithmetic limit " +
                                std::to_string(oracle_limit));
  }
  const int two_s = n - 1;
  std::vector<Eigen::MatrixXd> diagonals(n);
  for (int m = 0; m < n; ++m) {
    const int l0 = QuantizedBasis::first_degree(m);
    Eigen::MatrixXd block(n - m, n - l0);
    for (int l = l0; l < n; ++l) {
      for (int i = 0; i < n - m; ++i) {
        const int row = i + m;
        const int col = i;
        const int two_row_label = 2 * row - two_s;
        const int two_col_label = 2 * col - two_s;
        const int phase_exp = (two_s - two_row_label) / 2;  // s - i_a
        const double sign = (phase_exp % 2) ? -1.0 : 1.0;
        block(i, l - l0) = sign * std::sqrt(2.0 * l + 1.0) *
                           wigner::wigner_3j_twice(two_s, 2 * l, two_s, -two_row_label, 2 * m,
                                                   two_col_label);
      }
    }
    diagonals[m] = std::move(block);
  }
  return QuantizedBasis(n, std::move(diagonals), PhaseConvention::closed_form);
}

struct BasisOptions {
  /// Align phases with the closed form for N up to this size; 0 disables.
  int oracle_limit = kOracleLimit;
};

/// Basis from the eigenvectors of the Laplacian blocks. O(N^3).
inline QuantizedBasis compute_basis(int n, const BasisOptions& options = {}) {
  if (n < 2) throw std::invalid_argument("compute_basis: N must be >= 2");
  std::vector<Eigen::MatrixXd> diagonals(n);
  std::vector<std::string> failures(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < n; ++m) {
    const LaplacianBlock block = build_block(n, m);
    const int l0 = QuantizedBasis::first_degree(m);
    Eigen::MatrixXd vecs;
    if (block.size() == 1) {
      vecs = Eigen::MatrixXd::Ones(1, 1);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(block.diag, block.offdiag, Eigen::ComputeEigenvectors);
      if (es.info() != Eigen::Success) {
        failures[m] = "compute_basis: eigensolver did not converge (m=" + std::to_string(m) +
                      ", N=" + std::to_string(n) + ")";
        continue;
      }
      // ascending eigenvalues l(l+1), l = m..N-1; drop the l = 0 null mode
      vecs = es.eigenvectors().rightCols(n - l0);
    }
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) detail::apply_sign_rule(vecs.col(c));
    diagonals[m] = std::move(vecs);
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw SolverError(f);
  }

  PhaseConvention phase = PhaseConvention::sign_rule;
  if (n <= options.oracle_limit) {
    const QuantizedBasis oracle = wigner_basis_oracle(n, options.oracle_limit);
    for (int m = 0; m < n; ++m) {
      for (Eigen::Index c = 0; c < diagonals[m].cols(); ++c) {
        if (diagonals[m].col(c).dot(oracle.diagonal_block(m).col(c)) < 0.0) {
          diagonals[m].col(c) *= -1.0;
        }
      }
    }
    phase = PhaseConvention::oracle_aligned;
  }
  return QuantizedBasis(n, std::move(diagonals), phase);
}

enum class FieldKind {
  real,     ///< coefficients must satisfy the reality condition
  complex,  ///< any coefficients; the result need not be skew-Hermitian
};

/// Reality-condition tolerance used by project().
inline constexpr double kRealityTol = 1e-12;

/// W = sum_{l,m} i omega_lm T_lm, assembled diagonal by diagonal.
inline Matrix project(const HarmonicCoefficients& coeffs, const QuantizedBasis& basis,
                      FieldKind kind = FieldKind::real) {
  const int n = basis.n();
  if (coeffs.n() != n) {
    throw std::invalid_argument("project: coefficients for N=" + std::to_string(coeffs.n()) +
                                " do not match basis N=" + std::to_string(n));
  }
  if (kind == FieldKind::real &&
      coeffs.reality_residual() > kRealityTol * std::max(1.0, coeffs.max_abs())) {
    throw std::invalid_argument("project: coefficients violate the reality condition");
  }
  Matrix w = Matrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 4)
  for (int m = 0; m < n; ++m) {
    const Eigen::MatrixXd& v = basis.diagonal_block(m);
    const int l0 = QuantizedBasis::first_degree(m);
    const double parity = (m % 2) ? -1.0 : 1.0;
    Eigen::VectorXcd lower_c(v.cols());
    Eigen::VectorXcd upper_c(v.cols());
    for (int l = l0; l < n; ++l) {
      lower_c[l - l0] = kI * coeffs(l, m);
      if (m > 0) upper_c[l - l0] = parity * kI * coeffs(l, -m);
    }
    w.diagonal(-m) = v.cast<Complex>() * lower_c;
    if (m > 0) w.diagonal(m) = v.cast<Complex>() * upper_c;
  }
  return w;
}

/// omega_lm = -i Tr(T_lm^H W). Inverse of project() by orthonormality.
inline HarmonicCoefficients extract(const Matrix& w, const QuantizedBasis& basis) {
  const int n = basis.n();
  require_square(w, n, "extract");
  HarmonicCoefficients coeffs(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (int m = 0; m < n; ++m) {
    const Eigen::MatrixXd& v = basis.diagonal_block(m);
    const int l0 = QuantizedBasis::first_degree(m);
    const double parity = (m % 2) ? -1.0 : 1.0;
    const Eigen::VectorXcd lower = v.transpose().cast<Complex>() * w.diagonal(-m);
    for (int l = l0; l < n; ++l) coeffs(l, m) = -kI * lower[l - l0];
    if (m > 0) {
      const Eigen::VectorXcd upper = v.transpose().cast<Complex>() * w.diagonal(m);
      for (int l = l0; l < n; ++l) coeffs(l, -m) = -kI * parity * upper[l - l0];
    }
  }
  return coeffs;
}

}  // namespace zeitlin
