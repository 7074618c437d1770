#pragma once

// Test-only helpers: random admissible matrices and independent reference
// computations.

#include "zeitlin/matrix.hpp"

#include <random>

namespace zeitlin::test {

/// Random traceless skew-Hermitian matrix with O(1) entries.
inline Matrix random_admissible(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = Complex(g(rng), g(rng));
  Matrix w = a - a.adjoint();
  w.diagonal().array() -= w.trace() / static_cast<double>(n);
  return w;
}

/// Spectral norm by power iteration on W^H W.
inline double power_iteration_norm(const Matrix& w, int iterations = 2000) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(w.cols());
  for (int i = 0; i < v.size(); ++i) v[i] += Complex(0.01 * i, -0.003 * i * i);
  v.normalize();
  double sigma2 = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXcd u = w.adjoint() * (w * v);
    const double next = u.norm();
    v = u / next;
    if (std::abs(next - sigma2) <= 1e-15 * next) {
      sigma2 = next;
      break;
    }
    sigma2 = next;
  }
  return std::sqrt(sigma2);
}

/// Spin-s generators (J_z, J_+) with s = (N-1)/2; row a has J_z eigenvalue a - s.
struct SpinGenerators {
  Matrix jz, jplus, jminus;
};

inline SpinGenerators spin_generators(int n) {
  const double s = (n - 1) / 2.0;
  SpinGenerators g;
  g.jz = Matrix::Zero(n, n);
  g.jplus = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const double mz = a - s;
    g.jz(a, a) = mz;
    if (a + 1 < n) g.jplus(a + 1, a) = std::sqrt(s * (s + 1) - mz * (mz + 1));
  }
  g.jminus = g.jplus.adjoint();
  return g;
}

/// Casimir of the adjoint su(2) action, sum_a [J_a, [J_a, X]]; eigenvalues
/// l(l+1) on u(N). Independent dense reference for the tridiagonal blocks.
inline Matrix adjoint_casimir(const SpinGenerators& g, const Matrix& x) {
  auto comm = [](const Matrix& a, const Matrix& b) -> Matrix { return a * b - b * a; };
  return comm(g.jz, comm(g.jz, x)) +
         0.5 * (comm(g.jplus, comm(g.jminus, x)) + comm(g.jminus, comm(g.jplus, x)));
}

}  // namespace zeitlin::test
