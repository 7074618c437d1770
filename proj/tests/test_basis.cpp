#include "support.hpp"
#include "zeitlin/basis.hpp"
#include "zeitlin/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <fstream>

namespace zeitlin {
namespace {

TEST(Basis, N2Elements) {
  const QuantizedBasis b = compute_basis(2);
  Matrix t10 = Matrix::Zero(2, 2);
  t10(0, 0) = 1.0 / std::sqrt(2.0);
  t10(1, 1) = -1.0 / std::sqrt(2.0);
  // the closed form fixes the sign: (T_10)_00 = -sqrt(3) (1/2 1 1/2; 1/2 0 -1/2) = -1/sqrt(2)
  EXPECT_LT((b.element(1, 0) + t10).norm(), 1e-15);
  // T_11 sits on the sub-diagonal; T_{1,-1} = -T_11^H
  EXPECT_NEAR(std::abs(b.element(1, 1)(1, 0)), 1.0, 1e-15);
  EXPECT_LT((b.element(1, -1) + b.element(1, 1).adjoint()).norm(), 1e-15);
}

TEST(Basis, N3FirstDiagonalDegreeOne) {
  const QuantizedBasis b = compute_basis(3);
  const auto v = b.vector(1, 1);
  ASSERT_EQ(v.size(), 2);
  EXPECT_NEAR(std::abs(v[0]), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(v[1]), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_GT(v[0] * v[1], 0.0);
}

// Closed-form vectors are eigenvectors of the blocks; checks the 3j formula
// against the tridiagonal operator without using the eigensolver.
TEST(Basis, OracleVectorsAreBlockEigenvectors) {
  for (int n = 2; n <= 12; ++n) {
    const QuantizedBasis oracle = wigner_basis_oracle(n);
    for (int m = 0; m < n; ++m) {
      const LaplacianBlock blk = build_block(n, m);
      for (int l = QuantizedBasis::first_degree(m); l < n; ++l) {
        const Eigen::VectorXd v = oracle.vector(l, m);
        EXPECT_NEAR(v.norm(), 1.0, 1e-13);
        EXPECT_LT((blk.apply(v) - l * (l + 1.0) * v).norm(), 1e-11 * l * (l + 1.0))
            << "N=" << n << " l=" << l << " m=" << m;
      }
    }
  }
}

// The raw eigensolver basis (sign rule only) equals the closed form up to a
// sign per (l, m).
TEST(Basis, EigensolverMatchesClosedForm) {
  BasisOptions raw;
  raw.oracle_limit = 0;
  for (int n = 2; n <= 10; ++n) {
    const QuantizedBasis eig = compute_basis(n, raw);
    const QuantizedBasis oracle = wigner_basis_oracle(n);
    EXPECT_EQ(eig.phase(), PhaseConvention::sign_rule);
    for (int m = 0; m < n; ++m) {
      for (int l = QuantizedBasis::first_degree(m); l < n; ++l) {
        Eigen::VectorXd a = eig.vector(l, m);
        const Eigen::VectorXd b = oracle.vector(l, m);
        if (a.dot(b) < 0.0) a = -a;
        EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12) << "N=" << n << " l=" << l << " m=" << m;
      }
    }
  }
}

TEST(Basis, AlignedBasisEqualsClosedForm) {
  for (int n : {4, 9, 16}) {
    const QuantizedBasis b = compute_basis(n);
    const QuantizedBasis oracle = wigner_basis_oracle(n);
    EXPECT_EQ(b.phase(), PhaseConvention::oracle_aligned);
    for (int m = 0; m < n; ++m) {
      EXPECT_LE((b.diagonal_block(m) - oracle.diagonal_block(m)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  EXPECT_THROW(wigner_basis_oracle(17), std::invalid_argument);
  EXPECT_THROW(wigner_basis_oracle(1), std::invalid_argument);
}

// Columns of each diagonal block are orthonormal, so the matrices T_lm are
// orthonormal in the Frobenius inner product.
TEST(Basis, Orthonormality) {
  for (int n : {2, 7, 16, 33, 64}) {
    const QuantizedBasis b = compute_basis(n);
    for (int m = 0; m < n; ++m) {
      const Eigen::MatrixXd& v = b.diagonal_block(m);
      const Eigen::MatrixXd gram = v.transpose() * v;
      EXPECT_LE((gram - Eigen::MatrixXd::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff(), 1e-12)
          << "N=" << n << " m=" << m;
      // m = 0 vectors are orthogonal to the identity (traceless)
      if (m == 0) EXPECT_LE(v.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Basis, EigenResidualLargeN) {
  const int n = 128;
  const QuantizedBasis b = compute_basis(n);
  EXPECT_EQ(b.phase(), PhaseConvention::sign_rule);
  double worst = 0.0;
  for (int m = 0; m < n; m += 7) {
    const LaplacianBlock blk = build_block(n, m);
    for (int l = QuantizedBasis::first_degree(m); l < n; ++l) {
      const Eigen::VectorXd v = b.vector(l, m);
      worst = std::max(worst, (blk.apply(v) - l * (l + 1.0) * v).norm() / (l * (l + 1.0)));
    }
  }
  EXPECT_LE(worst, 1e-10);
}

// Dense check of the eigen-relation Delta T = -l(l+1) T via the spin-matrix Casimir.
TEST(Basis, DenseEigenRelation) {
  const int n = 6;
  const QuantizedBasis b = compute_basis(n);
  const auto g = test::spin_generators(n);
  for (int l = 1; l < n; ++l) {
    for (int m = -l; m <= l; ++m) {
      const Matrix t = b.element(l, m);
      EXPECT_LT((test::adjoint_casimir(g, t) - l * (l + 1.0) * t).norm(), 1e-12);
    }
  }
}

TEST(Basis, ProjectExtractExamples) {
  const QuantizedBasis b = compute_basis(8);
  HarmonicCoefficients c(8);
  EXPECT_EQ(project(c, b).norm(), 0.0);

  c(3, 2) = Complex(0.3, -0.4);
  c(3, -2) = std::conj(c(3, 2));
  const Matrix w = project(c, b);
  const Matrix expect = kI * c(3, 2) * b.element(3, 2) + kI * c(3, -2) * b.element(3, -2);
  EXPECT_LT((w - expect).norm(), 1e-15);
  EXPECT_LT(skew_residual(w), 1e-15);

  const HarmonicCoefficients back = extract(w, b);
  for (int l = 1; l < 8; ++l) {
    for (int m = -l; m <= l; ++m) {
      const Complex want = (l == 3 && std::abs(m) == 2) ? c(l, m) : Complex(0.0);
      EXPECT_LT(std::abs(back(l, m) - want), 1e-15);
    }
  }
}

TEST(Basis, ProjectN2) {
  const QuantizedBasis b = compute_basis(2);
  HarmonicCoefficients c(2);
  c(1, 0) = 1.0;
  const Matrix w = project(c, b);
  EXPECT_NEAR(w(0, 0).imag(), -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(w(1, 1).imag(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(w(0, 0).real(), 0.0);
  EXPECT_EQ(w(0, 1), Complex(0.0));
}

HarmonicCoefficients random_real_coefficients(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  HarmonicCoefficients c(n);
  for (int l = 1; l < n; ++l) {
    c(l, 0) = g(rng);
    for (int m = 1; m <= l; ++m) {
      c(l, m) = Complex(g(rng), g(rng));
      c(l, -m) = ((m % 2) ? -1.0 : 1.0) * std::conj(c(l, m));
    }
  }
  return c;
}

class ProjectRoundTrip : public ::testing::TestWithParam<int> {};

TEST_P(ProjectRoundTrip, CoefficientsAndMatrices) {
  const int n = GetParam();
  const QuantizedBasis b = compute_basis(n);
  const HarmonicCoefficients c = random_real_coefficients(n, 7);
  const Matrix w = project(c, b);
  EXPECT_LT(skew_residual(w), 1e-13 * w.norm());
  EXPECT_LT(std::abs(w.trace()), 1e-13 * w.norm());

  const HarmonicCoefficients back = extract(w, b);
  double err = 0.0;
  for (std::size_t i = 0; i < c.values().size(); ++i) {
    err = std::max(err, std::abs(back.values()[i] - c.values()[i]));
  }
  EXPECT_LE(err, 1e-12 * c.max_abs());
  EXPECT_LE(back.reality_residual(), 1e-12 * c.max_abs());

  // matrix side: project(extract(W)) = W for admissible W
  const Matrix w2 = test::random_admissible(n, 11);
  EXPECT_LT((project(extract(w2, b), b) - w2).norm(), 1e-12 * w2.norm());

  // Parseval: |W|_F^2 = sum |omega_lm|^2
  double sum = 0.0;
  for (const Complex& v : c.values()) sum += std::norm(v);
  EXPECT_NEAR(w.squaredNorm(), sum, 1e-12 * sum);
}

INSTANTIATE_TEST_SUITE_P(Sizes, ProjectRoundTrip, ::testing::Values(8, 32));

TEST(Basis, ComplexCoefficientsAllowedWhenRequested) {
  const QuantizedBasis b = compute_basis(5);
  HarmonicCoefficients c(5);
  c(2, 1) = 1.0;  // no partner at m = -1
  EXPECT_THROW(project(c, b), std::invalid_argument);
  const Matrix w = project(c, b, FieldKind::complex);
  EXPECT_GT(skew_residual(w), 0.5);
  EXPECT_LT(std::abs(extract(w, b)(2, 1) - 1.0), 1e-15);
}

TEST(Basis, ErrorsOnMismatch) {
  const QuantizedBasis b = compute_basis(5);
  EXPECT_THROW(project(HarmonicCoefficients(6), b), std::invalid_argument);
  EXPECT_THROW(extract(Matrix::Zero(4, 4), b), std::invalid_argument);
  EXPECT_THROW(b.vector(0, 0), std::out_of_range);
  EXPECT_THROW(b.vector(2, 3), std::out_of_range);
  EXPECT_THROW(b.element(5, 0), std::out_of_range);
  EXPECT_THROW(compute_basis(1), std::invalid_argument);
  HarmonicCoefficients c(5);
  EXPECT_THROW(c(5, 0), std::out_of_range);
  EXPECT_THROW(c(2, -3), std::out_of_range);
}

TEST(Basis, CacheFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "zeitlin_basis_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "b.zeb";
  const QuantizedBasis b = compute_basis(20);
  io::write_basis(path, b);
  const QuantizedBasis r = io::read_basis(path);
  ASSERT_EQ(r.n(), 20);
  for (int m = 0; m < 20; ++m) EXPECT_EQ(r.diagonal_block(m), b.diagonal_block(m));

  // header: magic, version 1, N
  std::ifstream in(path, std::ios::binary);
  char head[12];
  in.read(head, 12);
  EXPECT_EQ(std::string(head, 4), "ZEB1");
  std::uint32_t version, n;
  std::memcpy(&version, head + 4, 4);
  std::memcpy(&n, head + 8, 4);
  EXPECT_EQ(version, 1u);
  EXPECT_EQ(n, 20u);
  // size: header + sum over m of (N-m) * #degrees doubles
  std::uintmax_t doubles = 0;
  for (int m = 0; m < 20; ++m) doubles += static_cast<std::uintmax_t>(20 - m) * (20 - QuantizedBasis::first_degree(m));
  EXPECT_EQ(std::filesystem::file_size(path), 12 + 8 * doubles);

  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(io::read_basis(path), IoError);
  io::write_basis(path, b);
  std::filesystem::resize_file(path, 20);
  EXPECT_THROW(io::read_basis(path), IoError);
  EXPECT_THROW(io::read_basis(dir / "missing.zeb"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace zeitlin
