#include "support.hpp"
#include "zeitlin/basis.hpp"
#include "zeitlin/laplacian.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace zeitlin {
namespace {

TEST(LaplacianBlock, SmallExamples) {
  const LaplacianBlock b20 = build_block(2, 0);
  ASSERT_EQ(b20.size(), 2);
  EXPECT_NEAR(b20.diag[0], 1.0, 1e-15);
  EXPECT_NEAR(b20.diag[1], 1.0, 1e-15);
  EXPECT_NEAR(b20.offdiag[0], -1.0, 1e-15);

  const LaplacianBlock b31 = build_block(3, 1);
  ASSERT_EQ(b31.size(), 2);
  EXPECT_NEAR(b31.diag[0], 4.0, 1e-15);
  EXPECT_NEAR(b31.diag[1], 4.0, 1e-15);
  EXPECT_NEAR(b31.offdiag[0], -2.0, 1e-15);

  const LaplacianBlock b21 = build_block(2, 1);
  ASSERT_EQ(b21.size(), 1);
  EXPECT_NEAR(b21.diag[0], 2.0, 1e-15);
  EXPECT_EQ(b21.offdiag.size(), 0);
}

TEST(LaplacianBlock, RejectsBadArguments) {
  EXPECT_THROW(build_block(1, 0), std::invalid_argument);
  EXPECT_THROW(build_block(4, 4), std::invalid_argument);
  EXPECT_THROW(build_block(4, -1), std::invalid_argument);
}

// Every block of size N-m has spectrum {l(l+1) : l = m..N-1}.
TEST(LaplacianBlock, SpectrumIsLTimesLPlusOne) {
  for (int n = 2; n <= 64; ++n) {
    for (int m = 0; m < n; ++m) {
      const LaplacianBlock b = build_block(n, m);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.dense(), Eigen::EigenvaluesOnly);
      for (int k = 0; k < b.size(); ++k) {
        const double l = m + k;
        ASSERT_NEAR(es.eigenvalues()[k], l * (l + 1.0), 1e-10) << "N=" << n << " m=" << m;
      }
    }
  }
}

// The blockwise operator agrees with -sum_a [J_a, [J_a, .]] built from dense
// spin matrices, entry by entry.
TEST(QuantizedLaplacian, MatchesDenseSpinCasimir) {
  for (int n : {2, 3, 5, 8, 13}) {
    const QuantizedLaplacian lap(n);
    const auto g = test::spin_generators(n);
    const Matrix w = test::random_admissible(n, 100 + n);
    const Matrix expect = -test::adjoint_casimir(g, w);
    EXPECT_LT((lap.apply(w) - expect).norm(), 1e-12 * expect.norm()) << "N=" << n;
    EXPECT_LT((lap.apply(w, Sign::positive) + expect).norm(), 1e-12 * expect.norm());
  }
}

TEST(QuantizedLaplacian, ApplyN2DiagonalMode) {
  Matrix w = Matrix::Zero(2, 2);
  w(0, 0) = kI / std::sqrt(2.0);
  w(1, 1) = -kI / std::sqrt(2.0);
  const Matrix out = QuantizedLaplacian(2).apply(w);
  EXPECT_LT((out + 2.0 * w).norm(), 1e-15);
}

TEST(QuantizedLaplacian, SolveStreamExamples) {
  const QuantizedLaplacian lap(8);
  EXPECT_EQ(lap.solve_stream(Matrix::Zero(8, 8)).norm(), 0.0);

  const QuantizedBasis basis = compute_basis(8);
  for (const auto& [l, m] : std::vector<std::pair<int, int>>{{1, 0}, {3, 2}, {7, -5}, {4, 4}}) {
    const Matrix t = kI * basis.element(l, m);
    const Matrix w = m == 0 ? t : Matrix(t - t.adjoint());
    const Matrix p = lap.solve_stream(w);
    EXPECT_LT((p + w / (l * (l + 1.0))).norm(), 1e-13) << l << "," << m;
  }
}

TEST(QuantizedLaplacian, SolveStreamRejectsTrace) {
  const QuantizedLaplacian lap(4);
  Matrix w = test::random_admissible(4, 1);
  w(0, 0) += kI;
  EXPECT_THROW(lap.solve_stream(w), SolverError);
  const Matrix p = lap.solve_stream(w, TracePolicy::project);
  EXPECT_LT(std::abs(p.trace()), 1e-14);
  EXPECT_THROW(lap.solve_stream(Matrix::Zero(3, 3)), std::invalid_argument);
  EXPECT_THROW(lap.apply(Matrix::Zero(5, 5)), std::invalid_argument);
}

class RoundTrip : public ::testing::TestWithParam<int> {};

TEST_P(RoundTrip, ApplyInvertsSolve) {
  const int n = GetParam();
  const QuantizedLaplacian lap(n);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Matrix w = test::random_admissible(n, seed);
    const Matrix p = lap.solve_stream(w);
    EXPECT_LT((lap.apply(p) - w).norm(), 1e-10 * w.norm());
    EXPECT_LT(skew_residual(p), 1e-12 * p.norm());
    EXPECT_LT(std::abs(p.trace()), 1e-12 * p.norm());

    // solve(apply(P)) recovers a traceless P
    const Matrix back = lap.solve_stream(lap.apply(p));
    EXPECT_LT((back - p).norm(), 1e-10 * p.norm());
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, RoundTrip, ::testing::Values(16, 64, 128));

TEST(QuantizedLaplacian, PreservesSkewHermitianStructure) {
  const QuantizedLaplacian lap(33);
  const Matrix w = test::random_admissible(33, 9);
  const Matrix a = lap.apply(w);
  EXPECT_LT(skew_residual(a), 1e-12 * a.norm());
  EXPECT_LT(std::abs(a.trace()), 1e-12 * a.norm());
}

// The physical operator is negative semidefinite in the trace inner product.
TEST(QuantizedLaplacian, NegativeSemidefinite) {
  const QuantizedLaplacian lap(20);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix w = test::random_admissible(20, seed);
    EXPECT_LE(real_inner(w, lap.apply(w)), 0.0);
    // -<W, Delta W> >= 2 |W|^2 since the smallest nonzero eigenvalue is 2
    EXPECT_GE(-real_inner(w, lap.apply(w)), 2.0 * w.squaredNorm() * (1 - 1e-12));
  }
}

TEST(QuantizedLaplacian, FreeFunctionsMatchClass) {
  const Matrix w = test::random_admissible(12, 4);
  const QuantizedLaplacian lap(12);
  EXPECT_EQ((apply_laplacian(w) - lap.apply(w)).norm(), 0.0);
  EXPECT_EQ((solve_stream(w) - lap.solve_stream(w)).norm(), 0.0);
}

}  // namespace
}  // namespace zeitlin
