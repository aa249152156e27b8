#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "kvfem/sparse.hpp"
#include "oracles.hpp"

namespace kvfem {
namespace {

using oracle::Dense;
using oracle::dense_solve;

struct RandomSystem {
  std::vector<Triplet> triplets;
  Dense dense;
};

RandomSystem random_system(int n, unsigned seed, double density) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  RandomSystem s;
  s.dense.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && coin(rng) > density) continue;
      const double v = (i == j) ? 4.0 + val(rng) : val(rng);
      s.triplets.push_back({i, j, v});
      s.dense[i][j] += v;
    }
  }
  return s;
}

TEST(SparseMatrix, DuplicatesAreSummed) {
  const std::vector<Triplet> t{{0, 0, 1.0}, {1, 1, 2.0}, {0, 0, 3.0}, {0, 1, -1.0}, {1, 1, 0.5}};
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, t);
  EXPECT_EQ(m.nnz(), 3u);
  EXPECT_DOUBLE_EQ(m.coeff(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(m.coeff(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(m.coeff(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.coeff(1, 1), 2.5);
  EXPECT_EQ(m.find(1, 0), -1);
}

TEST(SparseMatrix, ZeroSumEntriesStayInPattern) {
  const std::vector<Triplet> t{{0, 1, 1.0}, {0, 1, -1.0}};
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, t);
  EXPECT_EQ(m.nnz(), 1u);
  EXPECT_GE(m.find(0, 1), 0);
}

TEST(SparseMatrix, RejectsOutOfRangeTriplets) {
  const std::vector<Triplet> t{{2, 0, 1.0}};
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, t), std::out_of_range);
}

TEST(SparseMatrix, MatchesDenseAccumulation) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> ri(0, 49), ci(0, 49);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<Triplet> t;
  Dense dense(50, std::vector<double>(50, 0.0));
  for (int k = 0; k < 1000; ++k) {
    Triplet e{ri(rng), ci(rng), val(rng)};
    t.push_back(e);
    dense[e.row][e.col] += e.value;
  }
  const SparseMatrix m = SparseMatrix::from_triplets(50, 50, t);
  for (int i = 0; i < 50; ++i) {
    ASSERT_LE(m.row_offsets()[i], m.row_offsets()[i + 1]);
    for (int p = m.row_offsets()[i] + 1; p < m.row_offsets()[i + 1]; ++p)
      ASSERT_LT(m.col_indices()[p - 1], m.col_indices()[p]);
  }
  const Dense got = m.to_dense();
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) EXPECT_NEAR(got[i][j], dense[i][j], 1e-14);

  std::vector<double> x(50), y(50);
  for (auto& v : x) v = val(rng);
  for (auto& v : y) v = val(rng);
  const auto mx = m.multiply(x);
  double bil = 0.0;
  for (int i = 0; i < 50; ++i) {
    double s = 0.0, mag = 0.0;
    for (int j = 0; j < 50; ++j) {
      s += dense[i][j] * x[j];
      mag += std::abs(dense[i][j] * x[j]);
    }
    EXPECT_LE(std::abs(mx[i] - s), 1e-13 * std::max(mag, 1e-300));
    bil += y[i] * s;
  }
  EXPECT_NEAR(m.bilinear(y, x), bil, 1e-12);

  const SparseMatrix mt = m.transpose();
  EXPECT_EQ(mt.rows(), 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) EXPECT_EQ(mt.coeff(j, i), m.coeff(i, j));

  std::vector<double> acc(50, 1.0);
  m.multiply_add(x, acc, -2.0);
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(acc[i], 1.0 - 2.0 * mx[i], 1e-13);
}

TEST(SparseMatrix, Norms) {
  const std::vector<Triplet> t{{0, 0, 3.0}, {0, 1, -4.0}, {1, 1, 1.0}};
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, t);
  EXPECT_DOUBLE_EQ(m.frobenius_norm(), std::sqrt(26.0));
  EXPECT_DOUBLE_EQ(m.max_abs(), 4.0);
  EXPECT_DOUBLE_EQ(norm_inf(m), 7.0);
  const std::vector<double> v{3.0, -4.0};
  EXPECT_DOUBLE_EQ(norm2(v), 5.0);
  EXPECT_DOUBLE_EQ(norm_inf(std::span<const double>(v)), 4.0);
}

TEST(SparseMatrix, SamePattern) {
  const std::vector<Triplet> a{{0, 0, 1.0}, {1, 0, 2.0}};
  const std::vector<Triplet> b{{0, 0, 5.0}, {1, 0, -1.0}};
  const std::vector<Triplet> c{{0, 0, 5.0}, {1, 1, -1.0}};
  const SparseMatrix ma = SparseMatrix::from_triplets(2, 2, a);
  EXPECT_TRUE(ma.same_pattern(SparseMatrix::from_triplets(2, 2, b)));
  EXPECT_FALSE(ma.same_pattern(SparseMatrix::from_triplets(2, 2, c)));
}

TEST(LuFactorization, SmallSystem) {
  const std::vector<Triplet> t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}};
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, t);
  const LuFactorization lu = lu_factor(m);
  const std::vector<double> b{3.0, 5.0};
  const auto x = solve(lu, b);
  EXPECT_NEAR(x[0], 0.8, 1e-15);
  EXPECT_NEAR(x[1], 1.4, 1e-15);
}

TEST(LuFactorization, RandomSystemMatchesDenseElimination) {
  const RandomSystem s = random_system(100, 42, 0.05);
  const SparseMatrix m = SparseMatrix::from_triplets(100, 100, s.triplets);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<double> b(100);
  for (auto& v : b) v = val(rng);
  const auto x = LuFactorization(m).solve(b);
  const auto ref = dense_solve(s.dense, b);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(x[i], ref[i], 1e-12);
  const auto ax = m.multiply(x);
  double r2 = 0.0;
  for (int i = 0; i < 100; ++i) r2 += (ax[i] - b[i]) * (ax[i] - b[i]);
  EXPECT_LE(std::sqrt(r2) / norm2(b), 1e-10);
}

TEST(LuFactorization, NonsymmetricPermutedSystem) {
  // Zero diagonal forces row pivoting.
  const std::vector<Triplet> t{{0, 1, 1.0}, {1, 2, 2.0}, {2, 0, 4.0}, {2, 2, 1.0}};
  const SparseMatrix m = SparseMatrix::from_triplets(3, 3, t);
  const std::vector<double> b{1.0, 4.0, 6.0};
  const auto x = LuFactorization(m).solve(b);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
  EXPECT_NEAR(x[2], 2.0, 1e-15);
}

TEST(LuFactorization, ZeroRowIsSingular) {
  const std::vector<Triplet> t{{0, 0, 1.0}, {0, 1, 2.0}, {1, 1, 0.0}, {2, 2, 1.0}};
  const SparseMatrix m = SparseMatrix::from_triplets(3, 3, t);
  EXPECT_THROW(LuFactorization{m}, SingularMatrixError);
}

TEST(LuFactorization, RankDeficientIsSingular) {
  const std::vector<Triplet> t{{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 4.0}};
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, t);
  EXPECT_THROW(LuFactorization{m}, SingularMatrixError);
}

TEST(LuFactorization, RejectsNonSquareAndSizeMismatch) {
  const std::vector<Triplet> t{{0, 0, 1.0}};
  EXPECT_THROW(LuFactorization{SparseMatrix::from_triplets(1, 2, t)}, std::invalid_argument);
  const LuFactorization lu(SparseMatrix::from_triplets(1, 1, t));
  const std::vector<double> b{1.0, 2.0};
  EXPECT_THROW(lu.solve(b), std::invalid_argument);
}

TEST(LuFactorization, SharedSymbolicAnalysis) {
  const RandomSystem s = random_system(60, 9, 0.1);
  SparseMatrix m = SparseMatrix::from_triplets(60, 60, s.triplets);
  auto symbolic = std::make_shared<const SymbolicLu>(m);
  EXPECT_TRUE(symbolic->matches(m));
  std::vector<double> b(60, 1.0);
  for (int pass = 0; pass < 3; ++pass) {
    for (auto& v : m.values()) v *= 1.5;
    const auto x = LuFactorization(m, symbolic).solve(b);
    const auto ax = m.multiply(x);
    for (int i = 0; i < 60; ++i) EXPECT_NEAR(ax[i], 1.0, 1e-12);
  }
}

TEST(RefinedSolve, ConvergesWithFactorsOfNearbyMatrix) {
  const RandomSystem s = random_system(80, 11, 0.08);
  const SparseMatrix a = SparseMatrix::from_triplets(80, 80, s.triplets);
  SparseMatrix near = a;
  for (auto& v : near.values()) v *= 1.01;
  const LuFactorization lu(near);
  std::vector<double> b(80);
  for (int i = 0; i < 80; ++i) b[i] = std::sin(i + 1.0);
  const RefinedSolve r = solve_refined(lu, a, b, 1e-14, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.backward_error, 1e-14);
  EXPECT_GT(r.sweeps, 0);
  const auto ref = dense_solve(s.dense, b);
  for (int i = 0; i < 80; ++i) EXPECT_NEAR(r.x[i], ref[i], 1e-11);
}

TEST(RefinedSolve, ReportsStallForDistantMatrix) {
  const RandomSystem s = random_system(40, 5, 0.1);
  const SparseMatrix a = SparseMatrix::from_triplets(40, 40, s.triplets);
  SparseMatrix far = a;
  for (auto& v : far.values()) v *= -3.0;
  const LuFactorization lu(far);
  const std::vector<double> b(40, 1.0);
  const RefinedSolve r = solve_refined(lu, a, b, 1e-14, 8);
  EXPECT_FALSE(r.converged);
}

}  // namespace
}  // namespace kvfem
