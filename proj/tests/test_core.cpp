#include <gtest/gtest.h>

#include <random>

#include "disc/core.hpp"
#include "disc/error.hpp"

namespace disc {
namespace {

InstanceMatrix small_signs() {
  // [[1, -1, 0], [0, 1, 1]]
  return InstanceMatrix(2, 3, {{0, 0, 1}, {0, 1, -1}, {1, 1, 1}, {1, 2, 1}}, InstanceKind::SignMatrix);
}

TEST(InstanceMatrix, SortsAndIndexesRowsAndColumns) {
  InstanceMatrix a(2, 3, {{1, 2, 1}, {0, 1, -1}, {1, 1, 1}, {0, 0, 1}}, InstanceKind::SignMatrix);
  ASSERT_EQ(a.nnz(), 4u);
  EXPECT_EQ(a.row(0).size(), 2u);
  EXPECT_EQ(a.row(0)[0].col, 0);
  EXPECT_EQ(a.row(0)[1].col, 1);
  EXPECT_EQ(a.col(1).size(), 2u);
  EXPECT_EQ(a.col(1)[0].row, 0);
  EXPECT_EQ(a.col(1)[1].row, 1);
  EXPECT_DOUBLE_EQ(a.squared_column_norm(1), 2.0);
}

TEST(InstanceMatrix, DropsExplicitZeros) {
  InstanceMatrix a(1, 2, {{0, 0, 0.0}, {0, 1, 1.0}}, InstanceKind::SignMatrix);
  EXPECT_EQ(a.nnz(), 1u);
}

TEST(InstanceMatrix, RejectsBadInput) {
  EXPECT_THROW(InstanceMatrix(1, 1, {{0, 1, 1}}, InstanceKind::General), InputError);
  EXPECT_THROW(InstanceMatrix(1, 1, {{0, 0, 1}, {0, 0, 1}}, InstanceKind::General), InputError);
  EXPECT_THROW(InstanceMatrix(1, 1, {{0, 0, 0.5}}, InstanceKind::SignMatrix), InputError);
  EXPECT_THROW(InstanceMatrix(2, 1, {{0, 0, 0.8}, {1, 0, 0.8}}, InstanceKind::UnitColumns), InputError);
  EXPECT_THROW(InstanceMatrix(1, 1, {{0, 0, std::nan("")}}, InstanceKind::General), InputError);
}

TEST(InstanceMatrix, ColumnSparsity) {
  EXPECT_EQ(column_sparsity(small_signs()), 2);
  EXPECT_EQ(column_sparsity(InstanceMatrix(0, 0, {}, InstanceKind::General)), 0);
}

TEST(DiscEval, RowSumsAndArgmax) {
  const auto a = small_signs();
  Coloring x(3);
  x << 1, 1, 1;
  const auto rep = disc_eval(a, x);
  EXPECT_DOUBLE_EQ(rep.per_row(0), 0.0);
  EXPECT_DOUBLE_EQ(rep.per_row(1), 2.0);
  EXPECT_DOUBLE_EQ(rep.max_abs, 2.0);
  EXPECT_EQ(rep.argmax_row, 1);
}

TEST(DiscEval, TiesGoToSmallestRow) {
  const auto a = small_signs();
  Coloring x(3);
  x << 1, -1, 1;
  const auto rep = disc_eval(a, x);
  EXPECT_DOUBLE_EQ(rep.max_abs, 2.0);
  EXPECT_EQ(rep.argmax_row, 0);
}

TEST(DiscEval, LengthMismatchThrows) {
  EXPECT_THROW(disc_eval(small_signs(), Coloring::Zero(2)), InputError);
}

TEST(DiscEval, MatchesDenseProduct) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Entry> e;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 30; ++j)
      if ((i + 3 * j) % 4 == 0) e.push_back({i, j, u(rng)});
  InstanceMatrix a(20, 30, e, InstanceKind::General);
  Coloring x(30);
  for (int j = 0; j < 30; ++j) x(j) = u(rng);
  const Eigen::VectorXd ref = a.dense() * x;
  const auto rep = disc_eval(a, x);
  EXPECT_LT((rep.per_row - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(rep.max_abs, ref.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AppendNegations, StacksNegatedRows) {
  const auto a = append_negations(small_signs());
  EXPECT_EQ(a.rows(), 4);
  Coloring x(3);
  x << 1, 1, -1;
  const auto rep = disc_eval(a, x);
  EXPECT_DOUBLE_EQ(rep.per_row(2), -rep.per_row(0));
  EXPECT_DOUBLE_EQ(rep.per_row(3), -rep.per_row(1));
  EXPECT_EQ(a.kind(), InstanceKind::SignMatrix);
}

TEST(AppendNegations, UnitColumnsBecomeGeneral) {
  InstanceMatrix a(1, 1, {{0, 0, 1.0}}, InstanceKind::UnitColumns);
  EXPECT_EQ(append_negations(a).kind(), InstanceKind::General);
}

TEST(PairwiseSum, ExactOnSmallIntegers) {
  std::vector<double> v(1000, 1.0);
  EXPECT_DOUBLE_EQ(pairwise_sum(v), 1000.0);
  EXPECT_DOUBLE_EQ(pairwise_sum({}), 0.0);
}

TEST(Coloring, FullColoringCheck) {
  Coloring x(2);
  x << 1, -1;
  EXPECT_TRUE(is_full_coloring(x));
  x(1) = 0.5;
  EXPECT_FALSE(is_full_coloring(x));
}

}  // namespace
}  // namespace disc
