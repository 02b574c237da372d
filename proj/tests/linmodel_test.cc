/*
 * Copyright 2026 The smddp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "smddp/linmodel.h"

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "smddp/error.h"
#include "support/oracles.h"

namespace smddp::linmodel {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Dataset Make(std::initializer_list<std::initializer_list<double>> x,
             std::initializer_list<double> y) {
  MatrixXd m(static_cast<Eigen::Index>(x.size()),
             x.size() ? static_cast<Eigen::Index>(x.begin()->size()) : 0);
  Eigen::Index r = 0;
  for (const auto& row : x) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  VectorXd yy(static_cast<Eigen::Index>(y.size()));
  Eigen::Index i = 0;
  for (double v : y) yy(i++) = v;
  return Dataset(m, yy);
}

NormalizationBounds Bounds(std::vector<double> lo, std::vector<double> hi) {
  return {Eigen::Map<VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
          Eigen::Map<VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()))};
}

TEST(DatasetTest, RejectsInvalidShapes) {
  EXPECT_THROW(Dataset(MatrixXd(0, 2), VectorXd(0)), InvalidArgumentError);
  EXPECT_THROW(Dataset(MatrixXd::Zero(3, 2), VectorXd::Zero(2)), InvalidArgumentError);
  MatrixXd x = MatrixXd::Zero(2, 1);
  x(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Dataset(x, VectorXd::Zero(2)), InvalidArgumentError);
}

TEST(MinMaxTest, ColumnScan) {
  auto b = ComputeLocalMinMax(Make({{1, 4}, {3, 2}}, {5, 7}));
  EXPECT_EQ(b, Bounds({1, 2, 5}, {3, 4, 7}));
}

TEST(MinMaxTest, SingleRow) {
  EXPECT_EQ(ComputeLocalMinMax(Make({{2}}, {9})), Bounds({2, 9}, {2, 9}));
}

TEST(MinMaxTest, ConstantZeroData) {
  Dataset d(MatrixXd::Zero(3, 2), VectorXd::Zero(3));
  EXPECT_EQ(ComputeLocalMinMax(d), Bounds({0, 0, 0}, {0, 0, 0}));
}

TEST(MinMaxTest, MatchesNaiveScanOnRandomData) {
  Dataset d = testing::RandomDataset(200, 6, 11);
  VectorXd lo, hi;
  testing::NaiveMinMax(d.x(), d.y(), lo, hi);
  auto b = ComputeLocalMinMax(d);
  EXPECT_EQ(b.min, lo);
  EXPECT_EQ(b.max, hi);
}

TEST(MergeBoundsTest, ElementWise) {
  auto m = MergeBounds(Bounds({0, 1}, {2, 3}), Bounds({1, 0}, {1, 5}));
  EXPECT_EQ(m, Bounds({0, 0}, {2, 5}));
}

TEST(MergeBoundsTest, IdempotentCommutativeAssociative) {
  auto a = Bounds({0, -1, 3}, {2, 4, 8});
  auto b = Bounds({-2, 0, 5}, {1, 9, 6});
  auto c = Bounds({1, -3, 0}, {7, 2, 5});
  EXPECT_EQ(MergeBounds(a, a), a);
  EXPECT_EQ(MergeBounds(a, b), MergeBounds(b, a));
  EXPECT_EQ(MergeBounds(MergeBounds(a, b), c), MergeBounds(a, MergeBounds(b, c)));
}

TEST(MergeBoundsTest, LengthMismatch) {
  EXPECT_THROW(MergeBounds(Bounds({0}, {1}), Bounds({0, 0}, {1, 1})), DimensionError);
}

TEST(NormalizeTest, EndpointsAndMidpoint) {
  Dataset d = Make({{1}, {3}, {2}}, {1, 3, 2});
  Dataset n = Normalize(d, Bounds({1, 1}, {3, 3}));
  EXPECT_DOUBLE_EQ(n.x()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(n.x()(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(n.x()(2, 0), 0.5);
  EXPECT_DOUBLE_EQ(n.y()(2), 0.5);
}

TEST(NormalizeTest, ConstantColumnMapsToZero) {
  Dataset d = Make({{4}, {4}}, {1, 2});
  Dataset n = Normalize(d, Bounds({4, 1}, {4, 2}));
  EXPECT_EQ(n.x()(0, 0), 0.0);
  EXPECT_EQ(n.x()(1, 0), 0.0);
}

TEST(NormalizeTest, OutOfBoundsValueIsRejected) {
  Dataset d = Make({{5}}, {1});
  EXPECT_THROW(Normalize(d, Bounds({1, 0}, {3, 2})), OutOfRangeError);
}

TEST(NormalizeTest, OutputInUnitInterval) {
  Dataset d = testing::RandomDataset(300, 5, 3);
  Dataset n = Normalize(d, ComputeLocalMinMax(d));
  EXPECT_GE(n.x().minCoeff(), 0.0);
  EXPECT_LE(n.x().maxCoeff(), 1.0);
  EXPECT_GE(n.y().minCoeff(), 0.0);
  EXPECT_LE(n.y().maxCoeff(), 1.0);
}

TEST(NormalizeTest, RowNormBoundOption) {
  Dataset d = testing::RandomDataset(100, 8, 4);
  Dataset n = Normalize(d, ComputeLocalMinMax(d), {.bound_row_norm = true});
  for (Eigen::Index r = 0; r < n.rows(); ++r) {
    EXPECT_LE(n.x().row(r).squaredNorm(), 1.0 + 1e-12);
  }
}

TEST(StatisticsTest, HandComputed) {
  auto s = ComputeLocalStatistics(Make({{1}, {0}}, {1, 0}));
  MatrixXd p(2, 2);
  p << 2, 1, 1, 1;
  EXPECT_EQ(s.p, p);
  EXPECT_EQ(s.v, (VectorXd(2) << 1, 1).finished());
  EXPECT_EQ(s.o, 1.0);
}

TEST(StatisticsTest, NoAttributes) {
  auto s = ComputeLocalStatistics(Dataset(MatrixXd(2, 0), (VectorXd(2) << 1, 2).finished()));
  EXPECT_EQ(s.p, MatrixXd::Constant(1, 1, 2.0));
  EXPECT_EQ(s.v, VectorXd::Constant(1, 3.0));
  EXPECT_EQ(s.o, 5.0);
}

TEST(StatisticsTest, ZeroResponse) {
  auto s = ComputeLocalStatistics(Dataset(MatrixXd::Ones(4, 3), VectorXd::Zero(4)));
  EXPECT_TRUE(s.v.isZero(0.0));
  EXPECT_EQ(s.o, 0.0);
}

TEST(StatisticsTest, MatchesNaiveAndIsSymmetricPsd) {
  Dataset d = testing::RandomDataset(257, 7, 9);
  auto s = ComputeLocalStatistics(d);
  auto ref = testing::NaiveStatistics(d.x(), d.y());
  EXPECT_LE((s.p - ref.p).norm(), 1e-10 * ref.p.norm());
  EXPECT_LE((s.v - ref.v).norm(), 1e-10 * ref.v.norm());
  EXPECT_NEAR(s.o, ref.o, 1e-10 * ref.o);
  EXPECT_EQ(s.p, s.p.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(s.p);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9);
  EXPECT_GE(s.o, 0.0);
}

TEST(AggregateTest, HalvesEqualWhole) {
  Dataset d = testing::RandomDataset(100, 4, 2);
  std::vector<Eigen::Index> a, b;
  for (Eigen::Index i = 0; i < 100; ++i) (i % 2 ? a : b).push_back(i);
  std::vector<LocalStatistics> parts{ComputeLocalStatistics(d.Subset(a)),
                                     ComputeLocalStatistics(d.Subset(b))};
  auto total = AggregateStatistics(parts);
  auto pooled = ComputeLocalStatistics(d);
  EXPECT_LE((total.p - pooled.p).cwiseAbs().maxCoeff(), 1e-10 * pooled.p.cwiseAbs().maxCoeff());
  EXPECT_LE((total.v - pooled.v).cwiseAbs().maxCoeff(), 1e-10 * pooled.v.cwiseAbs().maxCoeff());
  EXPECT_NEAR(total.o, pooled.o, 1e-10 * pooled.o);
}

TEST(AggregateTest, SingleAndPermutation) {
  std::vector<LocalStatistics> parts;
  for (int k = 0; k < 4; ++k) {
    parts.push_back(ComputeLocalStatistics(testing::RandomDataset(20, 3, 100 + k)));
  }
  auto one = AggregateStatistics(std::span(parts).first(1));
  EXPECT_EQ(one.p, parts[0].p);
  auto forward = AggregateStatistics(parts);
  std::vector<LocalStatistics> reversed(parts.rbegin(), parts.rend());
  auto backward = AggregateStatistics(reversed);
  EXPECT_LE((forward.p - backward.p).cwiseAbs().maxCoeff(), 1e-12 * forward.p.norm());
  EXPECT_NEAR(forward.o, backward.o, 1e-12 * forward.o);
}

TEST(AggregateTest, Errors) {
  EXPECT_THROW(AggregateStatistics({}), InvalidArgumentError);
  std::vector<LocalStatistics> parts{LocalStatistics::Zero(2), LocalStatistics::Zero(3)};
  EXPECT_THROW(AggregateStatistics(parts), DimensionError);
}

TEST(SolveTest, IdentityAndDiagonal) {
  LocalStatistics s = LocalStatistics::Zero(3);
  s.p.setIdentity();
  s.v << 1, -2, 3;
  EXPECT_LE((Solve(s) - s.v).norm(), 1e-15);

  LocalStatistics t = LocalStatistics::Zero(2);
  t.p << 2, 0, 0, 4;
  t.v << 2, 8;
  VectorXd w = Solve(t);
  EXPECT_NEAR(w(0), 1.0, 1e-15);
  EXPECT_NEAR(w(1), 2.0, 1e-15);
}

TEST(SolveTest, RecoversPlantedCoefficients) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd x(400, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(gen);
  VectorXd beta(7);
  beta << 0.3, -1, 2, 0.5, -0.25, 1.5, 0.75;
  VectorXd y = (x * beta.tail(6)).array() + beta(0);
  VectorXd w = Solve(ComputeLocalStatistics(Dataset(x, y)));
  EXPECT_LE((w - beta).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveTest, ResidualBound) {
  auto s = ComputeLocalStatistics(testing::RandomDataset(500, 10, 8));
  VectorXd w = Solve(s);
  EXPECT_LE((s.p * w - s.v).norm() / std::max(1.0, s.v.norm()), 1e-8);
}

TEST(SolveTest, SingularAndIllConditionedRejected) {
  LocalStatistics s = LocalStatistics::Zero(2);
  s.p << 1, 1, 1, 1;
  s.v << 1, 1;
  EXPECT_THROW(Solve(s), SingularSystemError);
  s.p << 1, 0, 0, 1e-14;
  EXPECT_THROW(Solve(s), SingularSystemError);
}

TEST(SolveTest, MinimizesObjective) {
  auto s = ComputeLocalStatistics(testing::RandomDataset(300, 5, 21));
  VectorXd w = Solve(s);
  const double best = ObjectiveError(s, w);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    VectorXd delta(w.size());
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = g(gen);
    delta *= 1e-3 / delta.norm();
    EXPECT_GE(ObjectiveError(s, w + delta), best - 1e-9);
  }
}

TEST(ObjectiveErrorTest, ZeroWeightsGiveO) {
  auto s = ComputeLocalStatistics(testing::RandomDataset(30, 2, 1));
  EXPECT_EQ(ObjectiveError(s, VectorXd::Zero(3)), s.o);
}

TEST(ObjectiveErrorTest, EqualsRowWiseRss) {
  Dataset d = Normalize(testing::RandomDataset(250, 4, 12),
                        ComputeLocalMinMax(testing::RandomDataset(250, 4, 12)));
  auto s = ComputeLocalStatistics(d);
  VectorXd w = Solve(s);
  double rss = 0.0;
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    const double e = w(0) + d.x().row(r).dot(w.tail(4)) - d.y()(r);
    rss += e * e;
  }
  EXPECT_NEAR(ObjectiveError(s, w), rss, 1e-8 * rss);
}

TEST(ObjectiveErrorTest, PerfectFitIsZero) {
  Dataset d = Make({{0}, {1}, {0.5}}, {1, 3, 2});
  auto s = ComputeLocalStatistics(d);
  EXPECT_NEAR(ObjectiveError(s, Solve(s)), 0.0, 1e-8);
}

TEST(ObjectiveErrorTest, NonNegativeForAnyWeights) {
  auto s = ComputeLocalStatistics(testing::RandomDataset(80, 3, 13));
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g(0.0, 10.0);
  for (int t = 0; t < 100; ++t) {
    VectorXd w(4);
    for (Eigen::Index i = 0; i < 4; ++i) w(i) = g(gen);
    EXPECT_GE(ObjectiveError(s, w), -1e-9 * std::max(1.0, w.squaredNorm() * s.p.norm()));
  }
}

TEST(PredictTest, Examples) {
  EXPECT_EQ(Predict(VectorXd::Constant(3, 0.7), VectorXd::Zero(4)), 0.0);
  EXPECT_EQ(Predict((VectorXd(2) << 0.2, 0.9).finished(), (VectorXd(3) << 4, 0, 0).finished()),
            4.0);
  EXPECT_EQ(Predict(VectorXd::Constant(1, 3.0), (VectorXd(2) << 1, 2).finished()), 7.0);
  EXPECT_THROW(Predict(VectorXd::Zero(2), VectorXd::Zero(2)), DimensionError);
}

TEST(DenormalizeTest, EndpointsAndRoundTrip) {
  auto b = Bounds({0, -3}, {1, 11});
  EXPECT_EQ(DenormalizePrediction(0.0, b), -3.0);
  EXPECT_EQ(DenormalizePrediction(1.0, b), 11.0);
  for (double v : {-3.0, -1.25, 0.0, 4.5, 11.0}) {
    Dataset d = Make({{0.5}}, {v});
    const double yn = Normalize(d, b).y()(0);
    EXPECT_NEAR(DenormalizePrediction(yn, b), v, 1e-12);
  }
}

TEST(MseTest, Examples) {
  VectorXd a(2), b(2);
  a << 1, 3;
  b << 2, 1;
  EXPECT_DOUBLE_EQ(Mse(a, b), 2.5);
  EXPECT_EQ(Mse(a, a), 0.0);
  EXPECT_NEAR(Mse(a.array() + 0.5, a), 0.25, 1e-15);
  EXPECT_THROW(Mse(a, VectorXd(3)), DimensionError);
  EXPECT_THROW(Mse(VectorXd(0), VectorXd(0)), InvalidArgumentError);
}

TEST(DistributedTest, SplitAggregateMatchesPooledSolve) {
  Dataset d = testing::RandomDataset(600, 9, 77);
  auto bounds = ComputeLocalMinMax(d);
  Dataset n = Normalize(d, bounds);
  auto pooled = ComputeLocalStatistics(n);
  for (int k : {1, 2, 3, 7, 16}) {
    std::vector<LocalStatistics> parts;
    for (int part = 0; part < k; ++part) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index r = part; r < n.rows(); r += k) idx.push_back(r);
      parts.push_back(ComputeLocalStatistics(n.Subset(idx)));
    }
    auto total = AggregateStatistics(parts);
    EXPECT_LE((total.p - pooled.p).cwiseAbs().maxCoeff(), 1e-10 * pooled.p.cwiseAbs().maxCoeff());
    VectorXd w1 = Solve(total), w2 = Solve(pooled);
    EXPECT_LE((w1 - w2).cwiseAbs().maxCoeff(), 1e-8 * w2.cwiseAbs().maxCoeff()) << "k=" << k;
  }
}

}  // namespace
}  // namespace smddp::linmodel
