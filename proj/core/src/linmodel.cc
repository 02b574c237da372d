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

#include <cmath>
#include <string>

#include "smddp/error.h"

namespace smddp::linmodel {
namespace {

double ScaleColumn(double value, double lo, double hi) {
  if (hi == lo) return 0.0;
  return (value - lo) / (hi - lo);
}

void CheckDims(const LocalStatistics& s, Eigen::Index dim, const char* what) {
  if (s.v.size() != dim || s.p.rows() != dim || s.p.cols() != dim) {
    throw DimensionError(std::string(what) + ": statistics dimension mismatch");
  }
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() < 1) throw InvalidArgumentError("dataset must have at least one row");
  if (x_.rows() != y_.size()) {
    throw InvalidArgumentError("dataset: X has " + std::to_string(x_.rows()) +
                               " rows but y has " + std::to_string(y_.size()));
  }
  if (!x_.allFinite() || !y_.allFinite()) {
    throw InvalidArgumentError("dataset contains non-finite values");
  }
}

Dataset Dataset::Subset(std::span<const Eigen::Index> row_indices) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(row_indices.size()), attrs());
  Eigen::VectorXd y(static_cast<Eigen::Index>(row_indices.size()));
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    Eigen::Index r = row_indices[i];
    if (r < 0 || r >= rows()) throw OutOfRangeError("Dataset::Subset: row index out of range");
    x.row(static_cast<Eigen::Index>(i)) = x_.row(r);
    y(static_cast<Eigen::Index>(i)) = y_(r);
  }
  return Dataset(std::move(x), std::move(y));
}

void NormalizationBounds::Validate() const {
  if (min.size() != max.size() || min.size() < 1) {
    throw InvalidArgumentError("normalization bounds: inconsistent lengths");
  }
  for (Eigen::Index j = 0; j < min.size(); ++j) {
    if (!(min(j) <= max(j))) {
      throw InvalidArgumentError("normalization bounds: min > max in column " +
                                 std::to_string(j));
    }
  }
}

LocalStatistics LocalStatistics::Zero(Eigen::Index dim) {
  return {Eigen::MatrixXd::Zero(dim, dim), Eigen::VectorXd::Zero(dim), 0.0};
}

NormalizationBounds ComputeLocalMinMax(const Dataset& data) {
  const Eigen::Index d = data.attrs();
  NormalizationBounds b{Eigen::VectorXd(d + 1), Eigen::VectorXd(d + 1)};
  if (d > 0) {
    b.min.head(d) = data.x().colwise().minCoeff().transpose();
    b.max.head(d) = data.x().colwise().maxCoeff().transpose();
  }
  b.min(d) = data.y().minCoeff();
  b.max(d) = data.y().maxCoeff();
  return b;
}

NormalizationBounds MergeBounds(const NormalizationBounds& a,
                                const NormalizationBounds& b) {
  if (a.min.size() != b.min.size() || a.max.size() != b.max.size()) {
    throw DimensionError("MergeBounds: length mismatch");
  }
  return {a.min.cwiseMin(b.min), a.max.cwiseMax(b.max)};
}

Dataset Normalize(const Dataset& data, const NormalizationBounds& bounds,
                  const NormalizeOptions& options) {
  bounds.Validate();
  const Eigen::Index d = data.attrs();
  if (bounds.attrs() != d) throw DimensionError("Normalize: bounds do not match attribute count");

  auto check = [&](double v, Eigen::Index col, Eigen::Index row) {
    if (v < bounds.min(col) || v > bounds.max(col)) {
      throw OutOfRangeError("Normalize: value in row " + std::to_string(row) +
                            ", column " + std::to_string(col) +
                            " lies outside the normalization bounds");
    }
  };

  const double row_scale =
      options.bound_row_norm ? 1.0 / std::sqrt(static_cast<double>(d + 1)) : 1.0;
  Eigen::MatrixXd x(data.rows(), d);
  Eigen::VectorXd y(data.rows());
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index j = 0; j < d; ++j) {
      double v = data.x()(r, j);
      check(v, j, r);
      x(r, j) = ScaleColumn(v, bounds.min(j), bounds.max(j)) * row_scale;
    }
    check(data.y()(r), d, r);
    y(r) = ScaleColumn(data.y()(r), bounds.min(d), bounds.max(d));
  }
  return Dataset(std::move(x), std::move(y));
}

Eigen::VectorXd NormalizeFeatures(const Eigen::VectorXd& x,
                                  const NormalizationBounds& bounds,
                                  const NormalizeOptions& options) {
  const Eigen::Index d = x.size();
  if (bounds.attrs() != d) throw DimensionError("NormalizeFeatures: dimension mismatch");
  const double row_scale =
      options.bound_row_norm ? 1.0 / std::sqrt(static_cast<double>(d + 1)) : 1.0;
  Eigen::VectorXd out(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    out(j) = ScaleColumn(x(j), bounds.min(j), bounds.max(j)) * row_scale;
  }
  return out;
}

LocalStatistics ComputeLocalStatistics(const Dataset& normalized) {
  const Eigen::Index dim = normalized.attrs() + 1;
  Eigen::MatrixXd augmented(normalized.rows(), dim);
  augmented.col(0).setOnes();
  augmented.rightCols(dim - 1) = normalized.x();

  LocalStatistics s;
  s.p = Eigen::MatrixXd::Zero(dim, dim);
  s.p.selfadjointView<Eigen::Lower>().rankUpdate(augmented.transpose());
  // Mirror the computed triangle so P is exactly symmetric.
  s.p = s.p.selfadjointView<Eigen::Lower>();
  s.v = augmented.transpose() * normalized.y();
  s.o = normalized.y().squaredNorm();
  return s;
}

LocalStatistics AggregateStatistics(std::span<const LocalStatistics> parts) {
  if (parts.empty()) throw InvalidArgumentError("AggregateStatistics: no parts");
  LocalStatistics total = LocalStatistics::Zero(parts.front().dim());
  for (const LocalStatistics& part : parts) {
    CheckDims(part, total.dim(), "AggregateStatistics");
    total.p += part.p;
    total.v += part.v;
    total.o += part.o;
  }
  return total;
}

Eigen::VectorXd Solve(const LocalStatistics& stats) {
  CheckDims(stats, stats.v.size(), "Solve");
  if (!stats.p.allFinite() || !stats.v.allFinite()) {
    throw InvalidArgumentError("Solve: non-finite statistics");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(stats.p);
  if (llt.info() != Eigen::Success) {
    throw SingularSystemError("Solve: P is not positive definite");
  }
  const double rcond = llt.rcond();
  if (!(rcond * kMaxConditionNumber >= 1.0)) {
    throw SingularSystemError("Solve: P is ill-conditioned (condition estimate " +
                              std::to_string(1.0 / rcond) + ")");
  }
  Eigen::VectorXd w = llt.solve(stats.v);
  // One step of iterative refinement.
  Eigen::VectorXd residual = stats.v - stats.p * w;
  w += llt.solve(residual);
  return w;
}

double ObjectiveError(const LocalStatistics& stats, const Eigen::VectorXd& w) {
  CheckDims(stats, w.size(), "ObjectiveError");
  return w.dot(stats.p * w) - 2.0 * w.dot(stats.v) + stats.o;
}

double Predict(const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  if (w.size() != x.size() + 1) throw DimensionError("Predict: dimension mismatch");
  return w(0) + w.tail(x.size()).dot(x);
}

double DenormalizePrediction(double yhat, const NormalizationBounds& bounds) {
  const Eigen::Index r = bounds.size() - 1;
  return yhat * (bounds.max(r) - bounds.min(r)) + bounds.min(r);
}

double Mse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
  if (predicted.size() != actual.size()) throw DimensionError("Mse: length mismatch");
  if (predicted.size() == 0) throw InvalidArgumentError("Mse: empty input");
  return (predicted - actual).squaredNorm() / static_cast<double>(predicted.size());
}

}  // namespace smddp::linmodel
