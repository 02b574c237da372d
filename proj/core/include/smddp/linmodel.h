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

#ifndef SMDDP_LINMODEL_H_
#define SMDDP_LINMODEL_H_

// Plaintext, noise-free linear-regression mathematics over horizontally
// partitioned data: min-max normalization, the sufficient statistics
// (P, V, O) = (X~'X~, X~'y, y'y) of the intercept-augmented design X~ = [1 | X],
// their aggregation, the closed-form solve and evaluation helpers.

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace smddp::linmodel {

// Attribute matrix plus response vector; the unit of horizontal partitioning.
class Dataset {
 public:
  // Throws InvalidArgumentError on zero rows, inconsistent row counts or
  // non-finite entries.
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

  Eigen::Index rows() const { return x_.rows(); }
  Eigen::Index attrs() const { return x_.cols(); }
  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }

  Dataset Subset(std::span<const Eigen::Index> row_indices) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
};

// Column-wise extremes over the d attributes followed by the response.
struct NormalizationBounds {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  Eigen::Index size() const { return min.size(); }
  Eigen::Index attrs() const { return min.size() - 1; }
  // Throws InvalidArgumentError if lengths differ, are empty, or min > max.
  void Validate() const;

  friend bool operator==(const NormalizationBounds& a,
                         const NormalizationBounds& b) {
    return a.min == b.min && a.max == b.max;
  }
};

struct NormalizeOptions {
  // Additionally divide every normalized attribute by sqrt(d + 1) so each
  // augmented row satisfies the unit-norm assumption of the functional
  // mechanism. Off by default: plain min-max normalization.
  bool bound_row_norm = false;
};

struct LocalStatistics {
  Eigen::MatrixXd p;  // (d+1) x (d+1), symmetric
  Eigen::VectorXd v;  // d+1
  double o = 0.0;

  Eigen::Index dim() const { return v.size(); }
  static LocalStatistics Zero(Eigen::Index dim);
};

struct ModelResult {
  Eigen::VectorXd w;  // intercept first
  double err = 0.0;
  NormalizationBounds bounds;
};

NormalizationBounds ComputeLocalMinMax(const Dataset& data);

// Element-wise min of mins and max of maxes.
NormalizationBounds MergeBounds(const NormalizationBounds& a,
                                const NormalizationBounds& b);

// Maps each column (attributes and response) to [0, 1]. Values outside the
// bounds raise OutOfRangeError since they indicate stale bounds; constant
// columns (min == max) map to 0.
Dataset Normalize(const Dataset& data, const NormalizationBounds& bounds,
                  const NormalizeOptions& options = {});

// Same affine attribute map as Normalize but without the range check, for
// held-out rows evaluated against a model trained on other data.
Eigen::VectorXd NormalizeFeatures(const Eigen::VectorXd& x,
                                  const NormalizationBounds& bounds,
                                  const NormalizeOptions& options = {});

LocalStatistics ComputeLocalStatistics(const Dataset& normalized);

LocalStatistics AggregateStatistics(std::span<const LocalStatistics> parts);

// Condition-number ceiling above which Solve refuses the system.
inline constexpr double kMaxConditionNumber = 1e12;

// w = P^-1 V via Cholesky. Throws SingularSystemError when P is not positive
// definite or its condition estimate exceeds kMaxConditionNumber.
Eigen::VectorXd Solve(const LocalStatistics& stats);

// w'Pw - 2w'V + O.
double ObjectiveError(const LocalStatistics& stats, const Eigen::VectorXd& w);

// w . (1, x)
double Predict(const Eigen::VectorXd& x, const Eigen::VectorXd& w);

double DenormalizePrediction(double yhat, const NormalizationBounds& bounds);

double Mse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);

}  // namespace smddp::linmodel

#endif  // SMDDP_LINMODEL_H_
