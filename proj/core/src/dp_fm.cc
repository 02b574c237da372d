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

#include "smddp/dp_fm.h"

#include <cmath>
#include <string>

#include "smddp/error.h"

namespace smddp::dpfm {

using linmodel::LocalStatistics;

std::string_view ScalingModeName(ScalingMode mode) {
  switch (mode) {
    case ScalingMode::kGeometricPerParty:
      return "geometric";
    case ScalingMode::kDeterministicSqrtP:
      return "sqrt-p";
    case ScalingMode::kNone:
      return "none";
  }
  return "unknown";
}

ScalingMode ParseScalingMode(std::string_view name) {
  if (name == "geometric") return ScalingMode::kGeometricPerParty;
  if (name == "sqrt-p") return ScalingMode::kDeterministicSqrtP;
  if (name == "none") return ScalingMode::kNone;
  throw InvalidArgumentError("unknown scaling mode '" + std::string(name) +
                             "' (expected geometric, sqrt-p or none)");
}

void PrivacyParams::Validate() const {
  if (!(epsilon_global > 0.0) || !std::isfinite(epsilon_global)) {
    throw InvalidArgumentError("privacy: epsilon must be positive and finite");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgumentError("privacy: alpha must be positive and finite");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgumentError("privacy: p must lie in (0, 1)");
  }
}

NoiseSpec NoiseSpec::Create(double delta, double epsilon_local) {
  if (!(delta > 0.0) || !(epsilon_local > 0.0)) {
    throw InvalidArgumentError("noise spec: delta and epsilon must be positive");
  }
  return {delta, epsilon_local, delta / epsilon_local};
}

double GlobalSensitivity(Eigen::Index attrs) {
  if (attrs < 0) throw InvalidArgumentError("GlobalSensitivity: negative attribute count");
  const double k = static_cast<double>(attrs + 1);
  return 2.0 * k * k;
}

double LocalBudget(const PrivacyParams& params) {
  params.Validate();
  return params.alpha * params.epsilon_global;
}

double SampleLaplace(double scale, RandomStream& rng) {
  if (!(scale > 0.0)) throw InvalidArgumentError("SampleLaplace: scale must be positive");
  const double u = rng.UniformCentered();
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

std::uint64_t SampleGeometric(double p, RandomStream& rng) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgumentError("SampleGeometric: p must lie in (0, 1)");
  // Number of trials up to and including the first success.
  const double u = rng.UniformOpen();
  const double k = std::floor(std::log(u) / std::log1p(-p));
  return static_cast<std::uint64_t>(k) + 1;
}

double ScalingFactor(const PrivacyParams& params, RandomStream& rng) {
  switch (params.scaling) {
    case ScalingMode::kGeometricPerParty:
      return static_cast<double>(SampleGeometric(params.p, rng));
    case ScalingMode::kDeterministicSqrtP:
      return std::sqrt(params.p);
    case ScalingMode::kNone:
      return 1.0;
  }
  return 1.0;
}

namespace {

LocalStatistics Perturb(const LocalStatistics& stats, double scale, double factor,
                        RandomStream& rng) {
  LocalStatistics out = stats;
  const Eigen::Index dim = stats.dim();
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i; j < dim; ++j) {
      out.p(i, j) += factor * SampleLaplace(scale, rng);
      out.p(j, i) = out.p(i, j);
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) out.v(i) += factor * SampleLaplace(scale, rng);
  out.o += factor * SampleLaplace(scale, rng);
  return out;
}

}  // namespace

LocalStatistics NoiseInject(const LocalStatistics& stats, const NoiseSpec& spec,
                            const PrivacyParams& params, RandomStream& rng) {
  params.Validate();
  const double factor = ScalingFactor(params, rng);
  return Perturb(stats, spec.scale, factor, rng);
}

LocalStatistics CdpInject(const LocalStatistics& aggregated, double delta,
                          double epsilon, RandomStream& rng) {
  const NoiseSpec spec = NoiseSpec::Create(delta, epsilon);
  return Perturb(aggregated, spec.scale, 1.0, rng);
}

OptimizeResult Optimize(const LocalStatistics& noisy, const TrimParams& params) {
  if (!(params.ridge >= 0.0) || !(params.eig_floor >= 0.0) ||
      !(params.ridge + params.eig_floor > 0.0)) {
    throw InvalidArgumentError(
        "Optimize: ridge and eig_floor must be non-negative and not both zero");
  }
  const Eigen::Index dim = noisy.dim();
  if (noisy.p.rows() != dim || noisy.p.cols() != dim) {
    throw DimensionError("Optimize: statistics dimension mismatch");
  }
  if (!noisy.p.allFinite() || !noisy.v.allFinite() || !std::isfinite(noisy.o)) {
    throw InvalidArgumentError("Optimize: non-finite statistics");
  }

  const Eigen::MatrixXd sym = 0.5 * (noisy.p + noisy.p.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw SingularSystemError("Optimize: eigendecomposition failed");
  }
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < dim; ++i) {
    lambda(i) = std::max(lambda(i), params.eig_floor) + params.ridge;
  }
  const Eigen::MatrixXd& basis = eig.eigenvectors();

  OptimizeResult result;
  result.repaired.p = basis * lambda.asDiagonal() * basis.transpose();
  result.repaired.p = result.repaired.p.selfadjointView<Eigen::Upper>();
  result.repaired.v = noisy.v;
  result.repaired.o = noisy.o;

  result.w = basis * (basis.transpose() * noisy.v).cwiseQuotient(lambda);
  // Refine against the reconstructed matrix that is actually returned.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(result.repaired.p);
  if (ldlt.info() == Eigen::Success) {
    for (int step = 0; step < 2; ++step) {
      Eigen::VectorXd residual = noisy.v - result.repaired.p * result.w;
      Eigen::VectorXd correction = ldlt.solve(residual);
      if (!correction.allFinite()) break;
      result.w += correction;
    }
  }
  if (!result.w.allFinite()) {
    throw SingularSystemError("Optimize: repaired system produced non-finite coefficients");
  }
  return result;
}

}  // namespace smddp::dpfm
