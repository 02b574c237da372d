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

#ifndef SMDDP_DP_FM_H_
#define SMDDP_DP_FM_H_

// Functional-mechanism differential privacy for the linear-regression
// objective w'Pw - 2w'V + O: Laplace perturbation of every polynomial
// coefficient (O of degree 0, V of degree 1, the upper triangle of P of
// degree 2), per-party geometric scaling, and repair of the noisy objective
// by spectral trimming plus ridge regularization.

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>

#include "smddp/linmodel.h"
#include "smddp/random.h"

namespace smddp::dpfm {

enum class ScalingMode {
  kGeometricPerParty,   // a_p ~ Geometric(p), one draw per party per run
  kDeterministicSqrtP,  // a_p = sqrt(p)
  kNone,                // a_p = 1
};

std::string_view ScalingModeName(ScalingMode mode);
// Accepts "geometric", "sqrt-p" and "none"; throws InvalidArgumentError.
ScalingMode ParseScalingMode(std::string_view name);

struct PrivacyParams {
  double epsilon_global = 1.0;
  double alpha = 1.0;  // epsilon_local / epsilon_global
  double p = 0.9;
  ScalingMode scaling = ScalingMode::kGeometricPerParty;

  void Validate() const;
};

struct NoiseSpec {
  double delta = 0.0;
  double epsilon_local = 0.0;
  double scale = 0.0;  // delta / epsilon_local

  static NoiseSpec Create(double delta, double epsilon_local);
};

// 2 (d + 1)^2 for d normalized attributes.
double GlobalSensitivity(Eigen::Index attrs);

// alpha * epsilon_global.
double LocalBudget(const PrivacyParams& params);

// Lap(0, scale) by inverse CDF: -scale * sign(u) * ln(1 - 2|u|), u ~ U(-1/2, 1/2).
double SampleLaplace(double scale, RandomStream& rng);

// Support {1, 2, ...}, Pr[k] = (1 - p)^(k - 1) p.
std::uint64_t SampleGeometric(double p, RandomStream& rng);

// The per-party multiplier a_p for the configured scaling mode.
double ScalingFactor(const PrivacyParams& params, RandomStream& rng);

// Perturbs each distinct coefficient once with a_p * Lap(spec.scale). Draw
// order: a_p, upper triangle of P row-major, V, O.
linmodel::LocalStatistics NoiseInject(const linmodel::LocalStatistics& stats,
                                      const NoiseSpec& spec,
                                      const PrivacyParams& params,
                                      RandomStream& rng);

// Single trusted injection of Lap(delta / epsilon) into pooled statistics.
linmodel::LocalStatistics CdpInject(const linmodel::LocalStatistics& aggregated,
                                    double delta, double epsilon,
                                    RandomStream& rng);

struct TrimParams {
  double ridge = 1e-6;
  double eig_floor = 1e-8;
};

struct OptimizeResult {
  linmodel::LocalStatistics repaired;
  Eigen::VectorXd w;
};

// Symmetrizes P, clamps eigenvalues below eig_floor up to eig_floor, adds
// ridge * I and returns the repaired statistics with w = P^-1 V. Requires
// ridge >= 0, eig_floor >= 0 and ridge + eig_floor > 0; throws
// InvalidArgumentError on non-finite input.
OptimizeResult Optimize(const linmodel::LocalStatistics& noisy,
                        const TrimParams& params = {});

}  // namespace smddp::dpfm

#endif  // SMDDP_DP_FM_H_
