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


#ifndef SMDDP_DATASET_IO_H_
#define SMDDP_DATASET_IO_H_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "smddp/linmodel.h"

namespace smddp::harness {

// Header row required; every column numeric; the last column is the
// response. Any malformed row fails the whole load, and the error lists the
// offending line numbers.
linmodel::Dataset LoadCsv(const std::filesystem::path& path);

// Writes attribute columns x1..xd followed by y, at full precision.
void WriteCsv(const linmodel::Dataset& data, const std::filesystem::path& path);

struct SyntheticData {
  linmodel::Dataset data;
  Eigen::VectorXd beta;  // intercept first, length d + 1
};

// X ~ U[0,1]^d, beta ~ U[-1,1]^(d+1), y = [1 X] beta + N(0, noise_sd^2).
SyntheticData GenerateSynthetic(std::int64_t rows, std::int64_t attrs, double noise_sd,
                                std::uint64_t seed);

// Random disjoint partition. The first rows % n parts get one extra row.
std::vector<linmodel::Dataset> SplitHorizontal(const linmodel::Dataset& data, std::uint32_t n,
                                               std::uint64_t seed);

}  // namespace smddp::harness

#endif  // SMDDP_DATASET_IO_H_
