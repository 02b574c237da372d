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

#include "smddp/dataset_io.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>

#include "smddp/error.h"
#include "smddp/random.h"

namespace smddp::harness {
namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool ParseDouble(std::string_view s, double& out) {
  s = Trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && end == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

linmodel::Dataset LoadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!Trim(line).empty()) {
      columns = SplitFields(line).size();
      break;
    }
  }
  if (columns == 0) throw IoError(path.string() + ": missing header row");
  if (columns < 2) {
    throw IoError(path.string() + ": need at least one attribute column and a response column");
  }

  std::vector<double> values;
  std::vector<std::size_t> bad_lines;
  std::size_t rows = 0;
  std::vector<double> row(columns);
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    auto fields = SplitFields(line);
    bool ok = fields.size() == columns;
    for (std::size_t j = 0; ok && j < columns; ++j) ok = ParseDouble(fields[j], row[j]);
    if (!ok) {
      bad_lines.push_back(line_no);
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (!bad_lines.empty()) {
    std::ostringstream msg;
    msg << path.string() << ": malformed or incomplete row" << (bad_lines.size() > 1 ? "s" : "")
        << " at line";
    for (std::size_t i = 0; i < bad_lines.size(); ++i) {
      msg << (i == 0 ? " " : ", ") << bad_lines[i];
    }
    throw IoError(msg.str());
  }
  if (rows == 0) throw IoError(path.string() + ": no data rows");

  const auto attrs = static_cast<Eigen::Index>(columns - 1);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), attrs);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = values.data() + r * columns;
    for (Eigen::Index j = 0; j < attrs; ++j) x(static_cast<Eigen::Index>(r), j) = src[j];
    y(static_cast<Eigen::Index>(r)) = src[attrs];
  }
  return linmodel::Dataset(std::move(x), std::move(y));
}

void WriteCsv(const linmodel::Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index j = 0; j < data.attrs(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  char buf[32];
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index j = 0; j < data.attrs(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", data.x()(r, j));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", data.y()(r));
    out << buf;
  }
  if (!out) throw IoError("failed writing " + path.string());
}

SyntheticData GenerateSynthetic(std::int64_t rows, std::int64_t attrs, double noise_sd,
                                std::uint64_t seed) {
  if (attrs < 1) throw InvalidArgumentError("synthetic data needs at least one attribute");
  if (rows < attrs + 2) {
    throw InvalidArgumentError("synthetic data needs rows >= d + 2 (got " +
                               std::to_string(rows) + " rows for d = " +
                               std::to_string(attrs) + ")");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw InvalidArgumentError("noise_sd must be finite and non-negative");
  }
  RandomStream coef_rng(DeriveSeed(seed, "synthetic-beta"));
  RandomStream data_rng(DeriveSeed(seed, "synthetic-rows"));

  Eigen::VectorXd beta(attrs + 1);
  for (Eigen::Index j = 0; j <= attrs; ++j) beta(j) = coef_rng.Uniform(-1.0, 1.0);

  Eigen::MatrixXd x(rows, attrs);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double acc = beta(0);
    for (Eigen::Index j = 0; j < attrs; ++j) {
      x(r, j) = data_rng.UniformOpen();
      acc += beta(j + 1) * x(r, j);
    }
    y(r) = noise_sd > 0.0 ? acc + noise_sd * data_rng.StandardNormal() : acc;
  }
  return {linmodel::Dataset(std::move(x), std::move(y)), std::move(beta)};
}

std::vector<linmodel::Dataset> SplitHorizontal(const linmodel::Dataset& data, std::uint32_t n,
                                               std::uint64_t seed) {
  if (n == 0) throw InvalidArgumentError("cannot split into zero parts");
  if (static_cast<Eigen::Index>(n) > data.rows()) {
    throw InvalidArgumentError("cannot split " + std::to_string(data.rows()) + " rows into " +
                               std::to_string(n) + " parts");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (n > 1) {
    RandomStream rng(DeriveSeed(seed, "split"));
    rng.Shuffle(order);
  }

  const std::size_t base = order.size() / n;
  const std::size_t extra = order.size() % n;
  std::vector<linmodel::Dataset> parts;
  parts.reserve(n);
  std::size_t offset = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::size_t size = base + (i < extra ? 1 : 0);
    parts.push_back(data.Subset(std::span(order).subspan(offset, size)));
    offset += size;
  }
  return parts;
}

}  // namespace smddp::harness
