// Copyright 2026 The sadp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SADP_EVALX_HPP
#define SADP_EVALX_HPP

#include <optional>
#include <string>
#include <vector>

#include "pii_detect.hpp"
#include "scoring.hpp"
#include "trainer.hpp"

namespace sadp {

struct ArmSpec {
  Arm arm = Arm::no_dp;
  double sigma = 0.0;  // dp_sgd_uniform multiplier; ignored otherwise
  std::string label;   // defaults to arm name (+ sigma suffix for dp_sgd)

  std::string display_label() const;
};

struct DatasetSpec {
  std::string name;
  std::string path;
  CorpusFormat format = CorpusFormat::plain_text_lines;
};

struct MatrixConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<ArmSpec> arms;
  std::vector<std::uint64_t> seeds;
  TrainConfig base;  // seed/arm/sigma fields are overridden per cell
  ScoreWeights weights;
  PiiRegistry registry = PiiRegistry::builtin();
  std::uint32_t vocab_max = 4096;
};

struct ReportRow {
  std::string dataset;
  std::string arm;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double perplexity_mean = 0.0;
  double perplexity_std = 0.0;
  // Absent for the baseline. DP rows report the maximum over seeds, which
  // is never below any single run's accounted value.
  std::optional<double> epsilon_min;
  std::optional<double> epsilon_at_32;
  bool non_private = false;
};

struct ComparisonReport {
  std::string fingerprint;  // hash of the full matrix configuration
  std::vector<std::uint64_t> seeds;
  std::vector<ReportRow> rows;
  std::vector<std::string> failures;  // "<dataset>/<arm>: <error>"
};

// One train+evaluate per (dataset, arm, seed); detection, scoring and
// annotation run once per dataset and are shared across cells. Rows
// aggregate mean and stddev over the seed set. Deterministic given the
// configuration.
ComparisonReport run_matrix(const MatrixConfig& config);

enum class EmitFormat { csv, json, markdown_table };
EmitFormat parse_emit_format(std::string_view name);

// Column order: dataset, arm, accuracy, perplexity, epsilon_min,
// epsilon_at_32 (stddev columns appended in csv/json).
std::string emit(const ComparisonReport& report, EmitFormat format);

}  // namespace sadp

#endif  // SADP_EVALX_HPP
