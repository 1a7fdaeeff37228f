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

#ifndef SADP_NOISE_POLICY_HPP
#define SADP_NOISE_POLICY_HPP

#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "scoring.hpp"

namespace sadp {

// Two-tier score -> noise-multiplier mapping plus the clipping norm.
//
// The low band is the closed interval [low_min, low_max]; the high band is
// (low_max, 1], so the mapping is total over [0, 1] with no unmapped gap;
// scores below low_min receive no noise. All noise multipliers are unitless
// (standard deviations in units of the clipping norm).
struct NoisePolicy {
  double sigma_low = 2.0;
  double sigma_high = 3.0;
  double low_min = 0.01;
  double low_max = 0.50;
  double clip_norm = 1.0;

  void validate() const;
  std::string to_json() const;
  // All five fields are required when a policy file is supplied; no
  // defaults are filled in.
  static NoisePolicy from_json(const std::string& json_text);
  static NoisePolicy load(const std::string& path);
};

// Maps a sensitivity score in [0, 1] to {0, sigma_low, sigma_high}.
// Monotone non-decreasing in s.
double map_score(double s, const NoisePolicy& policy);

// The informal per-mechanism epsilon = C / sigma. Reporting aid only; the
// accountant provides the actual guarantee. sigma == 0 yields +infinity
// ("no noise").
double implied_epsilon(double clip_norm, double sigma);

// Token sequence paired with per-token sensitivity scores and assigned
// noise multipliers. sigma[i] == map_score(s[i]) always holds.
struct AnnotatedSequence {
  TokenSequence seq;
  std::vector<double> scores;  // 0 for non-PII tokens
  std::vector<double> sigmas;
};

// Attaches each token its type's final score (non-PII tokens score 0) and
// the corresponding noise multiplier. `assignment` must be aligned with
// `seq`; every assigned type must appear in the report.
AnnotatedSequence annotate(const TokenSequence& seq,
                           const std::vector<std::optional<std::string>>& assignment,
                           const SensitivityReport& report, const NoisePolicy& policy);

}  // namespace sadp

#endif  // SADP_NOISE_POLICY_HPP
