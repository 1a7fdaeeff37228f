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

#ifndef SADP_SCORING_HPP
#define SADP_SCORING_HPP

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "pii_detect.hpp"

namespace sadp {

// Weights of the three sensitivity dimensions. Must be non-negative and sum
// to 1 (within 1e-9).
struct ScoreWeights {
  double freq = 0.4;
  double link = 0.3;
  double datatype = 0.3;

  void validate() const;
};

// Denominator used by the frequency score. pii_total divides by the number
// of PII occurrences; word_total divides by the corpus word count, which
// pushes every frequency score close to 1 and is kept only as an explicit
// opt-in.
enum class FreqDenominator { pii_total, word_total };

struct TypeScore {
  std::string type;
  std::uint64_t count = 0;   // f: occurrences of this type
  double s_freq = 0.0;       // 1 - f/N
  double s_link = 0.0;       // registry linkable flag
  double s_datatype = 0.0;   // registry datatype_protected flag
  double s_final = 0.0;      // weighted combination, in [0, 1]
};

struct SensitivityReport {
  std::uint64_t n_total = 0;  // sum of counts (or word total, per denominator)
  ScoreWeights weights;
  std::vector<TypeScore> types;  // sorted by type name

  const TypeScore* find(const std::string& name) const;
  std::unordered_map<std::string, double> final_by_type() const;

  std::string to_json() const;
  static SensitivityReport from_json(const std::string& json_text);
  static SensitivityReport load(const std::string& path);
};

// Per-type occurrence counts plus the total. Order-free.
std::pair<std::map<std::string, std::uint64_t>, std::uint64_t> count_pii(
    const std::vector<PiiSpan>& spans);

// Frequency rarity score 1 - f/N. Requires N >= 1 and 1 <= f <= N.
double freq_score(std::uint64_t f, std::uint64_t n);

// Weighted combination of the three dimension scores, clamped to [0, 1]
// only to absorb floating-point rounding (never by more than 1e-12).
double final_score(double s_freq, double s_link, double s_datatype,
                   const ScoreWeights& weights);

// Scores every PII type present in `spans` against the registry flags.
// Types absent from the corpus are omitted (they have no occurrence count).
// Fails with empty_corpus when there are no spans: with zero PII the
// adaptive mechanism degenerates to the no-DP baseline. `word_total` is
// consulted only when denominator == word_total.
SensitivityReport score_all(const std::vector<PiiSpan>& spans, const PiiRegistry& registry,
                            const ScoreWeights& weights = {},
                            FreqDenominator denominator = FreqDenominator::pii_total,
                            std::uint64_t word_total = 0);

}  // namespace sadp

#endif  // SADP_SCORING_HPP
