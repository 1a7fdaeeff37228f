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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "errors.hpp"
#include "noise_policy.hpp"
#include "rng.hpp"

using namespace sadp;

TEST_CASE("two-tier mapping with the documented band edges") {
  const NoisePolicy policy;  // 2.0 / 3.0, bands 0.01 / 0.50
  CHECK(map_score(0.30, policy) == 2.0);
  CHECK(map_score(0.80, policy) == 3.0);
  CHECK(map_score(0.0, policy) == 0.0);
  CHECK(map_score(0.005, policy) == 0.0);
  CHECK(map_score(0.01, policy) == 2.0);   // low band is closed at both ends
  CHECK(map_score(0.50, policy) == 2.0);
  CHECK(map_score(0.505, policy) == 3.0);  // gap closure: high band opens at 0.50
  CHECK(map_score(0.51, policy) == 3.0);
  CHECK(map_score(1.0, policy) == 3.0);
}

TEST_CASE("map_score rejects scores outside [0, 1]") {
  const NoisePolicy policy;
  CHECK_THROWS_AS(map_score(-0.1, policy), Error);
  CHECK_THROWS_AS(map_score(1.1, policy), Error);
  CHECK_THROWS_AS(map_score(std::nan(""), policy), Error);
}

TEST_CASE("map_score is monotone and never invents a third tier") {
  const NoisePolicy policy{1.5, 4.0, 0.01, 0.5, 1.0};
  double prev = -1;
  for (int i = 0; i <= 1000; ++i) {
    const double s = i / 1000.0;
    const double sigma = map_score(s, policy);
    CHECK(sigma >= prev);
    CHECK((sigma == 0.0 || sigma == 1.5 || sigma == 4.0));
    prev = sigma;
  }
}

TEST_CASE("implied epsilon is C over sigma, with a no-noise sentinel") {
  CHECK(implied_epsilon(1.0, 2.0) == 0.5);
  CHECK(implied_epsilon(1.0, 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(implied_epsilon(2.0, 2.0) == 1.0);
  CHECK(std::isinf(implied_epsilon(1.0, 0.0)));
  CHECK_THROWS_AS(implied_epsilon(0.0, 1.0), Error);
  CHECK_THROWS_AS(implied_epsilon(1.0, -1.0), Error);
}

TEST_CASE("policy validation") {
  NoisePolicy p;
  p.sigma_low = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = NoisePolicy{};
  p.sigma_high = 1.0;  // below sigma_low
  CHECK_THROWS_AS(p.validate(), Error);
  p = NoisePolicy{};
  p.clip_norm = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = NoisePolicy{};
  p.low_min = 0.6;
  p.low_max = 0.5;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("policy file requires every field") {
  CHECK_THROWS_AS(NoisePolicy::from_json(R"({"sigma_low":2.0})"), Error);
  const NoisePolicy p = NoisePolicy::from_json(
      R"({"sigma_low":1.5,"sigma_high":2.5,"low_min":0.02,"low_max":0.4,"clip_norm":0.5})");
  CHECK(p.sigma_low == 1.5);
  CHECK(p.sigma_high == 2.5);
  CHECK(p.low_min == 0.02);
  CHECK(p.low_max == 0.4);
  CHECK(p.clip_norm == 0.5);
  const NoisePolicy back = NoisePolicy::from_json(p.to_json());
  CHECK(back.sigma_high == p.sigma_high);
}

namespace {

// token sequence "w0 w1 w2 w3 w4" with 1-char gaps
TokenSequence five_tokens() {
  TokenSequence seq;
  seq.doc_id = 0;
  for (std::uint32_t i = 0; i < 5; ++i) {
    seq.tokens.push_back(static_cast<std::int32_t>(4 + i));
    seq.offsets.push_back({i * 3, i * 3 + 2});
  }
  return seq;
}

SensitivityReport fixture_report() {
  SensitivityReport report;
  report.n_total = 6;
  report.types.push_back({"EMAIL", 5, 1.0 / 6.0, 1, 0, 0.4 / 6.0 + 0.3});
  report.types.push_back({"SSN", 1, 5.0 / 6.0, 1, 1, 0.4 * 5.0 / 6.0 + 0.6});
  return report;
}

}  // namespace

TEST_CASE("annotate: an SSN token gets sigma_high, the rest zero") {
  const TokenSequence seq = five_tokens();
  std::vector<std::optional<std::string>> assignment(5);
  assignment[2] = "SSN";
  const AnnotatedSequence ann = annotate(seq, assignment, fixture_report(), NoisePolicy{});
  REQUIRE(ann.sigmas.size() == 5);
  CHECK(ann.sigmas == std::vector<double>{0, 0, 3.0, 0, 0});
  CHECK(ann.scores[2] == doctest::Approx(0.9333).epsilon(1e-3));
  CHECK(ann.scores[0] == 0.0);
}

TEST_CASE("annotate: no PII means all sigma zero") {
  const AnnotatedSequence ann = annotate(five_tokens(),
                                         std::vector<std::optional<std::string>>(5),
                                         fixture_report(), NoisePolicy{});
  for (double s : ann.sigmas) CHECK(s == 0.0);
}

TEST_CASE("annotate: a run of EMAIL tokens all map to sigma_low") {
  std::vector<std::optional<std::string>> assignment(5, std::optional<std::string>("EMAIL"));
  const AnnotatedSequence ann =
      annotate(five_tokens(), assignment, fixture_report(), NoisePolicy{});
  for (double s : ann.sigmas) CHECK(s == 2.0);  // 0.3667 lands in the low band
}

TEST_CASE("annotate: assigned type missing from the report is a contract error") {
  std::vector<std::optional<std::string>> assignment(5);
  assignment[0] = "PHONE";
  CHECK_THROWS_AS(annotate(five_tokens(), assignment, fixture_report(), NoisePolicy{}),
                  Error);
}

TEST_CASE("annotate: misaligned assignment is a contract error") {
  CHECK_THROWS_AS(annotate(five_tokens(), std::vector<std::optional<std::string>>(3),
                           fixture_report(), NoisePolicy{}),
                  Error);
}

TEST_CASE("annotate is recomputable: identical inputs give identical output") {
  std::vector<std::optional<std::string>> assignment(5);
  assignment[1] = "EMAIL";
  assignment[2] = "SSN";
  const AnnotatedSequence a =
      annotate(five_tokens(), assignment, fixture_report(), NoisePolicy{});
  const AnnotatedSequence b =
      annotate(five_tokens(), assignment, fixture_report(), NoisePolicy{});
  CHECK(a.scores == b.scores);
  CHECK(a.sigmas == b.sigmas);
  // sigma_i always recomputes from s_i
  for (std::size_t i = 0; i < a.sigmas.size(); ++i) {
    CHECK(a.sigmas[i] == map_score(a.scores[i], NoisePolicy{}));
  }
}
