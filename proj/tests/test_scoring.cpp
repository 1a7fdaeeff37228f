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
#include <algorithm>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "scoring.hpp"

using namespace sadp;

namespace {

std::vector<PiiSpan> make_spans(const std::vector<std::pair<std::string, int>>& counts) {
  std::vector<PiiSpan> spans;
  std::uint32_t pos = 0;
  for (const auto& [type, n] : counts) {
    for (int i = 0; i < n; ++i) {
      spans.push_back({0, pos, pos + 1, "x", type});
      ++pos;
    }
  }
  return spans;
}

// 5 emails, 1 ssn: the worked fixture used across modules.
std::vector<PiiSpan> email_ssn_fixture() {
  return make_spans({{"EMAIL", 5}, {"SSN", 1}});
}

}  // namespace

TEST_CASE("count_pii tallies per type and in total") {
  const auto [counts, n] = count_pii(email_ssn_fixture());
  CHECK(n == 6);
  CHECK(counts.at("EMAIL") == 5);
  CHECK(counts.at("SSN") == 1);

  const auto [empty_counts, empty_n] = count_pii({});
  CHECK(empty_n == 0);
  CHECK(empty_counts.empty());
}

TEST_CASE("count_pii matches a brute-force recount on a random fixture") {
  RngStream rng(42);
  const std::vector<std::string> types = {"A", "B", "C", "D"};
  std::vector<PiiSpan> spans;
  for (int i = 0; i < 100; ++i) {
    spans.push_back({0, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1),
                     "x", types[rng.next_u64() % types.size()]});
  }
  std::map<std::string, std::uint64_t> tally;
  for (const auto& s : spans) tally[s.type]++;
  const auto [counts, n] = count_pii(spans);
  CHECK(n == 100);
  CHECK(counts == tally);
}

TEST_CASE("freq_score evaluates 1 - f/N") {
  CHECK(freq_score(6, 6) == 0.0);
  CHECK(freq_score(5, 6) == doctest::Approx(1.0 - 5.0 / 6.0).epsilon(1e-15));
  CHECK(freq_score(1, 6) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK_THROWS_AS(freq_score(1, 0), Error);
  CHECK_THROWS_AS(freq_score(0, 5), Error);
  CHECK_THROWS_AS(freq_score(7, 6), Error);
}

TEST_CASE("final_score is the weighted combination with bounds") {
  const ScoreWeights w{0.4, 0.3, 0.3};
  CHECK(final_score(1, 1, 1, w) == 1.0);
  CHECK(final_score(0, 0, 0, w) == 0.0);
  CHECK(final_score(5.0 / 6.0, 1, 1, w) ==
        doctest::Approx(0.4 * 5.0 / 6.0 + 0.6).epsilon(1e-15));
  CHECK_THROWS_AS(final_score(0.5, 1, 0, ScoreWeights{0.5, 0.5, 0.5}), Error);
  CHECK_THROWS_AS(final_score(1.5, 0, 0, w), Error);
  CHECK_THROWS_AS(final_score(0.5, 0.5, 0, w), Error);  // link must be 0/1
}

TEST_CASE("score_all on the worked email/ssn fixture") {
  const SensitivityReport report = score_all(email_ssn_fixture(), PiiRegistry::builtin());
  CHECK(report.n_total == 6);
  const TypeScore* email = report.find("EMAIL");
  const TypeScore* ssn = report.find("SSN");
  REQUIRE(email != nullptr);
  REQUIRE(ssn != nullptr);

  // EMAIL: link=1, dt=0, f=5/6; SSN: link=1, dt=1, f=1/6.
  CHECK(email->s_freq == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(email->s_link == 1.0);
  CHECK(email->s_datatype == 0.0);
  CHECK(email->s_final == doctest::Approx(0.4 / 6.0 + 0.3).epsilon(1e-12));
  CHECK(email->s_final == doctest::Approx(0.3667).epsilon(1e-3));

  CHECK(ssn->s_freq == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(ssn->s_final == doctest::Approx(0.4 * 5.0 / 6.0 + 0.6).epsilon(1e-12));
  CHECK(ssn->s_final == doctest::Approx(0.9333).epsilon(1e-3));
}

TEST_CASE("single type with zero flags scores zero") {
  const PiiRegistry reg("t", {{"PLAIN", false, false, ""}});
  const SensitivityReport report = score_all(make_spans({{"PLAIN", 4}}), reg);
  REQUIRE(report.types.size() == 1);
  CHECK(report.types[0].s_freq == 0.0);  // f == N
  CHECK(report.types[0].s_final == 0.0);
}

TEST_CASE("empty span set refuses to score") {
  try {
    score_all({}, PiiRegistry::builtin());
    FAIL("expected empty-corpus error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_corpus);
  }
}

TEST_CASE("types absent from the corpus are omitted") {
  const SensitivityReport report = score_all(email_ssn_fixture(), PiiRegistry::builtin());
  CHECK(report.find("PHONE") == nullptr);
  CHECK(report.types.size() == 2);
}

TEST_CASE("span type missing from the registry is a config error") {
  CHECK_THROWS_AS(score_all(make_spans({{"MYSTERY", 2}}), PiiRegistry::builtin()), Error);
}

TEST_CASE("word-count denominator is available behind the switch") {
  const auto spans = email_ssn_fixture();
  const SensitivityReport report = score_all(spans, PiiRegistry::builtin(), {},
                                             FreqDenominator::word_total, 600);
  CHECK(report.n_total == 600);
  CHECK(report.find("EMAIL")->s_freq == doctest::Approx(1.0 - 5.0 / 600.0).epsilon(1e-12));
  // word total below the PII count is rejected
  CHECK_THROWS_AS(
      score_all(spans, PiiRegistry::builtin(), {}, FreqDenominator::word_total, 3), Error);
}

TEST_CASE("random corpora match the brute-force oracle to 1e-12") {
  RngStream rng(2024);
  for (int iter = 0; iter < 20; ++iter) {
    const int n_types = 1 + static_cast<int>(rng.next_u64() % 7);
    std::vector<PiiType> types;
    std::map<std::string, std::pair<bool, bool>> flags;
    for (int t = 0; t < n_types; ++t) {
      const std::string name = "T" + std::to_string(t);
      const bool link = rng.next_u64() % 2 == 0;
      const bool dt = rng.next_u64() % 2 == 0;
      types.push_back({name, link, dt, ""});
      flags[name] = {link, dt};
    }
    const PiiRegistry reg("rand", types);

    std::vector<std::pair<std::string, int>> counts;
    for (int t = 0; t < n_types; ++t) {
      counts.emplace_back("T" + std::to_string(t),
                          1 + static_cast<int>(rng.next_u64() % 40));
    }
    const auto spans = make_spans(counts);

    const SensitivityReport got = score_all(spans, reg);
    const auto want = oracle::brute_score(spans, flags, 0.4L, 0.3L, 0.3L);
    REQUIRE(got.types.size() == want.types.size());
    CHECK(got.n_total == want.n_total);
    for (const TypeScore& ts : got.types) {
      const auto& w = want.types.at(ts.type);
      CHECK(ts.count == w.count);
      CHECK(std::abs(ts.s_freq - static_cast<double>(w.s_freq)) < 1e-12);
      CHECK(ts.s_link == static_cast<double>(w.s_link));
      CHECK(ts.s_datatype == static_cast<double>(w.s_datatype));
      CHECK(std::abs(ts.s_final - static_cast<double>(w.s_final)) < 1e-12);
    }
  }
}

TEST_CASE("monotonicity: more occurrences means a lower final score") {
  const PiiRegistry reg("t", {{"A", true, false, ""}, {"B", true, false, ""}});
  double prev = 2.0;
  for (int f = 1; f <= 9; ++f) {
    // A occurs f times out of 10 total; flags fixed.
    const auto spans = make_spans({{"A", f}, {"B", 10 - f}});
    const double s = score_all(spans, reg).find("A")->s_final;
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("permutation invariance and bounds") {
  auto spans = make_spans({{"EMAIL", 3}, {"SSN", 2}, {"PHONE", 4}});
  const SensitivityReport before = score_all(spans, PiiRegistry::builtin());
  std::mt19937 gen(3);
  std::shuffle(spans.begin(), spans.end(), gen);
  const SensitivityReport after = score_all(spans, PiiRegistry::builtin());
  REQUIRE(before.types.size() == after.types.size());
  for (std::size_t i = 0; i < before.types.size(); ++i) {
    CHECK(before.types[i].type == after.types[i].type);
    CHECK(before.types[i].s_final == after.types[i].s_final);
    CHECK(before.types[i].s_final >= 0.0);
    CHECK(before.types[i].s_final <= 1.0);
  }
}

TEST_CASE("rarity extremes: the singleton type has the maximal frequency score") {
  const auto spans = make_spans({{"EMAIL", 7}, {"SSN", 1}, {"PHONE", 3}});
  const SensitivityReport report = score_all(spans, PiiRegistry::builtin());
  double max_freq = -1, singleton = -1, most_common = 2;
  for (const TypeScore& t : report.types) {
    max_freq = std::max(max_freq, t.s_freq);
    if (t.type == "SSN") singleton = t.s_freq;
    if (t.type == "EMAIL") most_common = t.s_freq;
  }
  CHECK(singleton == max_freq);
  for (const TypeScore& t : report.types) CHECK(most_common <= t.s_freq);
}

TEST_CASE("report invariants hold after JSON round trip") {
  const SensitivityReport report = score_all(email_ssn_fixture(), PiiRegistry::builtin());
  const SensitivityReport back = SensitivityReport::from_json(report.to_json());
  CHECK(back.n_total == report.n_total);
  REQUIRE(back.types.size() == report.types.size());
  std::uint64_t count_sum = 0;
  for (std::size_t i = 0; i < back.types.size(); ++i) {
    const TypeScore& t = back.types[i];
    CHECK(t.type == report.types[i].type);
    CHECK(t.s_final ==
          doctest::Approx(0.4 * t.s_freq + 0.3 * t.s_link + 0.3 * t.s_datatype)
              .epsilon(1e-12));
    count_sum += t.count;
  }
  CHECK(count_sum == back.n_total);
}
