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
#include "dp_core.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace sadp;

namespace {

GradientVector from(std::initializer_list<double> vals) {
  return GradientVector(std::vector<double>(vals));
}

double norm_of(const std::vector<double>& v) {
  double sq = 0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

}  // namespace

TEST_CASE("gradient vectors reject non-finite entries on construction") {
  CHECK_THROWS_AS(GradientVector({1.0, std::nan("")}), Error);
  CHECK_THROWS_AS(GradientVector({std::numeric_limits<double>::infinity()}), Error);
  CHECK(GradientVector({1.0, -2.0}).l2_norm() == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("clip scales down and preserves direction") {
  const GradientVector g = from({1.2, 1.6});  // norm 2
  const GradientVector c = clip(g, 1.0);
  CHECK(c.l2_norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.values()[0] / c.values()[1] == doctest::Approx(1.2 / 1.6).epsilon(1e-12));
}

TEST_CASE("clip is a bitwise no-op inside the ball") {
  const GradientVector g = from({0.3, 0.4});  // norm 0.5
  const GradientVector c = clip(g, 1.0);
  CHECK(c == g);
  const GradientVector zero = GradientVector::zeros(3);
  CHECK(clip(zero, 1.0) == zero);
}

TEST_CASE("clip rejects invalid inputs") {
  CHECK_THROWS_AS(clip(from({1.0}), 0.0), Error);
  GradientVector g = GradientVector::zeros(2);
  g.mutable_values()[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(clip(g, 1.0), Error);
}

TEST_CASE("clipped norm stays within C + 1e-9 over random vectors") {
  RngStream rng(7);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t dim = 1 + rng.next_u64() % 64;
    std::vector<double> vals(dim);
    for (double& v : vals) v = 10.0 * rng.next_gaussian();
    const double c = 0.1 + rng.next_unit() * 3.0;
    const GradientVector g{vals};
    const GradientVector clipped = clip(g, c);
    CHECK(clipped.l2_norm() <= c + 1e-9);
    if (g.l2_norm() <= c) CHECK(clipped == g);
  }
}

TEST_CASE("noise with sigma zero returns the input bit-for-bit") {
  const GradientVector g = from({0.5, -1.5, 2.0});
  RngStream rng(1);
  const GradientVector out = noise(g, 0.0, 1.0, rng);
  CHECK(out == g);
  CHECK(rng.counter() == 0);  // no draws consumed
}

TEST_CASE("noise adds the seeded Gaussian draw") {
  const GradientVector g = from({1.0, 2.0, 3.0});
  RngStream rng(99, 5);
  const GradientVector out = noise(g, 2.0, 1.5, rng);
  RngStream replay(99, 5);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out.values()[i] == g.values()[i] + 3.0 * replay.next_gaussian());
  }
  // identical stream, identical output
  RngStream rng2(99, 5);
  const GradientVector out2 = noise(g, 2.0, 1.5, rng2);
  CHECK(out == out2);
}

TEST_CASE("empirical noise variance matches sigma^2 C^2 within 2%") {
  const double sigma = 2.0, c = 1.0;
  const std::size_t dim = 20, draws = 5000;  // 1e5 coordinate samples
  RngStream rng(123);
  const GradientVector zero = GradientVector::zeros(dim);
  double sum = 0, sum_sq = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    RngStream sub = rng.split(i);
    const GradientVector out = noise(zero, sigma, c, sub);
    for (double v : out.values()) {
      sum += v;
      sum_sq += v * v;
    }
  }
  const double n = static_cast<double>(dim * draws);
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(var == doctest::Approx(sigma * sigma * c * c).epsilon(0.02));
}

TEST_CASE("perturb_sequence with all-zero sigma equals the clipped sum exactly") {
  NoisePolicy policy;
  policy.clip_norm = 1.0;
  std::vector<GradientVector> grads;
  grads.push_back(from({3.0, 4.0}));   // norm 5 -> clipped to 1
  grads.push_back(from({0.3, 0.0}));   // untouched
  grads.push_back(from({0.0, -0.2}));  // untouched
  const std::vector<double> sigmas(3, 0.0);
  const PerturbResult r = perturb_sequence(grads, sigmas, policy, RngStream(1));

  // brute-force expected sum
  std::vector<double> expected(2, 0.0);
  for (const auto& g : grads) {
    const double n = norm_of(g.values());
    const double s = n <= 1.0 ? 1.0 : 1.0 / n;
    for (std::size_t j = 0; j < 2; ++j) {
      expected[j] += s == 1.0 ? g.values()[j] : s * g.values()[j];
    }
  }
  REQUIRE(r.sum.size() == 2);
  CHECK(r.sum.values()[0] == expected[0]);
  CHECK(r.sum.values()[1] == expected[1]);
  CHECK(r.tiers.zero == 3);
  CHECK(r.tiers.low == 0);
  CHECK(r.tiers.high == 0);
}

TEST_CASE("single noised token: sum equals clip(g) plus the token-stream draw") {
  NoisePolicy policy;
  policy.clip_norm = 1.0;
  const GradientVector g = from({3.0, 4.0});
  const std::vector<GradientVector> grads = {g};
  const std::vector<double> sigmas = {2.0};
  const RngStream root(77);
  const PerturbResult r = perturb_sequence(grads, sigmas, policy, root);

  const GradientVector clipped = clip(g, 1.0);
  RngStream token_stream = root.split(0);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(r.sum.values()[j] ==
          doctest::Approx(clipped.values()[j] + 2.0 * token_stream.next_gaussian())
              .epsilon(1e-15));
  }
  CHECK(r.tiers.low == 1);
}

TEST_CASE("tier counts on the five-token fixture are (4, 0, 1)") {
  NoisePolicy policy;  // sigma_low 2, sigma_high 3
  std::vector<GradientVector> grads;
  for (int i = 0; i < 5; ++i) grads.push_back(from({0.1, 0.1}));
  const std::vector<double> sigmas = {0, 0, 3.0, 0, 0};
  const PerturbResult r = perturb_sequence(grads, sigmas, policy, RngStream(5));
  CHECK(r.tiers.zero == 4);
  CHECK(r.tiers.low == 0);
  CHECK(r.tiers.high == 1);
}

TEST_CASE("perturb_sequence contract checks") {
  NoisePolicy policy;
  std::vector<GradientVector> grads = {from({1.0})};
  CHECK_THROWS_AS(perturb_sequence(grads, std::vector<double>{1.0, 2.0}, policy,
                                   RngStream(1)),
                  Error);
  std::vector<GradientVector> mixed = {from({1.0}), from({1.0, 2.0})};
  CHECK_THROWS_AS(perturb_sequence(mixed, std::vector<double>{0.0, 0.0}, policy,
                                   RngStream(1)),
                  Error);
  // non-finite gradient names the offending token
  GradientVector bad = GradientVector::zeros(1);
  bad.mutable_values()[0] = std::nan("");
  std::vector<GradientVector> with_bad = {from({1.0}), std::move(bad)};
  try {
    perturb_sequence(with_bad, std::vector<double>{0.0, 0.0}, policy, RngStream(1));
    FAIL("expected domain error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("token 1") != std::string::npos);
  }
}

TEST_CASE("perturb_sequence is deterministic and order-split per token") {
  NoisePolicy policy;
  std::vector<GradientVector> grads;
  std::vector<double> sigmas;
  RngStream init(3);
  for (int i = 0; i < 6; ++i) {
    grads.push_back(from({init.next_gaussian(), init.next_gaussian()}));
    sigmas.push_back(i % 2 ? 2.0 : 3.0);
  }
  const PerturbResult a = perturb_sequence(grads, sigmas, policy, RngStream(11));
  const PerturbResult b = perturb_sequence(grads, sigmas, policy, RngStream(11));
  CHECK(a.sum == b.sum);
}

TEST_CASE("noise draws for different token streams are uncorrelated") {
  const RngStream root(31337);
  RngStream s0 = root.split(0);
  RngStream s1 = root.split(1);
  const std::size_t n = 100000;
  double sum0 = 0, sum1 = 0, sum00 = 0, sum11 = 0, sum01 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = s0.next_gaussian();
    const double b = s1.next_gaussian();
    sum0 += a;
    sum1 += b;
    sum00 += a * a;
    sum11 += b * b;
    sum01 += a * b;
  }
  const double nd = static_cast<double>(n);
  const double cov = sum01 / nd - (sum0 / nd) * (sum1 / nd);
  const double corr = cov / std::sqrt((sum00 / nd - sum0 / nd * (sum0 / nd)) *
                                      (sum11 / nd - sum1 / nd * (sum1 / nd)));
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("perturb_uniform with sigma zero is the plain clipped sum") {
  std::vector<GradientVector> samples = {from({3.0, 4.0}), from({0.1, 0.2})};
  RngStream rng(4);
  const GradientVector out = perturb_uniform(samples, 0.0, 1.0, rng);
  const auto expected =
      oracle::reference_dp_sgd({{3.0, 4.0}, {0.1, 0.2}}, 0.0, 1.0, RngStream(4));
  REQUIRE(out.size() == 2);
  CHECK(out.values()[0] == expected[0]);
  CHECK(out.values()[1] == expected[1]);
}

TEST_CASE("perturb_uniform matches the hand-written reference step") {
  // 2 samples, 3 params, seeded noise replayed by the oracle.
  std::vector<GradientVector> samples = {from({2.0, -2.0, 1.0}), from({0.2, 0.1, -0.3})};
  RngStream rng(2718);
  const GradientVector out = perturb_uniform(samples, 2.0, 1.0, rng);
  const auto expected = oracle::reference_dp_sgd(
      {{2.0, -2.0, 1.0}, {0.2, 0.1, -0.3}}, 2.0, 1.0, RngStream(2718));
  REQUIRE(out.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(out.values()[j] == doctest::Approx(expected[j]).epsilon(1e-15));
  }
}

TEST_CASE("perturb_uniform noise variance matches sigma^2 C^2 within 2%") {
  const double sigma = 3.0, c = 0.5;
  const std::size_t dim = 20, draws = 5000;
  std::vector<GradientVector> empty_batch = {GradientVector::zeros(dim)};
  double sum = 0, sum_sq = 0;
  RngStream root(555);
  for (std::size_t i = 0; i < draws; ++i) {
    RngStream sub = root.split(i);
    const GradientVector out = perturb_uniform(empty_batch, sigma, c, sub);
    for (double v : out.values()) {
      sum += v;
      sum_sq += v * v;
    }
  }
  const double n = static_cast<double>(dim * draws);
  const double var = sum_sq / n - (sum / n) * (sum / n);
  CHECK(var == doctest::Approx(sigma * sigma * c * c).epsilon(0.02));
}
