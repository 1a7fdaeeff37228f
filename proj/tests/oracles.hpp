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

// Test-only oracles. Each one recomputes an expected value through an
// independent code path (plain maps, long-double arithmetic, finite
// differences) and must stay decoupled from the implementation it checks.

#ifndef SADP_TESTS_ORACLES_HPP
#define SADP_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pii_detect.hpp"
#include "trainer.hpp"

namespace oracle {

struct BruteTypeScore {
  std::uint64_t count = 0;
  long double s_freq = 0, s_link = 0, s_datatype = 0, s_final = 0;
};

struct BruteReport {
  std::uint64_t n_total = 0;
  std::map<std::string, BruteTypeScore> types;
};

// Straight-line reimplementation of the scoring pipeline: tally spans with
// a plain map, then evaluate 1 - f/N and the weighted sum in long double.
inline BruteReport brute_score(const std::vector<sadp::PiiSpan>& spans,
                               const std::map<std::string, std::pair<bool, bool>>& flags,
                               long double w1, long double w2, long double w3) {
  BruteReport report;
  for (const auto& s : spans) {
    report.types[s.type].count++;
    report.n_total++;
  }
  for (auto& [name, t] : report.types) {
    t.s_freq = 1.0L - static_cast<long double>(t.count) /
                          static_cast<long double>(report.n_total);
    const auto& [linkable, datatype] = flags.at(name);
    t.s_link = linkable ? 1.0L : 0.0L;
    t.s_datatype = datatype ? 1.0L : 0.0L;
    t.s_final = w1 * t.s_freq + w2 * t.s_link + w3 * t.s_datatype;
  }
  return report;
}

// Central finite difference of the loss term at `position` with respect to
// parameter coordinate `coord`.
inline double fd_position_grad(const sadp::ModelParams& params,
                               std::span<const std::int32_t> window, std::size_t position,
                               std::size_t coord, double h) {
  sadp::ModelParams p = params;
  std::vector<double> plus, minus;
  p.values[coord] = params.values[coord] + h;
  sadp::forward_loss(p, window, &plus);
  p.values[coord] = params.values[coord] - h;
  sadp::forward_loss(p, window, &minus);
  return (plus[position] - minus[position]) / (2.0 * h);
}

// Reference record-level DP-SGD aggregation: per-sample L2 clip, plain sum,
// then one Gaussian draw with stddev sigma * C replayed from an identical
// stream.
inline std::vector<double> reference_dp_sgd(const std::vector<std::vector<double>>& samples,
                                            double sigma, double clip_norm,
                                            sadp::RngStream rng) {
  if (samples.empty()) return {};
  std::vector<double> sum(samples[0].size(), 0.0);
  for (const auto& g : samples) {
    long double sq = 0;
    for (double v : g) sq += static_cast<long double>(v) * v;
    const double norm = std::sqrt(static_cast<double>(sq));
    const double scale = norm <= clip_norm ? 1.0 : clip_norm / norm;
    for (std::size_t j = 0; j < g.size(); ++j) {
      sum[j] += scale == 1.0 ? g[j] : scale * g[j];
    }
  }
  if (sigma > 0) {
    for (std::size_t j = 0; j < sum.size(); ++j) {
      sum[j] += sigma * clip_norm * rng.next_gaussian();
    }
  }
  return sum;
}

}  // namespace oracle

#endif  // SADP_TESTS_ORACLES_HPP
