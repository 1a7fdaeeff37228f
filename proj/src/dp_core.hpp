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

#ifndef SADP_DP_CORE_HPP
#define SADP_DP_CORE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "noise_policy.hpp"
#include "rng.hpp"

namespace sadp {

// Flat vector of parameter partials in the documented parameter order
// (see ModelParams). Entries are finite; the validating constructor
// rejects NaN/Inf.
class GradientVector {
 public:
  GradientVector() = default;
  // Validates finiteness of every entry.
  explicit GradientVector(std::vector<double> values);
  static GradientVector zeros(std::size_t n);

  std::size_t size() const { return values_.size(); }
  double l2_norm() const;  // cached after first computation

  const std::vector<double>& values() const { return values_; }
  // Mutable access invalidates the norm cache.
  std::vector<double>& mutable_values() {
    norm_cache_ = -1.0;
    return values_;
  }

  bool operator==(const GradientVector& other) const { return values_ == other.values_; }

 private:
  std::vector<double> values_;
  mutable double norm_cache_ = -1.0;
};

// L2 clipping: g * min(1, C / ||g||). A vector already inside the ball is
// returned unchanged (bit-for-bit); the zero vector is a no-op. Rejects
// non-finite input.
GradientVector clip(const GradientVector& g, double clip_norm);

// Adds i.i.d. Gaussian noise with per-coordinate standard deviation
// sigma * clip_norm; sigma == 0 returns the input bit-for-bit.
GradientVector noise(const GradientVector& g_clipped, double sigma, double clip_norm,
                     RngStream& rng);

struct TierCounts {
  std::uint64_t zero = 0;  // tokens with sigma == 0
  std::uint64_t low = 0;   // tokens at policy sigma_low
  std::uint64_t high = 0;  // everything above sigma_low
};

struct PerturbResult {
  GradientVector sum;  // noised-and-clipped gradients accumulated in order
  TierCounts tiers;
};

// Token-wise noise injection: every per-token gradient is clipped to the
// policy clip norm, then tokens with sigma > 0 receive an independent
// full-dimension Gaussian draw with stddev sigma_i * C from the stream
// split at their token index. Gradients and noise accumulate into `sum`
// in token order, so the result is independent of any parallel schedule.
PerturbResult perturb_sequence(std::span<const GradientVector> gradients,
                               std::span<const double> sigmas, const NoisePolicy& policy,
                               const RngStream& rng);

// Convenience overload reading sigmas from an AnnotatedSequence; the
// annotation must cover exactly one sigma per gradient.
PerturbResult perturb_sequence(std::span<const GradientVector> gradients,
                               const AnnotatedSequence& annotated, const NoisePolicy& policy,
                               const RngStream& rng);

// Record-level DP-SGD aggregation: clip each per-sample gradient to C, sum,
// then add a single Gaussian draw with stddev sigma * C to the aggregate.
GradientVector perturb_uniform(std::span<const GradientVector> sample_gradients,
                               double sigma, double clip_norm, RngStream& rng);

}  // namespace sadp

#endif  // SADP_DP_CORE_HPP
