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

#ifndef SADP_RNG_HPP
#define SADP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace sadp {

// Counter-based splittable PRNG built on the splitmix64 finalizer
// (Steele, Lea & Flood 2014; Vigna's fixed-increment variant).
//
// A stream is fully determined by (seed, stream id); the k-th output is a
// pure function of (seed, stream, k), so identical (seed, counter) always
// yields identical draws, and child streams derived via split() are
// independent of the order in which the parent is consumed. Gradient noise
// is split per token index so results do not depend on execution order.
//
// Not a cryptographic generator; see the project README for the deployment
// caveat on secure randomness.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), base_(derive(seed, stream)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  // Deterministic child stream for index `idx`; the child starts at counter 0.
  RngStream split(std::uint64_t idx) const {
    return RngStream(seed_, finalize(stream_ + kStreamSalt) ^ finalize(idx + kSplitSalt));
  }

  std::uint64_t next_u64() { return finalize(base_ + ++counter_ * kGamma); }

  // Uniform in (0, 1]; never returns 0 so it is log-safe.
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. std::normal_distribution is
  // implementation-defined, so it cannot be used for reproducible output.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * kPi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;
  static constexpr std::uint64_t kSplitSalt = 0x8CB92BA72F3D8DD7ULL;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return finalize(seed + kGamma) ^ finalize(stream + kStreamSalt);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sadp

#endif  // SADP_RNG_HPP
