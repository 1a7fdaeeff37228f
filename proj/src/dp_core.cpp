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

#include "dp_core.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace sadp {

namespace {

double checked_norm(const GradientVector& g, const char* what) {
  const double norm = g.l2_norm();
  if (!std::isfinite(norm)) {
    fail(ErrorCode::domain, std::string("non-finite ") + what);
  }
  return norm;
}

}  // namespace

GradientVector::GradientVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      fail(ErrorCode::domain,
           "non-finite gradient entry at coordinate " + std::to_string(i));
    }
  }
}

GradientVector GradientVector::zeros(std::size_t n) {
  GradientVector g;
  g.values_.assign(n, 0.0);
  g.norm_cache_ = 0.0;
  return g;
}

double GradientVector::l2_norm() const {
  if (norm_cache_ >= 0.0) return norm_cache_;
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  norm_cache_ = std::sqrt(sum);
  return norm_cache_;
}

GradientVector clip(const GradientVector& g, double clip_norm) {
  if (!(clip_norm > 0)) fail(ErrorCode::domain, "clip norm must be positive");
  const double norm = checked_norm(g, "gradient");
  if (norm <= clip_norm) return g;  // includes the zero vector
  const double scale = clip_norm / norm;
  GradientVector out = g;
  for (double& v : out.mutable_values()) v *= scale;
  return out;
}

GradientVector noise(const GradientVector& g_clipped, double sigma, double clip_norm,
                     RngStream& rng) {
  if (sigma < 0) fail(ErrorCode::domain, "sigma must be non-negative");
  if (sigma == 0) return g_clipped;
  checked_norm(g_clipped, "gradient");
  const double stddev = sigma * clip_norm;
  GradientVector out = g_clipped;
  for (double& v : out.mutable_values()) v += stddev * rng.next_gaussian();
  return out;
}

PerturbResult perturb_sequence(std::span<const GradientVector> gradients,
                               std::span<const double> sigmas, const NoisePolicy& policy,
                               const RngStream& rng) {
  policy.validate();
  if (gradients.size() != sigmas.size()) {
    fail(ErrorCode::contract, "gradient count " + std::to_string(gradients.size()) +
                                  " does not match token count " +
                                  std::to_string(sigmas.size()));
  }

  PerturbResult result;
  if (gradients.empty()) return result;

  const std::size_t dim = gradients[0].size();
  result.sum = GradientVector::zeros(dim);
  std::vector<double>& acc = result.sum.mutable_values();
  const double c = policy.clip_norm;

  for (std::size_t i = 0; i < gradients.size(); ++i) {
    const GradientVector& g = gradients[i];
    if (g.size() != dim) {
      fail(ErrorCode::contract, "gradient dimension mismatch at token " + std::to_string(i));
    }
    const double norm = g.l2_norm();
    if (!std::isfinite(norm)) {
      fail(ErrorCode::domain, "non-finite gradient at token " + std::to_string(i));
    }
    const std::vector<double>& gv = g.values();
    if (norm <= c) {
      for (std::size_t j = 0; j < dim; ++j) acc[j] += gv[j];
    } else {
      const double scale = c / norm;
      for (std::size_t j = 0; j < dim; ++j) acc[j] += scale * gv[j];
    }

    const double sigma = sigmas[i];
    if (sigma < 0) fail(ErrorCode::domain, "negative sigma at token " + std::to_string(i));
    if (sigma == 0) {
      ++result.tiers.zero;
      continue;
    }
    if (sigma == policy.sigma_low) {
      ++result.tiers.low;
    } else {
      ++result.tiers.high;
    }
    RngStream token_rng = rng.split(i);
    const double stddev = sigma * c;
    for (std::size_t j = 0; j < dim; ++j) acc[j] += stddev * token_rng.next_gaussian();
  }
  return result;
}

PerturbResult perturb_sequence(std::span<const GradientVector> gradients,
                               const AnnotatedSequence& annotated, const NoisePolicy& policy,
                               const RngStream& rng) {
  return perturb_sequence(gradients,
                          std::span<const double>(annotated.sigmas.data(), annotated.sigmas.size()),
                          policy, rng);
}

GradientVector perturb_uniform(std::span<const GradientVector> sample_gradients,
                               double sigma, double clip_norm, RngStream& rng) {
  if (!(clip_norm > 0)) fail(ErrorCode::domain, "clip norm must be positive");
  if (sigma < 0) fail(ErrorCode::domain, "sigma must be non-negative");
  if (sample_gradients.empty()) return GradientVector();

  const std::size_t dim = sample_gradients[0].size();
  GradientVector out = GradientVector::zeros(dim);
  std::vector<double>& acc = out.mutable_values();
  for (std::size_t i = 0; i < sample_gradients.size(); ++i) {
    const GradientVector& g = sample_gradients[i];
    if (g.size() != dim) {
      fail(ErrorCode::contract, "gradient dimension mismatch at sample " + std::to_string(i));
    }
    const double norm = g.l2_norm();
    if (!std::isfinite(norm)) {
      fail(ErrorCode::domain, "non-finite gradient at sample " + std::to_string(i));
    }
    const std::vector<double>& gv = g.values();
    if (norm <= clip_norm) {
      for (std::size_t j = 0; j < dim; ++j) acc[j] += gv[j];
    } else {
      const double scale = clip_norm / norm;
      for (std::size_t j = 0; j < dim; ++j) acc[j] += scale * gv[j];
    }
  }
  if (sigma > 0) {
    const double stddev = sigma * clip_norm;
    for (std::size_t j = 0; j < dim; ++j) acc[j] += stddev * rng.next_gaussian();
  }
  return out;
}

}  // namespace sadp
