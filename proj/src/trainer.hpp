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

#ifndef SADP_TRAINER_HPP
#define SADP_TRAINER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "accountant.hpp"
#include "dp_core.hpp"
#include "noise_policy.hpp"

namespace sadp {

// Single-layer embedding-softmax language model. The parameter vector is
// flat with a fixed documented order:
//   [ E (vocab x dim, row-major) | W (dim x vocab, row-major) | b (vocab) ]
// Position i of a window predicts token i+1 through
//   logits = W^T E[t_i] + b.
struct ModelParams {
  std::uint32_t vocab_size = 0;
  std::uint32_t dim = 0;
  std::vector<double> values;

  static ModelParams init(std::uint32_t vocab_size, std::uint32_t dim, double scale,
                          std::uint64_t seed);

  std::size_t param_count() const { return values.size(); }
  static std::size_t param_count_for(std::uint32_t vocab_size, std::uint32_t dim) {
    return static_cast<std::size_t>(vocab_size) * dim * 2 + vocab_size;
  }

  std::size_t embedding_offset(std::int32_t token) const {
    return static_cast<std::size_t>(token) * dim;
  }
  std::size_t output_offset() const { return static_cast<std::size_t>(vocab_size) * dim; }
  std::size_t bias_offset() const { return static_cast<std::size_t>(vocab_size) * dim * 2; }

  bool all_finite() const;

  // Flat binary checkpoint: 16-byte header (magic "SADP", u32 version,
  // u32 vocab_size, u32 dim) followed by the parameter array as
  // little-endian 64-bit floats.
  void save_checkpoint(const std::string& path) const;
  static ModelParams load_checkpoint(const std::string& path);
};

enum class Arm { no_dp, dp_sgd_uniform, sa_adp };
Arm parse_arm(std::string_view name);
const char* arm_name(Arm arm);

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  double learning_rate = 0.001;
  std::uint32_t batch_size = 16;  // used only to derive q when q == 0
  std::uint32_t seq_len = 64;
  std::uint32_t epochs = 3;
  double q = 0.1;  // Poisson sample rate; 0 means "derive from batch_size"
  Arm arm = Arm::no_dp;
  double sigma = 2.0;  // dp_sgd_uniform noise multiplier
  NoisePolicy policy;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::sgd;
  std::uint32_t embed_dim = 32;
  double init_scale = 0.1;
  double delta = 1e-5;
  std::vector<double> alpha_grid;  // empty = accountant default
  bool amplify_subsampling = false;
  double eval_fraction = 0.1;  // held-out document fraction; 0 = eval on train
  bool label_accuracy = false; // restrict accuracy to record-final (label) tokens

  void validate() const;
};

struct EvalMetrics {
  double accuracy = 0.0;
  double perplexity = 0.0;
  double mean_nll = 0.0;
  std::uint64_t positions = 0;
};

struct EpochRow {
  std::uint32_t epoch = 0;       // 1-based
  std::uint64_t steps_done = 0;  // cumulative optimizer steps
  double mean_loss = 0.0;        // mean training NLL over the epoch
  EvalMetrics eval;
  bool has_epsilon = false;
  double epsilon_at_32 = 0.0;
  double epsilon_min = 0.0;
  TierCounts tiers;  // summed over the epoch (sa_adp only)
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRow> epochs;
  std::optional<PrivacyLedger> ledger;  // present for DP arms
  EvalMetrics final_eval;
  double effective_q = 0.0;
  std::uint64_t total_steps = 0;

  // CSV export with the fixed header
  // epoch,step,arm,loss,accuracy,perplexity,epsilon_at_32,epsilon_min,tier0,tier_low,tier_high
  std::string metrics_csv(Arm arm) const;
};

// Mean NLL of a window (>= 2 tokens); per-position losses are appended to
// *per_position when provided.
double forward_loss(const ModelParams& params, std::span<const std::int32_t> window,
                    std::vector<double>* per_position = nullptr);

// Gradient of each position's loss term with respect to all parameters,
// flattened in the documented order. A window of n tokens yields n-1
// gradients; fewer than 2 tokens yield none. The sum of the gradients
// divided by the position count equals the gradient of the mean loss.
std::vector<GradientVector> per_token_grads(const ModelParams& params,
                                            std::span<const std::int32_t> window);

// Trains one arm on the tokenized corpus. `annotations`, when given, must
// parallel `corpus` (same order and token counts) and is required for the
// sa_adp arm. Sequences are cut into non-overlapping seq_len windows (a
// final short window is kept when it has >= 2 tokens); batches are Poisson
// subsampled at rate q with ceil(1/q) steps per epoch.
TrainResult train(const std::vector<TokenSequence>& corpus,
                  const std::vector<AnnotatedSequence>* annotations,
                  std::uint32_t vocab_size, const TrainConfig& config);

// Next-token metrics on a held-out corpus: accuracy is top-1 argmax with
// ties broken toward the lowest token id; perplexity is exp(mean NLL).
// label_accuracy restricts the accuracy numerator/denominator to positions
// whose target is the final token of its document (the label slot of a
// flattened record).
EvalMetrics evaluate(const ModelParams& params, const std::vector<TokenSequence>& held_out,
                     std::uint32_t seq_len, bool label_accuracy = false);

}  // namespace sadp

#endif  // SADP_TRAINER_HPP
