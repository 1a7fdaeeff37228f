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

#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "errors.hpp"
#include "rng.hpp"

namespace sadp {

namespace {

// Fixed stream ids keep initialization, batch sampling and noise draws on
// independent substreams, so e.g. an arm that draws no noise still samples
// the same batches as one that does.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

struct Window {
  std::vector<std::int32_t> tokens;
  std::vector<double> sigmas;             // per token; empty unless sa_adp
  std::vector<std::uint8_t> doc_final;    // 1 for the last token of the document
};

struct Workspace {
  std::vector<double> logits;
  std::vector<double> delta;  // softmax probs, then p - onehot(target)
  std::vector<GradientVector> grad_pool;  // reused across windows
};

void check_token(const ModelParams& params, std::int32_t t) {
  if (t < 0 || static_cast<std::uint32_t>(t) >= params.vocab_size) {
    fail(ErrorCode::domain, "token id out of range: " + std::to_string(t));
  }
}

// NLL of predicting `target` from `input`; when want_delta, ws.delta ends
// up holding p - onehot(target).
double position_nll(const ModelParams& params, std::int32_t input, std::int32_t target,
                    Workspace& ws, bool want_delta) {
  check_token(params, input);
  check_token(params, target);
  const std::uint32_t v = params.vocab_size;
  const std::uint32_t d = params.dim;
  const double* e_row = params.values.data() + params.embedding_offset(input);
  const double* w = params.values.data() + params.output_offset();
  const double* b = params.values.data() + params.bias_offset();

  ws.logits.assign(b, b + v);
  double* logits = ws.logits.data();
  for (std::uint32_t k = 0; k < d; ++k) {
    const double xk = e_row[k];
    const double* w_row = w + static_cast<std::size_t>(k) * v;
    for (std::uint32_t j = 0; j < v; ++j) logits[j] += xk * w_row[j];
  }

  double max_logit = logits[0];
  for (std::uint32_t j = 1; j < v; ++j) max_logit = std::max(max_logit, logits[j]);
  double z = 0.0;
  ws.delta.resize(v);
  double* delta = ws.delta.data();
  for (std::uint32_t j = 0; j < v; ++j) {
    delta[j] = std::exp(logits[j] - max_logit);
    z += delta[j];
  }
  const double nll = std::log(z) - (logits[target] - max_logit);
  if (want_delta) {
    const double inv_z = 1.0 / z;
    for (std::uint32_t j = 0; j < v; ++j) delta[j] *= inv_z;
    delta[target] -= 1.0;
  }
  return nll;
}

struct WindowGrads {
  std::span<GradientVector> grads;  // one per position; backed by ws.grad_pool
  double loss_sum = 0.0;
};

// Per-position gradients written into the workspace pool. Only the
// embedding block needs zeroing between uses; the W and bias blocks are
// fully overwritten every time.
WindowGrads window_grads(const ModelParams& params, std::span<const std::int32_t> tokens,
                         Workspace& ws) {
  WindowGrads out;
  if (tokens.size() < 2) return out;
  const std::uint32_t v = params.vocab_size;
  const std::uint32_t d = params.dim;
  const std::size_t total = params.param_count();
  const std::size_t positions = tokens.size() - 1;
  const double* w = params.values.data() + params.output_offset();

  if (ws.grad_pool.size() < positions) ws.grad_pool.resize(positions);

  for (std::size_t i = 0; i < positions; ++i) {
    const std::int32_t input = tokens[i];
    const std::int32_t target = tokens[i + 1];
    out.loss_sum += position_nll(params, input, target, ws, /*want_delta=*/true);
    const double* delta = ws.delta.data();
    const double* e_row = params.values.data() + params.embedding_offset(input);

    GradientVector& g = ws.grad_pool[i];
    std::vector<double>& gv = g.mutable_values();
    const bool fresh = gv.size() != total;
    if (fresh) gv.assign(total, 0.0);
    double* data = gv.data();
    // dL/dE is zero except the input token's row.
    if (!fresh) std::fill(data, data + params.output_offset(), 0.0);
    double* g_e = data + params.embedding_offset(input);
    for (std::uint32_t k = 0; k < d; ++k) {
      const double* w_row = w + static_cast<std::size_t>(k) * v;
      double acc = 0.0;
      for (std::uint32_t j = 0; j < v; ++j) acc += w_row[j] * delta[j];
      g_e[k] = acc;
    }
    // dL/dW = E[input] outer delta
    double* g_w = data + params.output_offset();
    for (std::uint32_t k = 0; k < d; ++k) {
      const double xk = e_row[k];
      double* dst = g_w + static_cast<std::size_t>(k) * v;
      for (std::uint32_t j = 0; j < v; ++j) dst[j] = xk * delta[j];
    }
    // dL/db = delta
    double* g_b = data + params.bias_offset();
    for (std::uint32_t j = 0; j < v; ++j) g_b[j] = delta[j];
  }
  out.grads = std::span<GradientVector>(ws.grad_pool.data(), positions);
  return out;
}

std::vector<Window> build_windows(const std::vector<TokenSequence>& corpus,
                                  const std::vector<AnnotatedSequence>* annotations,
                                  const std::vector<std::size_t>& indices,
                                  std::uint32_t seq_len, bool want_sigmas) {
  std::vector<Window> windows;
  for (std::size_t idx : indices) {
    const TokenSequence& seq = corpus[idx];
    const std::size_t n = seq.tokens.size();
    for (std::size_t begin = 0; begin < n; begin += seq_len) {
      const std::size_t end = std::min(n, begin + seq_len);
      if (end - begin < 2) break;  // a final 1-token window has no prediction
      Window win;
      win.tokens.assign(seq.tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                        seq.tokens.begin() + static_cast<std::ptrdiff_t>(end));
      if (want_sigmas && annotations != nullptr) {
        const AnnotatedSequence& ann = (*annotations)[idx];
        win.sigmas.assign(ann.sigmas.begin() + static_cast<std::ptrdiff_t>(begin),
                          ann.sigmas.begin() + static_cast<std::ptrdiff_t>(end));
      }
      win.doc_final.assign(end - begin, 0);
      if (end == n) win.doc_final.back() = 1;
      windows.push_back(std::move(win));
    }
  }
  return windows;
}

EvalMetrics evaluate_windows(const ModelParams& params, const std::vector<Window>& windows,
                             bool label_accuracy) {
  EvalMetrics m;
  Workspace ws;
  double nll_sum = 0.0;
  std::uint64_t correct = 0, acc_positions = 0;
  const std::uint32_t v = params.vocab_size;
  for (const Window& win : windows) {
    for (std::size_t i = 0; i + 1 < win.tokens.size(); ++i) {
      nll_sum += position_nll(params, win.tokens[i], win.tokens[i + 1], ws, false);
      ++m.positions;
      if (label_accuracy && !win.doc_final[i + 1]) continue;
      // argmax with ties broken toward the lowest token id
      const double* logits = ws.logits.data();
      std::uint32_t best = 0;
      for (std::uint32_t j = 1; j < v; ++j) {
        if (logits[j] > logits[best]) best = j;
      }
      ++acc_positions;
      if (best == static_cast<std::uint32_t>(win.tokens[i + 1])) ++correct;
    }
  }
  if (m.positions > 0) {
    m.mean_nll = nll_sum / static_cast<double>(m.positions);
    m.perplexity = std::exp(m.mean_nll);
  }
  if (acc_positions > 0) {
    m.accuracy = static_cast<double>(correct) / static_cast<double>(acc_positions);
  }
  return m;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

}  // namespace

ModelParams ModelParams::init(std::uint32_t vocab_size, std::uint32_t dim, double scale,
                              std::uint64_t seed) {
  if (vocab_size == 0 || dim == 0) fail(ErrorCode::config, "empty model shape");
  ModelParams p;
  p.vocab_size = vocab_size;
  p.dim = dim;
  p.values.assign(param_count_for(vocab_size, dim), 0.0);
  RngStream rng(seed, kInitStream);
  const std::size_t weight_count = static_cast<std::size_t>(vocab_size) * dim * 2;
  for (std::size_t i = 0; i < weight_count; ++i) p.values[i] = scale * rng.next_gaussian();
  // Bias stays zero.
  return p;
}

bool ModelParams::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void ModelParams::save_checkpoint(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write checkpoint: " + path);
  const char magic[4] = {'S', 'A', 'D', 'P'};
  const std::uint32_t version = 1;
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&vocab_size), 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) fail(ErrorCode::io, "short write to checkpoint: " + path);
}

ModelParams ModelParams::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open checkpoint: " + path);
  char magic[4];
  std::uint32_t version = 0;
  ModelParams p;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&p.vocab_size), 4);
  in.read(reinterpret_cast<char*>(&p.dim), 4);
  if (!in || std::memcmp(magic, "SADP", 4) != 0) {
    fail(ErrorCode::parse, "not a checkpoint file: " + path);
  }
  if (version != 1) fail(ErrorCode::parse, "unsupported checkpoint version");
  p.values.resize(param_count_for(p.vocab_size, p.dim));
  in.read(reinterpret_cast<char*>(p.values.data()),
          static_cast<std::streamsize>(p.values.size() * sizeof(double)));
  if (!in) fail(ErrorCode::parse, "truncated checkpoint: " + path);
  return p;
}

Arm parse_arm(std::string_view name) {
  if (name == "no_dp") return Arm::no_dp;
  if (name == "dp_sgd_uniform") return Arm::dp_sgd_uniform;
  if (name == "sa_adp") return Arm::sa_adp;
  fail(ErrorCode::config, "unknown arm: " + std::string(name));
}

const char* arm_name(Arm arm) {
  switch (arm) {
    case Arm::no_dp: return "no_dp";
    case Arm::dp_sgd_uniform: return "dp_sgd_uniform";
    case Arm::sa_adp: return "sa_adp";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) fail(ErrorCode::config, "learning_rate must be positive");
  if (seq_len < 2) fail(ErrorCode::config, "seq_len must be at least 2");
  if (epochs == 0) fail(ErrorCode::config, "epochs must be positive");
  if (q < 0 || q > 1) fail(ErrorCode::config, "sample rate q must lie in (0, 1]");
  if (q == 0 && batch_size == 0) {
    fail(ErrorCode::config, "either q or batch_size must be set");
  }
  if (sigma < 0) fail(ErrorCode::config, "sigma must be non-negative");
  if (embed_dim == 0) fail(ErrorCode::config, "embed_dim must be positive");
  if (!(init_scale > 0)) fail(ErrorCode::config, "init_scale must be positive");
  if (!(delta > 0) || !(delta < 1)) fail(ErrorCode::config, "delta must lie in (0, 1)");
  if (eval_fraction < 0 || eval_fraction > 0.5) {
    fail(ErrorCode::config, "eval_fraction must lie in [0, 0.5]");
  }
  policy.validate();
}

double forward_loss(const ModelParams& params, std::span<const std::int32_t> window,
                    std::vector<double>* per_position) {
  if (window.size() < 2) fail(ErrorCode::contract, "window must hold at least 2 tokens");
  Workspace ws;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    const double nll = position_nll(params, window[i], window[i + 1], ws, false);
    if (per_position != nullptr) per_position->push_back(nll);
    sum += nll;
  }
  return sum / static_cast<double>(window.size() - 1);
}

std::vector<GradientVector> per_token_grads(const ModelParams& params,
                                            std::span<const std::int32_t> window) {
  Workspace ws;
  const WindowGrads wg = window_grads(params, window, ws);
  return {wg.grads.begin(), wg.grads.end()};
}

TrainResult train(const std::vector<TokenSequence>& corpus,
                  const std::vector<AnnotatedSequence>* annotations,
                  std::uint32_t vocab_size, const TrainConfig& config) {
  config.validate();
  if (config.arm == Arm::sa_adp && annotations == nullptr) {
    fail(ErrorCode::contract, "sa_adp arm requires annotations");
  }
  if (annotations != nullptr) {
    if (annotations->size() != corpus.size()) {
      fail(ErrorCode::contract, "annotations do not parallel the corpus");
    }
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if ((*annotations)[i].sigmas.size() != corpus[i].tokens.size()) {
        fail(ErrorCode::contract,
             "annotation length mismatch at document " + std::to_string(i));
      }
    }
  }

  // Document-level held-out split: every k-th document evaluates.
  std::vector<std::size_t> train_idx, eval_idx;
  const long k = config.eval_fraction > 0
                     ? std::max<long>(2, std::lround(1.0 / config.eval_fraction))
                     : 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (k > 0 && static_cast<long>(i % static_cast<std::size_t>(k)) == k - 1) {
      eval_idx.push_back(i);
    } else {
      train_idx.push_back(i);
    }
  }

  const bool want_sigmas = config.arm == Arm::sa_adp;
  std::vector<Window> train_windows =
      build_windows(corpus, annotations, train_idx, config.seq_len, want_sigmas);
  std::vector<Window> eval_windows =
      build_windows(corpus, annotations, eval_idx, config.seq_len, false);
  if (train_windows.empty()) {
    fail(ErrorCode::config, "corpus yields no training windows (need >= 2 tokens)");
  }
  if (eval_windows.empty()) eval_windows = train_windows;  // no held-out docs

  double q = config.q;
  if (q == 0) {
    q = std::min(1.0, static_cast<double>(config.batch_size) /
                          static_cast<double>(train_windows.size()));
  }
  const auto steps_per_epoch =
      static_cast<std::uint64_t>(std::max<long long>(1, std::llround(1.0 / q)));

  TrainResult result;
  result.effective_q = q;
  result.params =
      ModelParams::init(vocab_size, config.embed_dim, config.init_scale, config.seed);
  const std::size_t total = result.params.param_count();

  const bool is_dp = config.arm != Arm::no_dp;
  if (is_dp) {
    result.ledger.emplace(config.alpha_grid, config.delta, config.amplify_subsampling);
  }

  std::vector<double> acc(total, 0.0);
  std::vector<double> window_sum(total, 0.0);
  std::vector<double> adam_m, adam_v;
  if (config.optimizer == OptimizerKind::adam) {
    adam_m.assign(total, 0.0);
    adam_v.assign(total, 0.0);
  }
  std::uint64_t adam_t = 0;

  const RngStream batch_root(config.seed, kBatchStream);
  const RngStream noise_root(config.seed, kNoiseStream);
  Workspace ws;
  std::uint64_t global_step = 0;

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss_sum = 0.0;
    std::uint64_t epoch_positions = 0;
    TierCounts epoch_tiers;

    for (std::uint64_t s = 0; s < steps_per_epoch; ++s) {
      RngStream brng = batch_root.split(global_step);
      std::vector<std::size_t> batch;
      for (std::size_t w = 0; w < train_windows.size(); ++w) {
        if (brng.next_unit() < q) batch.push_back(w);
      }

      std::fill(acc.begin(), acc.end(), 0.0);
      std::uint64_t denom = 0;
      double step_loss_sum = 0.0;
      std::uint64_t step_positions = 0;

      if (config.arm == Arm::dp_sgd_uniform) {
        std::vector<GradientVector> sample_grads;
        sample_grads.reserve(batch.size());
        for (std::size_t w : batch) {
          WindowGrads wg = window_grads(result.params, train_windows[w].tokens, ws);
          if (!std::isfinite(wg.loss_sum)) {
            fail(ErrorCode::diverged,
                 "training diverged at step " + std::to_string(global_step));
          }
          step_loss_sum += wg.loss_sum;
          step_positions += wg.grads.size();
          GradientVector sample = GradientVector::zeros(total);
          std::vector<double>& sv = sample.mutable_values();
          const double inv = 1.0 / static_cast<double>(wg.grads.size());
          for (const GradientVector& g : wg.grads) {
            const std::vector<double>& gv = g.values();
            for (std::size_t j = 0; j < total; ++j) sv[j] += gv[j];
          }
          for (std::size_t j = 0; j < total; ++j) sv[j] *= inv;
          sample_grads.push_back(std::move(sample));
        }
        RngStream srng = noise_root.split(global_step);
        GradientVector agg =
            perturb_uniform(sample_grads, config.sigma, config.policy.clip_norm, srng);
        if (!batch.empty()) acc = agg.values();
        denom = batch.size();
        result.ledger->record_step({config.sigma}, q);
      } else {
        TierCounts step_tiers;
        for (std::size_t w : batch) {
          const Window& win = train_windows[w];
          WindowGrads wg = window_grads(result.params, win.tokens, ws);
          if (!std::isfinite(wg.loss_sum)) {
            fail(ErrorCode::diverged,
                 "training diverged at step " + std::to_string(global_step));
          }
          step_loss_sum += wg.loss_sum;
          step_positions += wg.grads.size();
          denom += wg.grads.size();
          if (config.arm == Arm::no_dp) {
            // Window-level aggregation mirrors perturb_sequence's
            // accumulation order, keeping the sigma-zero sa_adp path
            // bit-identical to this baseline.
            std::fill(window_sum.begin(), window_sum.end(), 0.0);
            for (const GradientVector& g : wg.grads) {
              const std::vector<double>& gv = g.values();
              for (std::size_t j = 0; j < total; ++j) window_sum[j] += gv[j];
            }
            for (std::size_t j = 0; j < total; ++j) acc[j] += window_sum[j];
          } else {
            // Position i's loss term is the NLL of target token i+1, so the
            // target's noise multiplier governs that gradient.
            std::span<const double> slice(win.sigmas.data() + 1, win.sigmas.size() - 1);
            const RngStream wrng = noise_root.split(global_step).split(w);
            PerturbResult pr = perturb_sequence(
                std::span<const GradientVector>(wg.grads.data(), wg.grads.size()), slice,
                config.policy, wrng);
            const std::vector<double>& sv = pr.sum.values();
            for (std::size_t j = 0; j < total; ++j) acc[j] += sv[j];
            step_tiers.zero += pr.tiers.zero;
            step_tiers.low += pr.tiers.low;
            step_tiers.high += pr.tiers.high;
          }
        }
        if (config.arm == Arm::sa_adp) {
          epoch_tiers.zero += step_tiers.zero;
          epoch_tiers.low += step_tiers.low;
          epoch_tiers.high += step_tiers.high;
          std::vector<double> used;
          if (step_tiers.low > 0) used.push_back(config.policy.sigma_low);
          if (step_tiers.high > 0) used.push_back(config.policy.sigma_high);
          result.ledger->record_step(used, q);
        }
      }

      if (step_positions > 0) {
        const double mean_loss = step_loss_sum / static_cast<double>(step_positions);
        if (!std::isfinite(mean_loss)) {
          fail(ErrorCode::diverged,
               "training diverged at step " + std::to_string(global_step));
        }
        epoch_loss_sum += step_loss_sum;
        epoch_positions += step_positions;
      }

      if (denom > 0) {
        const double inv = 1.0 / static_cast<double>(denom);
        std::vector<double>& p = result.params.values;
        if (config.optimizer == OptimizerKind::sgd) {
          const double lr = config.learning_rate;
          for (std::size_t j = 0; j < total; ++j) p[j] -= lr * acc[j] * inv;
        } else {
          ++adam_t;
          constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
          const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam_t));
          const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam_t));
          const double lr = config.learning_rate;
          for (std::size_t j = 0; j < total; ++j) {
            const double g = acc[j] * inv;
            adam_m[j] = b1 * adam_m[j] + (1.0 - b1) * g;
            adam_v[j] = b2 * adam_v[j] + (1.0 - b2) * g * g;
            p[j] -= lr * (adam_m[j] / c1) / (std::sqrt(adam_v[j] / c2) + eps);
          }
        }
      }
      ++global_step;
    }

    EpochRow row;
    row.epoch = epoch + 1;
    row.steps_done = global_step;
    row.mean_loss =
        epoch_positions > 0 ? epoch_loss_sum / static_cast<double>(epoch_positions) : 0.0;
    row.eval = evaluate_windows(result.params, eval_windows, config.label_accuracy);
    row.tiers = epoch_tiers;
    if (is_dp && !result.ledger->steps().empty()) {
      const auto conv = result.ledger->convert();
      row.has_epsilon = true;
      row.epsilon_at_32 = conv.epsilon_at_32;
      row.epsilon_min = conv.epsilon;
    }
    result.epochs.push_back(row);
  }

  result.total_steps = global_step;
  result.final_eval = result.epochs.back().eval;
  return result;
}

EvalMetrics evaluate(const ModelParams& params, const std::vector<TokenSequence>& held_out,
                     std::uint32_t seq_len, bool label_accuracy) {
  if (held_out.empty()) fail(ErrorCode::contract, "held-out corpus is empty");
  std::vector<std::size_t> indices(held_out.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  const std::vector<Window> windows =
      build_windows(held_out, nullptr, indices, seq_len, false);
  return evaluate_windows(params, windows, label_accuracy);
}

std::string TrainResult::metrics_csv(Arm arm) const {
  std::string out =
      "epoch,step,arm,loss,accuracy,perplexity,epsilon_at_32,epsilon_min,"
      "tier0,tier_low,tier_high\n";
  for (const EpochRow& row : epochs) {
    out += std::to_string(row.epoch);
    out.push_back(',');
    out += std::to_string(row.steps_done);
    out.push_back(',');
    out += arm_name(arm);
    out.push_back(',');
    out += format_double(row.mean_loss);
    out.push_back(',');
    out += format_double(row.eval.accuracy);
    out.push_back(',');
    out += format_double(row.eval.perplexity);
    out.push_back(',');
    if (row.has_epsilon) out += format_double(row.epsilon_at_32);
    out.push_back(',');
    if (row.has_epsilon) out += format_double(row.epsilon_min);
    out.push_back(',');
    out += std::to_string(row.tiers.zero);
    out.push_back(',');
    out += std::to_string(row.tiers.low);
    out.push_back(',');
    out += std::to_string(row.tiers.high);
    out.push_back('\n');
  }
  return out;
}

}  // namespace sadp
