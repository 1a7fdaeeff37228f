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

#include "accountant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

namespace sadp {

using nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double step_rdp(double sigma, double alpha) {
  if (!(alpha > 1)) fail(ErrorCode::domain, "Renyi order must exceed 1");
  if (sigma < 0) fail(ErrorCode::domain, "sigma must be non-negative");
  if (sigma == 0) return kInf;
  return alpha / (2.0 * sigma * sigma);
}

double step_rdp_subsampled(double sigma, double alpha, double q) {
  if (!(q > 0) || q > 1) fail(ErrorCode::domain, "sample rate must lie in (0, 1]");
  if (sigma < 0) fail(ErrorCode::domain, "sigma must be non-negative");
  if (sigma == 0) return kInf;
  const double rounded = std::round(alpha);
  if (!(alpha >= 2) || std::abs(alpha - rounded) > 1e-9) {
    fail(ErrorCode::config, "subsampled accounting needs integer orders >= 2");
  }
  if (q == 1.0) return step_rdp(sigma, alpha);

  // log E = logsumexp_k [ log C(a,k) + (a-k) log(1-q) + k log q + (k^2-k)/(2 sigma^2) ]
  const auto a = static_cast<int>(rounded);
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  double max_term = -kInf;
  std::vector<double> terms(static_cast<std::size_t>(a) + 1);
  for (int k = 0; k <= a; ++k) {
    const double t = log_binomial(a, k) + (a - k) * log_1mq + k * log_q +
                     (static_cast<double>(k) * k - k) / (2.0 * sigma * sigma);
    terms[static_cast<std::size_t>(k)] = t;
    max_term = std::max(max_term, t);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  const double log_e = max_term + std::log(sum);
  // The expansion is an upper bound but never worse than the unsubsampled
  // mechanism; clamp to keep the charge monotone in q.
  return std::min(log_e / (alpha - 1.0), step_rdp(sigma, alpha));
}

std::vector<double> PrivacyLedger::default_orders() {
  std::vector<double> orders;
  for (int a = 2; a <= 64; ++a) orders.push_back(static_cast<double>(a));
  return orders;
}

PrivacyLedger::PrivacyLedger(std::vector<double> orders, double delta, bool amplify_subsampling)
    : orders_(std::move(orders)), delta_(delta), amplify_(amplify_subsampling) {
  if (!(delta_ > 0) || !(delta_ < 1)) fail(ErrorCode::config, "delta must lie in (0, 1)");
  if (orders_.empty()) orders_ = default_orders();
  for (double a : orders_) {
    if (!(a > 1)) fail(ErrorCode::config, "every Renyi order must exceed 1");
  }
  // Order 32 is always tracked so the fixed-order value stays reportable.
  if (std::find(orders_.begin(), orders_.end(), 32.0) == orders_.end()) {
    orders_.push_back(32.0);
  }
  std::sort(orders_.begin(), orders_.end());
  orders_.erase(std::unique(orders_.begin(), orders_.end()), orders_.end());
  totals_.assign(orders_.size(), 0.0);
}

void PrivacyLedger::record_step(const std::vector<double>& sigma_tiers, double q) {
  if (!(q > 0) || q > 1) fail(ErrorCode::config, "sample rate must lie in (0, 1]");

  double sigma_worst = kInf;
  for (double s : sigma_tiers) {
    if (s < 0) fail(ErrorCode::domain, "negative sigma in tier set");
    if (s > 0) sigma_worst = std::min(sigma_worst, s);
  }
  if (!std::isfinite(sigma_worst)) {
    // No noise anywhere in this step: the run cannot claim DP.
    ++non_private_steps_;
    steps_.push_back({steps_.size(), 0.0, q});
    return;
  }

  for (std::size_t i = 0; i < orders_.size(); ++i) {
    totals_[i] += amplify_ ? step_rdp_subsampled(sigma_worst, orders_[i], q)
                           : step_rdp(sigma_worst, orders_[i]);
  }
  steps_.push_back({steps_.size(), sigma_worst, q});
}

PrivacyLedger::Conversion PrivacyLedger::convert() const {
  if (steps_.empty()) fail(ErrorCode::contract, "no steps recorded");

  Conversion conv;
  conv.delta = delta_;
  if (non_private_steps_ > 0) {
    conv.non_private = true;
    conv.epsilon = kInf;
    conv.epsilon_at_32 = kInf;
    conv.argmin_order = 0.0;
    conv.note = std::to_string(non_private_steps_) +
                " step(s) ran without noise; no finite guarantee";
    return conv;
  }

  const double log_inv_delta = std::log(1.0 / delta_);
  double best = kInf;
  double best_order = orders_.front();
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    const double eps = totals_[i] + log_inv_delta / (orders_[i] - 1.0);
    if (eps < best) {
      best = eps;
      best_order = orders_[i];
    }
    if (orders_[i] == 32.0) conv.epsilon_at_32 = totals_[i] + log_inv_delta / 31.0;
  }
  conv.epsilon = best;
  conv.argmin_order = best_order;
  return conv;
}

std::string PrivacyLedger::to_json() const {
  ordered_json j;
  j["orders"] = orders_;
  j["totals"] = totals_;
  j["steps"] = ordered_json::array();
  for (const Step& s : steps_) {
    j["steps"].push_back({{"idx", s.index}, {"sigma", s.sigma}, {"q", s.q}});
  }
  j["delta"] = delta_;
  j["amplify_subsampling"] = amplify_;
  j["non_private_steps"] = non_private_steps_;
  if (!steps_.empty()) {
    const Conversion conv = convert();
    j["epsilon"] = conv.non_private ? ordered_json() : ordered_json(conv.epsilon);
    j["argmin_order"] = conv.argmin_order;
    j["epsilon_at_32"] = conv.non_private ? ordered_json() : ordered_json(conv.epsilon_at_32);
    j["non_private"] = conv.non_private;
    if (!conv.note.empty()) j["note"] = conv.note;
  }
  return j.dump(2) + "\n";
}

PrivacyLedger PrivacyLedger::from_json(const std::string& json_text) {
  try {
    const auto j = ordered_json::parse(json_text);
    PrivacyLedger ledger(j.at("orders").get<std::vector<double>>(),
                         j.at("delta").get<double>(),
                         j.value("amplify_subsampling", false));
    // Replaying the step log reproduces the totals; stored totals are
    // informative output, not trusted input.
    for (const auto& sj : j.at("steps")) {
      const double sigma = sj.at("sigma").get<double>();
      const double q = sj.at("q").get<double>();
      ledger.record_step({sigma}, q);
    }
    return ledger;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("ledger JSON: ") + e.what());
  }
}

PrivacyLedger PrivacyLedger::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open ledger file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace sadp
