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

#include "noise_policy.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

namespace sadp {

using nlohmann::ordered_json;

void NoisePolicy::validate() const {
  if (!(sigma_low > 0) || !(sigma_high >= sigma_low)) {
    fail(ErrorCode::config, "noise policy requires 0 < sigma_low <= sigma_high");
  }
  if (!(clip_norm > 0)) fail(ErrorCode::config, "clip_norm must be positive");
  if (!(low_min > 0) || !(low_min <= low_max) || !(low_max <= 1.0)) {
    fail(ErrorCode::config, "noise policy bands must satisfy 0 < low_min <= low_max <= 1");
  }
}

std::string NoisePolicy::to_json() const {
  ordered_json j;
  j["sigma_low"] = sigma_low;
  j["sigma_high"] = sigma_high;
  j["low_min"] = low_min;
  j["low_max"] = low_max;
  j["clip_norm"] = clip_norm;
  return j.dump(2) + "\n";
}

NoisePolicy NoisePolicy::from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("noise policy JSON: ") + e.what());
  }
  NoisePolicy policy;
  try {
    policy.sigma_low = j.at("sigma_low").get<double>();
    policy.sigma_high = j.at("sigma_high").get<double>();
    policy.low_min = j.at("low_min").get<double>();
    policy.low_max = j.at("low_max").get<double>();
    policy.clip_norm = j.at("clip_norm").get<double>();
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("noise policy JSON: all of sigma_low, sigma_high, "
                                       "low_min, low_max, clip_norm are required: ") +
                               e.what());
  }
  policy.validate();
  return policy;
}

NoisePolicy NoisePolicy::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open policy file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

double map_score(double s, const NoisePolicy& policy) {
  if (!(s >= 0.0) || s > 1.0) {
    fail(ErrorCode::domain, "sensitivity score outside [0, 1]: " + std::to_string(s));
  }
  if (s < policy.low_min) return 0.0;
  if (s <= policy.low_max) return policy.sigma_low;
  return policy.sigma_high;
}

double implied_epsilon(double clip_norm, double sigma) {
  if (!(clip_norm > 0)) fail(ErrorCode::domain, "clip_norm must be positive");
  if (sigma < 0) fail(ErrorCode::domain, "sigma must be non-negative");
  if (sigma == 0) return std::numeric_limits<double>::infinity();  // "no noise"
  return clip_norm / sigma;
}

AnnotatedSequence annotate(const TokenSequence& seq,
                           const std::vector<std::optional<std::string>>& assignment,
                           const SensitivityReport& report, const NoisePolicy& policy) {
  policy.validate();
  if (assignment.size() != seq.tokens.size()) {
    fail(ErrorCode::contract, "assignment length does not match token count");
  }
  AnnotatedSequence out;
  out.seq = seq;
  out.scores.reserve(seq.tokens.size());
  out.sigmas.reserve(seq.tokens.size());
  for (const auto& type : assignment) {
    double s = 0.0;
    if (type.has_value()) {
      const TypeScore* ts = report.find(*type);
      if (ts == nullptr) {
        fail(ErrorCode::contract, "assigned PII type missing from report: " + *type);
      }
      s = ts->s_final;
    }
    out.scores.push_back(s);
    out.sigmas.push_back(map_score(s, policy));
  }
  return out;
}

}  // namespace sadp
