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

#include "scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

namespace sadp {

using nlohmann::ordered_json;

void ScoreWeights::validate() const {
  if (freq < 0 || link < 0 || datatype < 0) {
    fail(ErrorCode::config, "score weights must be non-negative");
  }
  if (std::abs(freq + link + datatype - 1.0) > 1e-9) {
    fail(ErrorCode::config, "score weights must sum to 1");
  }
}

std::pair<std::map<std::string, std::uint64_t>, std::uint64_t> count_pii(
    const std::vector<PiiSpan>& spans) {
  std::map<std::string, std::uint64_t> counts;
  for (const PiiSpan& s : spans) counts[s.type]++;
  return {counts, spans.size()};
}

double freq_score(std::uint64_t f, std::uint64_t n) {
  if (n == 0) fail(ErrorCode::domain, "frequency score undefined for N = 0");
  if (f < 1 || f > n) {
    fail(ErrorCode::domain, "frequency score requires 1 <= f <= N, got f=" +
                                std::to_string(f) + " N=" + std::to_string(n));
  }
  return 1.0 - static_cast<double>(f) / static_cast<double>(n);
}

double final_score(double s_freq, double s_link, double s_datatype,
                   const ScoreWeights& weights) {
  weights.validate();
  if (s_freq < 0 || s_freq > 1 || (s_link != 0 && s_link != 1) ||
      (s_datatype != 0 && s_datatype != 1)) {
    fail(ErrorCode::domain, "dimension scores outside their domains");
  }
  const double raw =
      weights.freq * s_freq + weights.link * s_link + weights.datatype * s_datatype;
  // Clamping absorbs rounding only; a genuine overshoot is a bug upstream.
  const double clamped = std::min(1.0, std::max(0.0, raw));
  if (std::abs(clamped - raw) > 1e-12) {
    fail(ErrorCode::internal, "final score left [0,1] by more than rounding");
  }
  return clamped;
}

SensitivityReport score_all(const std::vector<PiiSpan>& spans, const PiiRegistry& registry,
                            const ScoreWeights& weights, FreqDenominator denominator,
                            std::uint64_t word_total) {
  weights.validate();
  const auto [counts, pii_total] = count_pii(spans);
  if (pii_total == 0) {
    fail(ErrorCode::empty_corpus,
         "no PII occurrences to score; with zero PII the adaptive mechanism "
         "degenerates to the no-DP baseline");
  }

  std::uint64_t n = pii_total;
  if (denominator == FreqDenominator::word_total) {
    if (word_total < pii_total) {
      fail(ErrorCode::config, "word_total denominator requires a corpus word count >= PII count");
    }
    n = word_total;
  }

  SensitivityReport report;
  report.n_total = n;
  report.weights = weights;
  for (const auto& [type, f] : counts) {
    const PiiType* pt = registry.find(type);
    if (pt == nullptr) {
      fail(ErrorCode::config, "span type not present in registry: " + type);
    }
    TypeScore ts;
    ts.type = type;
    ts.count = f;
    ts.s_freq = freq_score(f, n);
    ts.s_link = pt->linkable ? 1.0 : 0.0;
    ts.s_datatype = pt->datatype_protected ? 1.0 : 0.0;
    ts.s_final = final_score(ts.s_freq, ts.s_link, ts.s_datatype, weights);
    report.types.push_back(std::move(ts));
  }
  // counts is an ordered map, so report.types is already sorted by name.
  return report;
}

const TypeScore* SensitivityReport::find(const std::string& name) const {
  for (const TypeScore& t : types) {
    if (t.type == name) return &t;
  }
  return nullptr;
}

std::unordered_map<std::string, double> SensitivityReport::final_by_type() const {
  std::unordered_map<std::string, double> out;
  for (const TypeScore& t : types) out.emplace(t.type, t.s_final);
  return out;
}

std::string SensitivityReport::to_json() const {
  ordered_json j;
  j["n_total"] = n_total;
  j["weights"] = {weights.freq, weights.link, weights.datatype};
  j["types"] = ordered_json::array();
  for (const TypeScore& t : types) {
    ordered_json tj;
    tj["type"] = t.type;
    tj["count"] = t.count;
    tj["s_freq"] = t.s_freq;
    tj["s_link"] = t.s_link;
    tj["s_datatype"] = t.s_datatype;
    tj["s_final"] = t.s_final;
    j["types"].push_back(std::move(tj));
  }
  return j.dump(2) + "\n";
}

SensitivityReport SensitivityReport::from_json(const std::string& json_text) {
  try {
    const auto j = ordered_json::parse(json_text);
    SensitivityReport report;
    report.n_total = j.at("n_total").get<std::uint64_t>();
    const auto& w = j.at("weights");
    report.weights = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>()};
    for (const auto& tj : j.at("types")) {
      TypeScore t;
      t.type = tj.at("type").get<std::string>();
      t.count = tj.at("count").get<std::uint64_t>();
      t.s_freq = tj.at("s_freq").get<double>();
      t.s_link = tj.at("s_link").get<double>();
      t.s_datatype = tj.at("s_datatype").get<double>();
      t.s_final = tj.at("s_final").get<double>();
      report.types.push_back(std::move(t));
    }
    return report;
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("sensitivity report JSON: ") + e.what());
  }
}

SensitivityReport SensitivityReport::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open report file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace sadp
