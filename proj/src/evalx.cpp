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

#include "evalx.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "errors.hpp"
#include "json.hpp"
#include "pipeline.hpp"

namespace sadp {

using nlohmann::ordered_json;

namespace {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_fingerprint(const MatrixConfig& config) {
  std::string s;
  for (const DatasetSpec& d : config.datasets) {
    s += d.name + "|" + d.path + "|" + corpus_format_name(d.format) + ";";
  }
  for (const ArmSpec& a : config.arms) {
    s += a.display_label() + "|" + format_double(a.sigma) + ";";
  }
  for (std::uint64_t seed : config.seeds) s += std::to_string(seed) + ",";
  const TrainConfig& t = config.base;
  s += format_double(t.learning_rate) + "|" + std::to_string(t.seq_len) + "|" +
       std::to_string(t.epochs) + "|" + format_double(t.q) + "|" +
       std::to_string(t.batch_size) + "|" + std::to_string(t.embed_dim) + "|" +
       format_double(t.init_scale) + "|" + format_double(t.delta) + "|" +
       format_double(t.eval_fraction) + "|" +
       (t.optimizer == OptimizerKind::adam ? "adam" : "sgd") + "|" +
       format_double(t.policy.sigma_low) + "|" + format_double(t.policy.sigma_high) + "|" +
       format_double(t.policy.low_min) + "|" + format_double(t.policy.low_max) + "|" +
       format_double(t.policy.clip_norm) + "|" +
       (t.amplify_subsampling ? "amp" : "plain") + "|";
  s += format_double(config.weights.freq) + "," + format_double(config.weights.link) + "," +
       format_double(config.weights.datatype) + "|" + std::to_string(config.vocab_max) + "|" +
       config.registry.version();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(s)));
  return buf;
}

struct Accumulator {
  std::vector<double> values;
  double mean() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  double stddev() const {
    if (values.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(values.size() - 1));
  }
};

}  // namespace

std::string ArmSpec::display_label() const {
  if (!label.empty()) return label;
  if (arm == Arm::dp_sgd_uniform) {
    return std::string(arm_name(arm)) + "_sigma" + format_double(sigma);
  }
  return arm_name(arm);
}

ComparisonReport run_matrix(const MatrixConfig& config) {
  if (config.datasets.empty()) fail(ErrorCode::config, "comparison needs datasets");
  if (config.arms.empty()) fail(ErrorCode::config, "comparison needs arms");
  if (config.seeds.empty()) fail(ErrorCode::config, "comparison needs seeds");
  config.weights.validate();

  ComparisonReport report;
  report.fingerprint = config_fingerprint(config);
  report.seeds = config.seeds;

  for (const DatasetSpec& dataset : config.datasets) {
    LoadResult loaded;
    Vocabulary vocab;
    std::vector<TokenSequence> seqs;
    std::vector<AnnotatedSequence> annotations;
    bool dataset_ok = true;
    try {
      loaded = load_corpus(dataset.path, dataset.format);
      vocab = Vocabulary::build(loaded.docs, config.vocab_max);
      seqs = tokenize_all(loaded.docs, vocab);
      const std::vector<PiiSpan> spans = detect_all(loaded.docs, config.registry);
      SensitivityReport sens;
      if (!spans.empty()) {
        sens = score_all(spans, config.registry, config.weights);
      }
      annotations = annotate_all(seqs, spans, sens, config.base.policy);
    } catch (const Error& e) {
      report.failures.push_back(dataset.name + ": " + e.what());
      dataset_ok = false;
    }
    if (!dataset_ok) continue;

    for (const ArmSpec& arm : config.arms) {
      Accumulator acc_acc, acc_ppl;
      double eps_min_worst = -std::numeric_limits<double>::infinity();
      double eps32_worst = -std::numeric_limits<double>::infinity();
      bool any_eps = false, non_private = false, cell_failed = false;

      for (std::uint64_t seed : config.seeds) {
        TrainConfig cell = config.base;
        cell.arm = arm.arm;
        cell.sigma = arm.sigma;
        cell.seed = seed;
        cell.label_accuracy = dataset.format == CorpusFormat::delimited;
        try {
          const TrainResult result = train(
              seqs, cell.arm == Arm::sa_adp ? &annotations : nullptr,
              static_cast<std::uint32_t>(vocab.size()), cell);
          acc_acc.values.push_back(result.final_eval.accuracy);
          acc_ppl.values.push_back(result.final_eval.perplexity);
          if (result.ledger.has_value() && !result.ledger->steps().empty()) {
            const auto conv = result.ledger->convert();
            any_eps = true;
            if (conv.non_private) {
              non_private = true;
            } else {
              eps_min_worst = std::max(eps_min_worst, conv.epsilon);
              eps32_worst = std::max(eps32_worst, conv.epsilon_at_32);
            }
          }
        } catch (const Error& e) {
          report.failures.push_back(dataset.name + "/" + arm.display_label() + ": " +
                                    e.what());
          cell_failed = true;
          break;
        }
      }
      if (cell_failed) continue;

      ReportRow row;
      row.dataset = dataset.name;
      row.arm = arm.display_label();
      row.accuracy_mean = acc_acc.mean();
      row.accuracy_std = acc_acc.stddev();
      row.perplexity_mean = acc_ppl.mean();
      row.perplexity_std = acc_ppl.stddev();
      row.non_private = non_private;
      if (any_eps && !non_private) {
        row.epsilon_min = eps_min_worst;
        row.epsilon_at_32 = eps32_worst;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

EmitFormat parse_emit_format(std::string_view name) {
  if (name == "csv") return EmitFormat::csv;
  if (name == "json") return EmitFormat::json;
  if (name == "markdown_table" || name == "markdown" || name == "md") {
    return EmitFormat::markdown_table;
  }
  fail(ErrorCode::config, "unknown report format: " + std::string(name));
}

std::string emit(const ComparisonReport& report, EmitFormat format) {
  if (format == EmitFormat::csv) {
    std::string out =
        "dataset,arm,accuracy,perplexity,epsilon_min,epsilon_at_32,"
        "accuracy_std,perplexity_std\n";
    for (const ReportRow& r : report.rows) {
      out += r.dataset + "," + r.arm + "," + format_double(r.accuracy_mean) + "," +
             format_double(r.perplexity_mean) + ",";
      if (r.epsilon_min.has_value()) out += format_double(*r.epsilon_min);
      else if (r.non_private) out += "inf";
      out.push_back(',');
      if (r.epsilon_at_32.has_value()) out += format_double(*r.epsilon_at_32);
      else if (r.non_private) out += "inf";
      out.push_back(',');
      out += format_double(r.accuracy_std) + "," + format_double(r.perplexity_std) + "\n";
    }
    return out;
  }

  if (format == EmitFormat::json) {
    ordered_json j;
    j["fingerprint"] = report.fingerprint;
    j["seeds"] = report.seeds;
    j["rows"] = ordered_json::array();
    for (const ReportRow& r : report.rows) {
      ordered_json rj;
      rj["dataset"] = r.dataset;
      rj["arm"] = r.arm;
      rj["accuracy"] = r.accuracy_mean;
      rj["perplexity"] = r.perplexity_mean;
      rj["epsilon_min"] = r.epsilon_min.has_value() ? ordered_json(*r.epsilon_min)
                                                    : ordered_json();
      rj["epsilon_at_32"] = r.epsilon_at_32.has_value() ? ordered_json(*r.epsilon_at_32)
                                                        : ordered_json();
      rj["accuracy_std"] = r.accuracy_std;
      rj["perplexity_std"] = r.perplexity_std;
      rj["non_private"] = r.non_private;
      j["rows"].push_back(std::move(rj));
    }
    j["failures"] = report.failures;
    return j.dump(2) + "\n";
  }

  // markdown_table
  std::string out =
      "| dataset | arm | accuracy | perplexity | epsilon_min | epsilon_at_32 |\n"
      "|---|---|---|---|---|---|\n";
  for (const ReportRow& r : report.rows) {
    out += "| " + r.dataset + " | " + r.arm + " | " + format_double(r.accuracy_mean) +
           " ± " + format_double(r.accuracy_std) + " | " +
           format_double(r.perplexity_mean) + " ± " + format_double(r.perplexity_std) +
           " | ";
    out += r.epsilon_min.has_value() ? format_double(*r.epsilon_min)
                                     : (r.non_private ? "inf" : "");
    out += " | ";
    out += r.epsilon_at_32.has_value() ? format_double(*r.epsilon_at_32)
                                       : (r.non_private ? "inf" : "");
    out += " |\n";
  }
  return out;
}

}  // namespace sadp
