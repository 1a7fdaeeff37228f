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

#include "sadp/sadp.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "accountant.hpp"
#include "corpus.hpp"
#include "errors.hpp"
#include "evalx.hpp"
#include "json.hpp"
#include "noise_policy.hpp"
#include "pii_detect.hpp"
#include "pipeline.hpp"
#include "scoring.hpp"
#include "trainer.hpp"

using nlohmann::ordered_json;

extern "C" {

struct sadp_registry {
  sadp::PiiRegistry value;
};
struct sadp_corpus {
  sadp::LoadResult value;
  sadp::CorpusFormat format;
};
struct sadp_spans {
  std::vector<sadp::PiiSpan> value;
  std::uint64_t dropped = 0;
};
struct sadp_report {
  sadp::SensitivityReport value;
};
struct sadp_policy {
  sadp::NoisePolicy value;
};
struct sadp_train_result {
  sadp::TrainResult value;
  sadp::Arm arm;
  std::uint32_t vocab_size = 0;
  sadp::NoisePolicy policy;
  double sigma = 0.0;  // dp_sgd_uniform multiplier
};
struct sadp_compare_result {
  sadp::ComparisonReport value;
};

}  // extern "C"

namespace {

thread_local std::string g_last_error;

sadp_status status_of(sadp::ErrorCode code) {
  using sadp::ErrorCode;
  switch (code) {
    case ErrorCode::io: return SADP_ERR_IO;
    case ErrorCode::parse: return SADP_ERR_PARSE;
    case ErrorCode::config: return SADP_ERR_CONFIG;
    case ErrorCode::domain: return SADP_ERR_DOMAIN;
    case ErrorCode::contract: return SADP_ERR_CONTRACT;
    case ErrorCode::empty_corpus: return SADP_ERR_EMPTY_CORPUS;
    case ErrorCode::agent_network: return SADP_ERR_AGENT_NETWORK;
    case ErrorCode::agent_protocol: return SADP_ERR_AGENT_PROTOCOL;
    case ErrorCode::diverged: return SADP_ERR_DIVERGED;
    case ErrorCode::internal: return SADP_ERR_INTERNAL;
  }
  return SADP_ERR_INTERNAL;
}

template <typename Fn>
sadp_status guarded(Fn&& fn) {
  try {
    fn();
    return SADP_OK;
  } catch (const sadp::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SADP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SADP_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) sadp::fail(sadp::ErrorCode::internal, "out of memory");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) sadp::fail(sadp::ErrorCode::contract, std::string("null argument: ") + what);
}

sadp::ScoreWeights weights_from(const double* weights) {
  if (weights == nullptr) return {};
  return {weights[0], weights[1], weights[2]};
}

// Training configuration shared by the C API and the CLI config file.
// Unknown keys are rejected so typos never silently fall back to defaults.
struct ParsedTrainConfig {
  sadp::TrainConfig train;
  std::uint32_t vocab_max = 4096;
  bool label_accuracy_explicit = false;
};

ParsedTrainConfig parse_train_config(const ordered_json& j) {
  ParsedTrainConfig out;
  sadp::TrainConfig& c = out.train;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "arm") c.arm = sadp::parse_arm(value.get<std::string>());
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "epochs") c.epochs = value.get<std::uint32_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<std::uint32_t>();
      else if (key == "seq_len") c.seq_len = value.get<std::uint32_t>();
      else if (key == "q") c.q = value.get<double>();
      else if (key == "sigma") c.sigma = value.get<double>();
      else if (key == "delta") c.delta = value.get<double>();
      else if (key == "alpha_grid") c.alpha_grid = value.get<std::vector<double>>();
      else if (key == "amplify_subsampling") c.amplify_subsampling = value.get<bool>();
      else if (key == "vocab_max") out.vocab_max = value.get<std::uint32_t>();
      else if (key == "embed_dim") c.embed_dim = value.get<std::uint32_t>();
      else if (key == "eval_fraction") c.eval_fraction = value.get<double>();
      else if (key == "init_scale") c.init_scale = value.get<double>();
      else if (key == "optimizer") {
        const std::string name = value.get<std::string>();
        if (name == "sgd") c.optimizer = sadp::OptimizerKind::sgd;
        else if (name == "adam") c.optimizer = sadp::OptimizerKind::adam;
        else sadp::fail(sadp::ErrorCode::config, "unknown optimizer: " + name);
      } else if (key == "label_accuracy") {
        c.label_accuracy = value.get<bool>();
        out.label_accuracy_explicit = true;
      } else {
        sadp::fail(sadp::ErrorCode::config, "unknown training config key: " + key);
      }
    } catch (const sadp::Error&) {
      throw;
    } catch (const std::exception& e) {
      sadp::fail(sadp::ErrorCode::config, "bad value for key '" + key + "': " + e.what());
    }
  }
  return out;
}

ordered_json parse_json_object(const char* text, const char* what) {
  require(text != nullptr, what);
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    sadp::fail(sadp::ErrorCode::parse, std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) sadp::fail(sadp::ErrorCode::parse, std::string(what) + ": not a JSON object");
  return j;
}

ordered_json json_or_null(double v, bool present) {
  if (!present || !std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

extern "C" {

const char* sadp_version(void) { return "0.1.0"; }
int sadp_abi_version(void) { return 1; }
const char* sadp_last_error(void) { return g_last_error.c_str(); }
void sadp_string_free(char* s) { std::free(s); }

/* ---- registry ---- */

sadp_status sadp_registry_builtin(sadp_registry** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = new sadp_registry{sadp::PiiRegistry::builtin()};
  });
}

sadp_status sadp_registry_load(const char* path, sadp_registry** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out");
    *out = new sadp_registry{sadp::PiiRegistry::load(path)};
  });
}

sadp_status sadp_registry_to_json(const sadp_registry* registry, char** out) {
  return guarded([&] {
    require(registry != nullptr && out != nullptr, "registry/out");
    *out = dup_string(registry->value.to_json());
  });
}

void sadp_registry_free(sadp_registry* registry) { delete registry; }

/* ---- corpus ---- */

sadp_status sadp_corpus_load(const char* path, const char* format, sadp_corpus** out) {
  return guarded([&] {
    require(path != nullptr && format != nullptr && out != nullptr, "path/format/out");
    const sadp::CorpusFormat fmt = sadp::parse_corpus_format(format);
    *out = new sadp_corpus{sadp::load_corpus(path, fmt), fmt};
  });
}

uint64_t sadp_corpus_doc_count(const sadp_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->value.docs.size();
}

uint64_t sadp_corpus_skipped_rows(const sadp_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->value.skipped_rows.size();
}

sadp_status sadp_corpus_skipped_row_message(const sadp_corpus* corpus, uint64_t index,
                                            char** out) {
  return guarded([&] {
    require(corpus != nullptr && out != nullptr, "corpus/out");
    if (index >= corpus->value.skipped_rows.size()) {
      sadp::fail(sadp::ErrorCode::contract, "skipped-row index out of range");
    }
    *out = dup_string(corpus->value.skipped_rows[index]);
  });
}

void sadp_corpus_free(sadp_corpus* corpus) { delete corpus; }

/* ---- detection ---- */

sadp_status sadp_detect_rules(const sadp_corpus* corpus, const sadp_registry* registry,
                              sadp_spans** out) {
  return guarded([&] {
    require(corpus != nullptr && registry != nullptr && out != nullptr,
            "corpus/registry/out");
    *out = new sadp_spans{sadp::detect_all(corpus->value.docs, registry->value), 0};
  });
}

sadp_status sadp_detect_agent(const sadp_corpus* corpus, const sadp_registry* registry,
                              const char* endpoint, int timeout_ms, sadp_spans** out) {
  return guarded([&] {
    require(corpus != nullptr && registry != nullptr && endpoint != nullptr &&
                out != nullptr,
            "corpus/registry/endpoint/out");
    sadp::AgentOptions options;
    options.endpoint = endpoint;
    if (timeout_ms > 0) options.timeout_ms = timeout_ms;
    auto result = std::make_unique<sadp_spans>();
    for (const sadp::Document& doc : corpus->value.docs) {
      sadp::AgentResult r = sadp::detect_agent(doc, options, registry->value);
      result->dropped += r.dropped;
      result->value.insert(result->value.end(), std::make_move_iterator(r.spans.begin()),
                           std::make_move_iterator(r.spans.end()));
    }
    *out = result.release();
  });
}

sadp_status sadp_spans_parse_jsonl(const char* text, sadp_spans** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "text/out");
    *out = new sadp_spans{sadp::spans_from_jsonl(text), 0};
  });
}

sadp_status sadp_spans_to_jsonl(const sadp_spans* spans, char** out) {
  return guarded([&] {
    require(spans != nullptr && out != nullptr, "spans/out");
    *out = dup_string(sadp::spans_to_jsonl(spans->value));
  });
}

uint64_t sadp_spans_count(const sadp_spans* spans) {
  return spans == nullptr ? 0 : spans->value.size();
}

uint64_t sadp_spans_dropped(const sadp_spans* spans) {
  return spans == nullptr ? 0 : spans->dropped;
}

void sadp_spans_free(sadp_spans* spans) { delete spans; }

/* ---- scoring ---- */

sadp_status sadp_score(const sadp_spans* spans, const sadp_registry* registry,
                       const double* weights, sadp_report** out) {
  return guarded([&] {
    require(spans != nullptr && registry != nullptr && out != nullptr,
            "spans/registry/out");
    *out = new sadp_report{
        sadp::score_all(spans->value, registry->value, weights_from(weights))};
  });
}

sadp_status sadp_score_word_denominator(const sadp_spans* spans,
                                        const sadp_registry* registry,
                                        const double* weights, const sadp_corpus* corpus,
                                        sadp_report** out) {
  return guarded([&] {
    require(spans != nullptr && registry != nullptr && corpus != nullptr && out != nullptr,
            "spans/registry/corpus/out");
    *out = new sadp_report{sadp::score_all(
        spans->value, registry->value, weights_from(weights),
        sadp::FreqDenominator::word_total, sadp::count_words(corpus->value.docs))};
  });
}

sadp_status sadp_report_parse(const char* json_text, sadp_report** out) {
  return guarded([&] {
    require(json_text != nullptr && out != nullptr, "json/out");
    *out = new sadp_report{sadp::SensitivityReport::from_json(json_text)};
  });
}

sadp_status sadp_report_to_json(const sadp_report* report, char** out) {
  return guarded([&] {
    require(report != nullptr && out != nullptr, "report/out");
    *out = dup_string(report->value.to_json());
  });
}

void sadp_report_free(sadp_report* report) { delete report; }

/* ---- policy ---- */

sadp_status sadp_policy_default(sadp_policy** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = new sadp_policy{sadp::NoisePolicy{}};
  });
}

sadp_status sadp_policy_load(const char* path, sadp_policy** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out");
    *out = new sadp_policy{sadp::NoisePolicy::load(path)};
  });
}

sadp_status sadp_policy_map_score(const sadp_policy* policy, double score,
                                  double* sigma_out) {
  return guarded([&] {
    require(policy != nullptr && sigma_out != nullptr, "policy/out");
    *sigma_out = sadp::map_score(score, policy->value);
  });
}

sadp_status sadp_policy_implied_epsilon(const sadp_policy* policy, double sigma,
                                        double* epsilon_out) {
  return guarded([&] {
    require(policy != nullptr && epsilon_out != nullptr, "policy/out");
    *epsilon_out = sadp::implied_epsilon(policy->value.clip_norm, sigma);
  });
}

sadp_status sadp_policy_to_json(const sadp_policy* policy, char** out) {
  return guarded([&] {
    require(policy != nullptr && out != nullptr, "policy/out");
    *out = dup_string(policy->value.to_json());
  });
}

void sadp_policy_free(sadp_policy* policy) { delete policy; }

/* ---- annotation ---- */

sadp_status sadp_annotate(const sadp_corpus* corpus, const sadp_spans* spans,
                          const sadp_report* report, const sadp_policy* policy,
                          uint32_t vocab_max, char** out_jsonl) {
  return guarded([&] {
    require(corpus != nullptr && spans != nullptr && policy != nullptr &&
                out_jsonl != nullptr,
            "corpus/spans/policy/out");
    if (report == nullptr && !spans->value.empty()) {
      sadp::fail(sadp::ErrorCode::contract, "non-empty spans require a report");
    }
    const sadp::Vocabulary vocab = sadp::Vocabulary::build(corpus->value.docs, vocab_max);
    const auto seqs = sadp::tokenize_all(corpus->value.docs, vocab);
    static const sadp::SensitivityReport kEmpty;
    const auto annotated = sadp::annotate_all(
        seqs, spans->value, report != nullptr ? report->value : kEmpty, policy->value);
    std::string out;
    for (const sadp::AnnotatedSequence& a : annotated) {
      ordered_json j;
      j["doc_id"] = a.seq.doc_id;
      j["tokens"] = a.seq.tokens;
      j["scores"] = a.scores;
      j["sigmas"] = a.sigmas;
      out += j.dump();
      out.push_back('\n');
    }
    *out_jsonl = dup_string(out);
  });
}

/* ---- training ---- */

sadp_status sadp_train(const sadp_corpus* corpus, const sadp_spans* spans,
                       const sadp_report* report, const sadp_policy* policy,
                       const char* config_json, sadp_train_result** out) {
  return guarded([&] {
    require(corpus != nullptr && policy != nullptr && out != nullptr,
            "corpus/policy/out");
    ParsedTrainConfig parsed =
        parse_train_config(parse_json_object(config_json, "training config"));
    parsed.train.policy = policy->value;
    if (!parsed.label_accuracy_explicit) {
      parsed.train.label_accuracy = corpus->format == sadp::CorpusFormat::delimited;
    }

    const sadp::Vocabulary vocab =
        sadp::Vocabulary::build(corpus->value.docs, parsed.vocab_max);
    const auto seqs = sadp::tokenize_all(corpus->value.docs, vocab);

    static const std::vector<sadp::PiiSpan> kNoSpans;
    const std::vector<sadp::PiiSpan>& span_list =
        spans != nullptr ? spans->value : kNoSpans;

    std::optional<sadp::SensitivityReport> derived;
    const sadp::SensitivityReport* rep = report != nullptr ? &report->value : nullptr;
    if (rep == nullptr && !span_list.empty()) {
      derived = sadp::score_all(span_list, sadp::PiiRegistry::builtin(), {});
      rep = &*derived;
    }

    std::vector<sadp::AnnotatedSequence> annotations;
    static const sadp::SensitivityReport kEmptyReport;
    annotations = sadp::annotate_all(seqs, span_list,
                                     rep != nullptr ? *rep : kEmptyReport, policy->value);

    auto result = std::make_unique<sadp_train_result>();
    result->arm = parsed.train.arm;
    result->vocab_size = static_cast<std::uint32_t>(vocab.size());
    result->policy = parsed.train.policy;
    result->sigma = parsed.train.sigma;
    result->value = sadp::train(seqs, &annotations, result->vocab_size, parsed.train);
    *out = result.release();
  });
}

sadp_status sadp_train_summary_json(const sadp_train_result* result, char** out) {
  return guarded([&] {
    require(result != nullptr && out != nullptr, "result/out");
    const sadp::TrainResult& r = result->value;
    ordered_json j;
    j["arm"] = sadp::arm_name(result->arm);
    j["loss"] = r.epochs.empty() ? 0.0 : r.epochs.back().mean_loss;
    j["accuracy"] = r.final_eval.accuracy;
    j["perplexity"] = r.final_eval.perplexity;
    bool non_private = false;
    double eps_min = 0, eps_32 = 0;
    bool has_eps = false;
    if (r.ledger.has_value() && !r.ledger->steps().empty()) {
      const auto conv = r.ledger->convert();
      non_private = conv.non_private;
      has_eps = !conv.non_private;
      eps_min = conv.epsilon;
      eps_32 = conv.epsilon_at_32;
    }
    j["epsilon_min"] = json_or_null(eps_min, has_eps);
    j["epsilon_at_32"] = json_or_null(eps_32, has_eps);
    j["non_private"] = non_private;
    // The informal per-mechanism C/sigma value; the accountant's epsilon
    // above is the reported guarantee.
    ordered_json heuristic;
    if (result->arm == sadp::Arm::dp_sgd_uniform) {
      heuristic["sigma"] = json_or_null(
          sadp::implied_epsilon(result->policy.clip_norm, result->sigma),
          result->sigma > 0);
    } else if (result->arm == sadp::Arm::sa_adp) {
      heuristic["sigma_low"] =
          sadp::implied_epsilon(result->policy.clip_norm, result->policy.sigma_low);
      heuristic["sigma_high"] =
          sadp::implied_epsilon(result->policy.clip_norm, result->policy.sigma_high);
    }
    j["implied_epsilon_heuristic"] =
        heuristic.empty() ? ordered_json() : std::move(heuristic);
    j["steps"] = r.total_steps;
    j["effective_q"] = r.effective_q;
    j["vocab_size"] = result->vocab_size;
    j["param_count"] = r.params.param_count();
    *out = dup_string(j.dump() + "\n");
  });
}

sadp_status sadp_train_metrics_csv(const sadp_train_result* result, char** out) {
  return guarded([&] {
    require(result != nullptr && out != nullptr, "result/out");
    *out = dup_string(result->value.metrics_csv(result->arm));
  });
}

int sadp_train_has_ledger(const sadp_train_result* result) {
  return result != nullptr && result->value.ledger.has_value() ? 1 : 0;
}

sadp_status sadp_train_ledger_json(const sadp_train_result* result, char** out) {
  return guarded([&] {
    require(result != nullptr && out != nullptr, "result/out");
    if (!result->value.ledger.has_value()) {
      sadp::fail(sadp::ErrorCode::contract, "no ledger: arm ran without DP");
    }
    *out = dup_string(result->value.ledger->to_json());
  });
}

sadp_status sadp_train_save_checkpoint(const sadp_train_result* result, const char* path) {
  return guarded([&] {
    require(result != nullptr && path != nullptr, "result/path");
    result->value.params.save_checkpoint(path);
  });
}

void sadp_train_result_free(sadp_train_result* result) { delete result; }

/* ---- accounting ---- */

sadp_status sadp_ledger_convert(const char* ledger_json, char** out_json) {
  return guarded([&] {
    require(ledger_json != nullptr && out_json != nullptr, "ledger/out");
    const sadp::PrivacyLedger ledger = sadp::PrivacyLedger::from_json(ledger_json);
    const auto conv = ledger.convert();
    ordered_json j;
    j["epsilon"] = json_or_null(conv.epsilon, !conv.non_private);
    j["argmin_order"] = conv.argmin_order;
    j["epsilon_at_32"] = json_or_null(conv.epsilon_at_32, !conv.non_private);
    j["delta"] = conv.delta;
    j["non_private"] = conv.non_private;
    if (!conv.note.empty()) j["note"] = conv.note;
    *out_json = dup_string(j.dump() + "\n");
  });
}

/* ---- comparison ---- */

sadp_status sadp_compare_run(const char* config_json, sadp_compare_result** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    const ordered_json j = parse_json_object(config_json, "comparison config");

    sadp::MatrixConfig config;
    std::optional<ordered_json> policy_json;  // applied after "train"
    for (const auto& [key, value] : j.items()) {
      if (key == "datasets") {
        for (const auto& dj : value) {
          sadp::DatasetSpec d;
          d.name = dj.at("name").get<std::string>();
          d.path = dj.at("path").get<std::string>();
          d.format = sadp::parse_corpus_format(
              dj.value("format", std::string("plain_text_lines")));
          config.datasets.push_back(std::move(d));
        }
      } else if (key == "arms") {
        for (const auto& aj : value) {
          sadp::ArmSpec a;
          a.arm = sadp::parse_arm(aj.at("arm").get<std::string>());
          a.sigma = aj.value("sigma", 0.0);
          a.label = aj.value("label", std::string());
          config.arms.push_back(std::move(a));
        }
      } else if (key == "seeds") {
        config.seeds = value.get<std::vector<std::uint64_t>>();
      } else if (key == "train") {
        ParsedTrainConfig parsed = parse_train_config(value);
        config.base = parsed.train;
        config.vocab_max = parsed.vocab_max;
      } else if (key == "weights") {
        config.weights = {value.at(0).get<double>(), value.at(1).get<double>(),
                          value.at(2).get<double>()};
      } else if (key == "registry_path") {
        config.registry = sadp::PiiRegistry::load(value.get<std::string>());
      } else if (key == "policy") {
        policy_json = value;
      } else if (key == "vocab_max") {
        config.vocab_max = value.get<std::uint32_t>();
      } else {
        sadp::fail(sadp::ErrorCode::config, "unknown comparison config key: " + key);
      }
    }
    if (policy_json.has_value()) {
      config.base.policy = sadp::NoisePolicy::from_json(policy_json->dump());
    }
    *out = new sadp_compare_result{sadp::run_matrix(config)};
  });
}

sadp_status sadp_compare_emit(const sadp_compare_result* result, const char* format,
                              char** out) {
  return guarded([&] {
    require(result != nullptr && format != nullptr && out != nullptr,
            "result/format/out");
    *out = dup_string(sadp::emit(result->value, sadp::parse_emit_format(format)));
  });
}

uint64_t sadp_compare_failure_count(const sadp_compare_result* result) {
  return result == nullptr ? 0 : result->value.failures.size();
}

sadp_status sadp_compare_failure_message(const sadp_compare_result* result, uint64_t index,
                                         char** out) {
  return guarded([&] {
    require(result != nullptr && out != nullptr, "result/out");
    if (index >= result->value.failures.size()) {
      sadp::fail(sadp::ErrorCode::contract, "failure index out of range");
    }
    *out = dup_string(result->value.failures[index]);
  });
}

void sadp_compare_result_free(sadp_compare_result* result) { delete result; }

}  // extern "C"
