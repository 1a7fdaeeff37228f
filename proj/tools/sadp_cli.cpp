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

// Staged pipeline driver over the C API: detect -> score -> annotate ->
// train -> account -> compare. Stages communicate via files so every
// intermediate artifact can be inspected; stdout carries exactly one JSON
// object per command, human-readable logs go to stderr.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sadp/sadp.h"

namespace {

using nlohmann::ordered_json;

enum LogLevel { kLogError = 0, kLogInfo = 1, kLogDebug = 2 };
LogLevel g_log_level = kLogError;

void init_log_level() {
  const char* env = std::getenv("SADP_LOG");
  if (env == nullptr) return;
  const std::string v(env);
  if (v == "debug") g_log_level = kLogDebug;
  else if (v == "info") g_log_level = kLogInfo;
  else g_log_level = kLogError;
}

void log_info(const std::string& msg) {
  if (g_log_level >= kLogInfo) std::cerr << "[info] " << msg << "\n";
}

void log_error(const std::string& msg) { std::cerr << "[error] " << msg << "\n"; }

// Exit codes: 0 success, 2 input/config, 3 agent/protocol, 4 divergence,
// 5 matrix failure, 1 internal.
int exit_code_of(sadp_status status) {
  switch (status) {
    case SADP_OK: return 0;
    case SADP_ERR_AGENT_NETWORK:
    case SADP_ERR_AGENT_PROTOCOL: return 3;
    case SADP_ERR_DIVERGED: return 4;
    case SADP_ERR_INTERNAL: return 1;
    default: return 2;
  }
}

// Fails the command on a non-OK status by throwing the exit code.
void check(sadp_status status, const std::string& context) {
  if (status == SADP_OK) return;
  log_error(context + ": " + sadp_last_error());
  throw exit_code_of(status);
}

std::string take_string(char* s) {
  std::string out(s == nullptr ? "" : s);
  sadp_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    log_error("cannot open file: " + path);
    throw 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    log_error("cannot write file: " + path);
    throw 2;
  }
  out << content;
  if (!out) {
    log_error("short write: " + path);
    throw 2;
  }
}

// RAII wrappers over the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  explicit Handle(T* p) : ptr(p) {}
  ~Handle() { Free(ptr); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Registry = Handle<sadp_registry, sadp_registry_free>;
using Corpus = Handle<sadp_corpus, sadp_corpus_free>;
using Spans = Handle<sadp_spans, sadp_spans_free>;
using Report = Handle<sadp_report, sadp_report_free>;
using Policy = Handle<sadp_policy, sadp_policy_free>;
using TrainResult = Handle<sadp_train_result, sadp_train_result_free>;
using CompareResult = Handle<sadp_compare_result, sadp_compare_result_free>;

void load_registry(const std::string& path, Registry& registry) {
  if (path.empty()) {
    check(sadp_registry_builtin(registry.out()), "built-in registry");
  } else {
    check(sadp_registry_load(path.c_str(), registry.out()), "registry " + path);
  }
}

void load_policy(const std::string& path, Policy& policy) {
  if (path.empty()) {
    check(sadp_policy_default(policy.out()), "default policy");
  } else {
    check(sadp_policy_load(path.c_str(), policy.out()), "policy " + path);
  }
}

void warn_skipped_rows(const Corpus& corpus) {
  const uint64_t skipped = sadp_corpus_skipped_rows(corpus.get());
  for (uint64_t i = 0; i < skipped; ++i) {
    char* msg = nullptr;
    if (sadp_corpus_skipped_row_message(corpus.get(), i, &msg) == SADP_OK) {
      std::cerr << "[warn] skipped " << take_string(msg) << "\n";
    }
  }
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> weights;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) weights.push_back(std::stod(item));
  if (weights.size() != 3) {
    log_error("--weights expects three comma-separated values");
    throw 2;
  }
  return weights;
}

// "--alpha-grid 2..64" or "--alpha-grid 2,4,8,16,32"
std::vector<double> parse_alpha_grid(const std::string& text) {
  std::vector<double> grid;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    for (int a = lo; a <= hi; ++a) grid.push_back(a);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
  }
  return grid;
}

// ---- shared option bag ------------------------------------------------

struct CommonOptions {
  std::string corpus_path;
  std::string format = "plain_text_lines";
  std::string registry_path;
  std::string spans_path;
  std::string report_path;
  std::string policy_path;
  std::string weights;
  std::string agent;
  int timeout_ms = 30000;
  std::string out;
  std::string config_path;
};

// Training knobs mirrored into the engine's JSON config. Values are kept as
// an ordered_json patch so a config file can be merged under flag overrides.
struct TrainFlags {
  CLI::App* cmd = nullptr;
  std::string arm = "no_dp";
  double sigma = 2.0;
  std::uint64_t seed = 1;
  std::uint32_t epochs = 3;
  std::uint32_t batch_size = 16;
  std::uint32_t seq_len = 64;
  double q = 0.1;
  double delta = 1e-5;
  std::string alpha_grid;
  bool amplify = false;
  double learning_rate = 0.001;
  std::uint32_t vocab_max = 4096;
  std::uint32_t embed_dim = 32;
  std::string optimizer = "sgd";
  double eval_fraction = 0.1;
  double init_scale = 0.1;

  void attach(CLI::App* app) {
    cmd = app;
    app->add_option("--arm", arm, "no_dp | dp_sgd_uniform | sa_adp");
    app->add_option("--sigma", sigma, "noise multiplier for dp_sgd_uniform");
    app->add_option("--seed", seed, "rng seed");
    app->add_option("--epochs", epochs);
    app->add_option("--batch-size", batch_size,
                    "expected batch size; used to derive q when --q is not given");
    app->add_option("--seq-len", seq_len);
    app->add_option("--q", q, "Poisson sample rate");
    app->add_option("--delta", delta, "target delta");
    app->add_option("--alpha-grid", alpha_grid, "Renyi orders, e.g. 2..64 or 2,4,32");
    app->add_flag("--amplify-subsampling", amplify,
                  "experimental subsampled-Gaussian accounting");
    app->add_option("--learning-rate", learning_rate);
    app->add_option("--vocab-max", vocab_max);
    app->add_option("--embed-dim", embed_dim);
    app->add_option("--optimizer", optimizer, "sgd | adam");
    app->add_option("--eval-fraction", eval_fraction);
    app->add_option("--init-scale", init_scale);
  }

  // Only flags the user actually passed override the config file.
  ordered_json patch() const {
    ordered_json j = ordered_json::object();
    const auto set = [&](const char* flag, const char* key, ordered_json value) {
      if (cmd->count(flag) > 0) j[key] = std::move(value);
    };
    set("--arm", "arm", arm);
    set("--sigma", "sigma", sigma);
    set("--seed", "seed", seed);
    set("--epochs", "epochs", epochs);
    set("--batch-size", "batch_size", batch_size);
    set("--seq-len", "seq_len", seq_len);
    set("--q", "q", q);
    set("--delta", "delta", delta);
    if (cmd->count("--alpha-grid") > 0) j["alpha_grid"] = parse_alpha_grid(alpha_grid);
    if (cmd->count("--amplify-subsampling") > 0) j["amplify_subsampling"] = amplify;
    set("--learning-rate", "learning_rate", learning_rate);
    set("--vocab-max", "vocab_max", vocab_max);
    set("--embed-dim", "embed_dim", embed_dim);
    set("--optimizer", "optimizer", optimizer);
    set("--eval-fraction", "eval_fraction", eval_fraction);
    set("--init-scale", "init_scale", init_scale);
    return j;
  }

  ordered_json defaults() const {
    ordered_json j = ordered_json::object();
    j["arm"] = arm;
    j["sigma"] = sigma;
    j["seed"] = seed;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["seq_len"] = seq_len;
    j["q"] = q;
    j["delta"] = delta;
    if (!alpha_grid.empty()) j["alpha_grid"] = parse_alpha_grid(alpha_grid);
    j["amplify_subsampling"] = amplify;
    j["learning_rate"] = learning_rate;
    j["vocab_max"] = vocab_max;
    j["embed_dim"] = embed_dim;
    j["optimizer"] = optimizer;
    j["eval_fraction"] = eval_fraction;
    j["init_scale"] = init_scale;
    return j;
  }
};

// Config file: a single JSON object mirroring the flag set. Flags override
// file values; unknown keys are rejected here for the top level and by the
// engine for the train section.
struct FileConfig {
  ordered_json train = ordered_json::object();
  std::string corpus, format, registry, spans, report, policy_path, weights, agent, out;

  static FileConfig load(const std::string& path) {
    FileConfig fc;
    if (path.empty()) return fc;
    ordered_json j;
    try {
      j = ordered_json::parse(read_file(path));
    } catch (const std::exception& e) {
      log_error("config file " + path + ": " + e.what());
      throw 2;
    }
    for (const auto& [key, value] : j.items()) {
      if (key == "train") fc.train = value;
      else if (key == "corpus") fc.corpus = value.get<std::string>();
      else if (key == "format") fc.format = value.get<std::string>();
      else if (key == "registry") fc.registry = value.get<std::string>();
      else if (key == "spans") fc.spans = value.get<std::string>();
      else if (key == "report") fc.report = value.get<std::string>();
      else if (key == "policy") fc.policy_path = value.get<std::string>();
      else if (key == "weights") {
        if (value.is_array()) {
          for (const auto& w : value) {
            if (!fc.weights.empty()) fc.weights.push_back(',');
            fc.weights += std::to_string(w.get<double>());
          }
        } else {
          fc.weights = value.get<std::string>();
        }
      }
      else if (key == "agent") fc.agent = value.get<std::string>();
      else if (key == "out") fc.out = value.get<std::string>();
      else {
        log_error("config file " + path + ": unknown key '" + key + "'");
        throw 2;
      }
    }
    return fc;
  }
};

std::string pick(const CLI::App* cmd, const char* flag, const std::string& flag_value,
                 const std::string& file_value) {
  if (cmd->count(flag) > 0 || file_value.empty()) return flag_value;
  return file_value;
}

// ---- commands ----------------------------------------------------------

int cmd_detect(const CommonOptions& opt) {
  Registry registry;
  load_registry(opt.registry_path, registry);
  Corpus corpus;
  check(sadp_corpus_load(opt.corpus_path.c_str(), opt.format.c_str(), corpus.out()),
        "corpus " + opt.corpus_path);
  warn_skipped_rows(corpus);

  Spans spans;
  if (!opt.agent.empty()) {
    log_info("detecting via agent " + opt.agent);
    check(sadp_detect_agent(corpus.get(), registry.get(), opt.agent.c_str(),
                            opt.timeout_ms, spans.out()),
          "agent detection");
  } else {
    check(sadp_detect_rules(corpus.get(), registry.get(), spans.out()), "rule detection");
  }

  char* jsonl = nullptr;
  check(sadp_spans_to_jsonl(spans.get(), &jsonl), "serialize spans");
  const std::string body = take_string(jsonl);
  const std::string out_path = opt.out.empty() ? "spans.jsonl" : opt.out;
  write_file(out_path, body);

  ordered_json summary;
  summary["command"] = "detect";
  summary["documents"] = sadp_corpus_doc_count(corpus.get());
  summary["spans"] = sadp_spans_count(spans.get());
  summary["dropped"] = sadp_spans_dropped(spans.get());
  summary["skipped_rows"] = sadp_corpus_skipped_rows(corpus.get());
  summary["out"] = out_path;
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_score(const CommonOptions& opt, const std::string& freq_denominator) {
  Registry registry;
  load_registry(opt.registry_path, registry);
  Spans spans;
  const std::string spans_text = read_file(opt.spans_path);
  check(sadp_spans_parse_jsonl(spans_text.c_str(), spans.out()),
        "spans " + opt.spans_path);

  std::vector<double> weights{0.4, 0.3, 0.3};
  if (!opt.weights.empty()) weights = parse_weights(opt.weights);

  Report report;
  if (freq_denominator == "word_total") {
    if (opt.corpus_path.empty()) {
      log_error("--freq-denominator word_total requires --corpus");
      throw 2;
    }
    Corpus corpus;
    check(sadp_corpus_load(opt.corpus_path.c_str(), opt.format.c_str(), corpus.out()),
          "corpus " + opt.corpus_path);
    check(sadp_score_word_denominator(spans.get(), registry.get(), weights.data(),
                                      corpus.get(), report.out()),
          "scoring");
  } else if (freq_denominator == "pii_total") {
    check(sadp_score(spans.get(), registry.get(), weights.data(), report.out()),
          "scoring");
  } else {
    log_error("--freq-denominator must be pii_total or word_total");
    throw 2;
  }

  char* json = nullptr;
  check(sadp_report_to_json(report.get(), &json), "serialize report");
  const std::string body = take_string(json);
  const std::string out_path = opt.out.empty() ? "report.json" : opt.out;
  write_file(out_path, body);

  const auto parsed = ordered_json::parse(body);
  ordered_json summary;
  summary["command"] = "score";
  summary["types"] = parsed.at("types").size();
  summary["n_total"] = parsed.at("n_total");
  summary["out"] = out_path;
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_annotate(const CommonOptions& opt, std::uint32_t vocab_max) {
  Corpus corpus;
  check(sadp_corpus_load(opt.corpus_path.c_str(), opt.format.c_str(), corpus.out()),
        "corpus " + opt.corpus_path);
  Spans spans;
  const std::string spans_text = read_file(opt.spans_path);
  check(sadp_spans_parse_jsonl(spans_text.c_str(), spans.out()),
        "spans " + opt.spans_path);
  Report report;
  if (!opt.report_path.empty()) {
    check(sadp_report_parse(read_file(opt.report_path).c_str(), report.out()),
          "report " + opt.report_path);
  }
  Policy policy;
  load_policy(opt.policy_path, policy);

  char* jsonl = nullptr;
  check(sadp_annotate(corpus.get(), spans.get(), report.get(), policy.get(), vocab_max,
                      &jsonl),
        "annotate");
  const std::string body = take_string(jsonl);
  const std::string out_path = opt.out.empty() ? "annotated.jsonl" : opt.out;
  write_file(out_path, body);

  ordered_json summary;
  summary["command"] = "annotate";
  summary["documents"] = sadp_corpus_doc_count(corpus.get());
  summary["out"] = out_path;
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_train(const CommonOptions& opt, const ordered_json& train_config) {
  Corpus corpus;
  check(sadp_corpus_load(opt.corpus_path.c_str(), opt.format.c_str(), corpus.out()),
        "corpus " + opt.corpus_path);
  warn_skipped_rows(corpus);

  Registry registry;
  load_registry(opt.registry_path, registry);

  Spans spans;
  if (!opt.spans_path.empty()) {
    const std::string spans_text = read_file(opt.spans_path);
    check(sadp_spans_parse_jsonl(spans_text.c_str(), spans.out()),
          "spans " + opt.spans_path);
  } else {
    log_info("no spans file given; running rule detection");
    check(sadp_detect_rules(corpus.get(), registry.get(), spans.out()), "rule detection");
  }

  Report report;
  if (!opt.report_path.empty()) {
    check(sadp_report_parse(read_file(opt.report_path).c_str(), report.out()),
          "report " + opt.report_path);
  } else if (sadp_spans_count(spans.get()) > 0) {
    std::vector<double> weights{0.4, 0.3, 0.3};
    if (!opt.weights.empty()) weights = parse_weights(opt.weights);
    check(sadp_score(spans.get(), registry.get(), weights.data(), report.out()),
          "scoring");
  }

  Policy policy;
  load_policy(opt.policy_path, policy);

  const std::string config_text = train_config.dump();
  log_info("training config: " + config_text);
  TrainResult result;
  check(sadp_train(corpus.get(), spans.get(), report.get(), policy.get(),
                   config_text.c_str(), result.out()),
        "training");

  const std::string prefix = opt.out.empty() ? "run" : opt.out;
  char* csv = nullptr;
  check(sadp_train_metrics_csv(result.get(), &csv), "metrics");
  write_file(prefix + ".metrics.csv", take_string(csv));
  if (sadp_train_has_ledger(result.get())) {
    char* ledger = nullptr;
    check(sadp_train_ledger_json(result.get(), &ledger), "ledger");
    write_file(prefix + ".ledger.json", take_string(ledger));
  }
  check(sadp_train_save_checkpoint(result.get(), (prefix + ".ckpt").c_str()),
        "checkpoint");

  char* summary = nullptr;
  check(sadp_train_summary_json(result.get(), &summary), "summary");
  std::cout << take_string(summary);
  return 0;
}

int cmd_account(const std::string& ledger_path) {
  const std::string text = read_file(ledger_path);
  char* out = nullptr;
  check(sadp_ledger_convert(text.c_str(), &out), "ledger " + ledger_path);
  std::cout << take_string(out);
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_prefix) {
  const std::string config_text = read_file(config_path);
  CompareResult result;
  check(sadp_compare_run(config_text.c_str(), result.out()), "comparison");

  const std::string prefix = out_prefix.empty() ? "compare" : out_prefix;
  for (const auto& [format, ext] :
       {std::pair<const char*, const char*>{"csv", ".csv"},
        std::pair<const char*, const char*>{"json", ".json"},
        std::pair<const char*, const char*>{"markdown_table", ".md"}}) {
    char* body = nullptr;
    check(sadp_compare_emit(result.get(), format, &body), "emit");
    write_file(prefix + ext, take_string(body));
  }

  const uint64_t failures = sadp_compare_failure_count(result.get());
  for (uint64_t i = 0; i < failures; ++i) {
    char* msg = nullptr;
    if (sadp_compare_failure_message(result.get(), i, &msg) == SADP_OK) {
      log_error("cell failed: " + take_string(msg));
    }
  }

  char* json = nullptr;
  check(sadp_compare_emit(result.get(), "json", &json), "emit");
  const auto parsed = ordered_json::parse(take_string(json));
  ordered_json summary;
  summary["command"] = "compare";
  summary["rows"] = parsed.at("rows").size();
  summary["failures"] = failures;
  summary["fingerprint"] = parsed.at("fingerprint");
  summary["out"] = prefix;
  std::cout << summary.dump() << "\n";
  return failures > 0 ? 5 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_log_level();
  CLI::App app{"sadp - sensitivity-aware differentially private training pipeline"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string freq_denominator = "pii_total";
  std::uint32_t annotate_vocab_max = 4096;
  std::string ledger_path;
  TrainFlags train_flags;

  CLI::App* detect = app.add_subcommand("detect", "detect PII spans in a corpus");
  detect->add_option("--corpus", opt.corpus_path)->required();
  detect->add_option("--format", opt.format, "plain_text_lines | delimited");
  detect->add_option("--registry", opt.registry_path, "registry JSON (default built-in)");
  detect->add_option("--agent", opt.agent, "detection agent endpoint URL");
  detect->add_option("--timeout", opt.timeout_ms, "agent timeout in ms");
  detect->add_option("--out", opt.out, "spans output file (JSONL)");

  CLI::App* score = app.add_subcommand("score", "score PII type sensitivity");
  score->add_option("--spans", opt.spans_path)->required();
  score->add_option("--registry", opt.registry_path);
  score->add_option("--weights", opt.weights, "w_freq,w_link,w_datatype");
  score->add_option("--freq-denominator", freq_denominator, "pii_total | word_total");
  score->add_option("--corpus", opt.corpus_path, "needed for word_total");
  score->add_option("--format", opt.format);
  score->add_option("--out", opt.out, "report output file (JSON)");

  CLI::App* annotate = app.add_subcommand("annotate", "per-token scores and noise scales");
  annotate->add_option("--corpus", opt.corpus_path)->required();
  annotate->add_option("--format", opt.format);
  annotate->add_option("--spans", opt.spans_path)->required();
  annotate->add_option("--report", opt.report_path);
  annotate->add_option("--policy", opt.policy_path);
  annotate->add_option("--vocab-max", annotate_vocab_max);
  annotate->add_option("--out", opt.out, "annotated output file (JSONL)");

  CLI::App* train = app.add_subcommand("train", "train one arm and account privacy");
  train->add_option("--corpus", opt.corpus_path);
  train->add_option("--format", opt.format);
  train->add_option("--registry", opt.registry_path);
  train->add_option("--spans", opt.spans_path, "spans file (default: run detection)");
  train->add_option("--report", opt.report_path, "report file (default: score spans)");
  train->add_option("--policy", opt.policy_path, "noise policy file");
  train->add_option("--weights", opt.weights);
  train->add_option("--config", opt.config_path, "JSON config file; flags override");
  train->add_option("--out", opt.out, "output prefix (metrics/ledger/checkpoint)");
  train_flags.attach(train);

  CLI::App* account = app.add_subcommand("account", "convert a privacy ledger");
  account->add_option("--ledger", ledger_path)->required();

  CLI::App* compare = app.add_subcommand("compare", "run the arm comparison matrix");
  compare->add_option("--config", opt.config_path)->required();
  compare->add_option("--out", opt.out, "output prefix for csv/json/md");

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect->parsed()) return cmd_detect(opt);
    if (score->parsed()) return cmd_score(opt, freq_denominator);
    if (annotate->parsed()) return cmd_annotate(opt, annotate_vocab_max);
    if (train->parsed()) {
      const FileConfig fc = FileConfig::load(opt.config_path);
      CommonOptions merged = opt;
      merged.corpus_path = pick(train, "--corpus", opt.corpus_path, fc.corpus);
      merged.format = pick(train, "--format", opt.format, fc.format);
      merged.registry_path = pick(train, "--registry", opt.registry_path, fc.registry);
      merged.spans_path = pick(train, "--spans", opt.spans_path, fc.spans);
      merged.report_path = pick(train, "--report", opt.report_path, fc.report);
      merged.policy_path = pick(train, "--policy", opt.policy_path, fc.policy_path);
      merged.weights = pick(train, "--weights", opt.weights, fc.weights);
      merged.out = pick(train, "--out", opt.out, fc.out);
      if (merged.corpus_path.empty()) {
        log_error("train needs --corpus (flag or config file)");
        return 2;
      }
      // defaults <- config file <- explicit flags
      ordered_json config = train_flags.defaults();
      const ordered_json flag_patch = train_flags.patch();
      for (const auto& [key, value] : fc.train.items()) config[key] = value;
      for (const auto& [key, value] : flag_patch.items()) config[key] = value;
      return cmd_train(merged, config);
    }
    if (account->parsed()) return cmd_account(ledger_path);
    if (compare->parsed()) return cmd_compare(opt.config_path, opt.out);
  } catch (int code) {
    return code;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 1;
  }
  return 0;
}
