/* Copyright 2026 The sadp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the sadp engine: PII detection, sensitivity scoring,
 * score-to-noise mapping, differentially private training and privacy
 * accounting behind opaque handles.
 *
 * Conventions:
 *   - Every fallible call returns a sadp_status; on failure the thread-local
 *     message from sadp_last_error() describes the cause.
 *   - Output handles are owned by the caller and released with the matching
 *     *_free function. Output strings (char**) are heap copies released with
 *     sadp_string_free().
 *   - All strings are UTF-8. JSON configuration payloads reject unknown keys.
 */

#ifndef SADP_H
#define SADP_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sadp_status {
  SADP_OK = 0,
  SADP_ERR_IO = 1,             /* unreadable or unwritable path */
  SADP_ERR_PARSE = 2,          /* malformed file or payload */
  SADP_ERR_CONFIG = 3,         /* invalid configuration value */
  SADP_ERR_DOMAIN = 4,         /* argument outside its domain */
  SADP_ERR_CONTRACT = 5,       /* precondition violated */
  SADP_ERR_EMPTY_CORPUS = 6,   /* scoring with zero PII occurrences */
  SADP_ERR_AGENT_NETWORK = 7,  /* agent endpoint unreachable (retryable) */
  SADP_ERR_AGENT_PROTOCOL = 8, /* agent reply violated the wire protocol */
  SADP_ERR_DIVERGED = 9,       /* training loss became non-finite */
  SADP_ERR_INTERNAL = 10
} sadp_status;

typedef struct sadp_registry sadp_registry;
typedef struct sadp_corpus sadp_corpus;
typedef struct sadp_spans sadp_spans;
typedef struct sadp_report sadp_report;
typedef struct sadp_policy sadp_policy;
typedef struct sadp_train_result sadp_train_result;
typedef struct sadp_compare_result sadp_compare_result;

const char* sadp_version(void);
int sadp_abi_version(void);

/* Message of the most recent failing call on this thread; empty string when
 * no failure has occurred. The pointer stays valid until the next failure. */
const char* sadp_last_error(void);

void sadp_string_free(char* s);

/* ---- PII type registry -------------------------------------------------- */

/* The built-in seven-category registry with its documented flag table. */
sadp_status sadp_registry_builtin(sadp_registry** out);
/* Registry file: {"version": ..., "types": [{"name", "linkable",
 * "datatype_protected", "pattern"?}]}; a missing pattern means the type is
 * gazetteer-driven. */
sadp_status sadp_registry_load(const char* path, sadp_registry** out);
sadp_status sadp_registry_to_json(const sadp_registry* registry, char** out);
void sadp_registry_free(sadp_registry* registry);

/* ---- Corpus ------------------------------------------------------------- */

/* format is "plain_text_lines" or "delimited". Malformed delimited rows are
 * skipped and reported through the two accessors below. */
sadp_status sadp_corpus_load(const char* path, const char* format, sadp_corpus** out);
uint64_t sadp_corpus_doc_count(const sadp_corpus* corpus);
uint64_t sadp_corpus_skipped_rows(const sadp_corpus* corpus);
sadp_status sadp_corpus_skipped_row_message(const sadp_corpus* corpus, uint64_t index,
                                            char** out);
void sadp_corpus_free(sadp_corpus* corpus);

/* ---- Detection ---------------------------------------------------------- */

sadp_status sadp_detect_rules(const sadp_corpus* corpus, const sadp_registry* registry,
                              sadp_spans** out);

/* POSTs each document to the agent endpoint ({"doc_id", "text",
 * "allowed_types"} -> {"spans": [{"type", "value"}]}). Values that cannot be
 * aligned back to the text, and unknown types, are dropped and counted. */
sadp_status sadp_detect_agent(const sadp_corpus* corpus, const sadp_registry* registry,
                              const char* endpoint, int timeout_ms, sadp_spans** out);

sadp_status sadp_spans_parse_jsonl(const char* text, sadp_spans** out);
sadp_status sadp_spans_to_jsonl(const sadp_spans* spans, char** out);
uint64_t sadp_spans_count(const sadp_spans* spans);
uint64_t sadp_spans_dropped(const sadp_spans* spans);
void sadp_spans_free(sadp_spans* spans);

/* ---- Sensitivity scoring ------------------------------------------------ */

/* weights = {w_freq, w_link, w_datatype}, must sum to 1; NULL selects the
 * defaults 0.4/0.3/0.3. Fails with SADP_ERR_EMPTY_CORPUS when spans is
 * empty. */
sadp_status sadp_score(const sadp_spans* spans, const sadp_registry* registry,
                       const double* weights, sadp_report** out);
/* Same, but divides frequency by the corpus word count instead of the PII
 * occurrence count. */
sadp_status sadp_score_word_denominator(const sadp_spans* spans,
                                        const sadp_registry* registry,
                                        const double* weights, const sadp_corpus* corpus,
                                        sadp_report** out);
sadp_status sadp_report_parse(const char* json_text, sadp_report** out);
sadp_status sadp_report_to_json(const sadp_report* report, char** out);
void sadp_report_free(sadp_report* report);

/* ---- Noise policy ------------------------------------------------------- */

sadp_status sadp_policy_default(sadp_policy** out);
/* Policy file requires all of sigma_low, sigma_high, low_min, low_max,
 * clip_norm. */
sadp_status sadp_policy_load(const char* path, sadp_policy** out);
sadp_status sadp_policy_map_score(const sadp_policy* policy, double score,
                                  double* sigma_out);
/* Informal per-mechanism epsilon = C / sigma; +inf when sigma == 0. */
sadp_status sadp_policy_implied_epsilon(const sadp_policy* policy, double sigma,
                                        double* epsilon_out);
sadp_status sadp_policy_to_json(const sadp_policy* policy, char** out);
void sadp_policy_free(sadp_policy* policy);

/* ---- Annotation --------------------------------------------------------- */

/* Builds the per-token view consumed by training and returns it as JSONL,
 * one {"doc_id", "tokens", "scores", "sigmas"} object per document. report
 * may be NULL only when spans is empty. */
sadp_status sadp_annotate(const sadp_corpus* corpus, const sadp_spans* spans,
                          const sadp_report* report, const sadp_policy* policy,
                          uint32_t vocab_max, char** out_jsonl);

/* ---- Training ----------------------------------------------------------- */

/* config_json keys (all optional): arm ("no_dp" | "dp_sgd_uniform" |
 * "sa_adp"), seed, epochs, learning_rate, batch_size, seq_len, q, sigma,
 * delta, alpha_grid (array), amplify_subsampling, vocab_max, embed_dim,
 * optimizer ("sgd" | "adam"), eval_fraction, init_scale, label_accuracy.
 * Unknown keys are rejected. spans may be NULL (no PII anywhere); report
 * may be NULL (derived from spans with default weights when needed). */
sadp_status sadp_train(const sadp_corpus* corpus, const sadp_spans* spans,
                       const sadp_report* report, const sadp_policy* policy,
                       const char* config_json, sadp_train_result** out);

/* Single JSON object with the final loss/accuracy/perplexity/epsilon. */
sadp_status sadp_train_summary_json(const sadp_train_result* result, char** out);
sadp_status sadp_train_metrics_csv(const sadp_train_result* result, char** out);
int sadp_train_has_ledger(const sadp_train_result* result);
sadp_status sadp_train_ledger_json(const sadp_train_result* result, char** out);
sadp_status sadp_train_save_checkpoint(const sadp_train_result* result, const char* path);
void sadp_train_result_free(sadp_train_result* result);

/* ---- Accounting --------------------------------------------------------- */

/* Re-converts a ledger JSON document (replaying its step log) and returns
 * {"epsilon", "argmin_order", "epsilon_at_32", "delta", "non_private"}. */
sadp_status sadp_ledger_convert(const char* ledger_json, char** out_json);

/* ---- Comparison matrix -------------------------------------------------- */

/* config_json: {"datasets": [{"name", "path", "format"}], "arms": [{"arm",
 * "sigma"?, "label"?}], "seeds": [...], "train": {...}, "weights": [w1, w2,
 * w3]?, "registry_path"?, "vocab_max"?}. Runs every (dataset, arm, seed)
 * cell; per-cell failures are recorded, not fatal. */
sadp_status sadp_compare_run(const char* config_json, sadp_compare_result** out);
/* format is "csv", "json" or "markdown_table". */
sadp_status sadp_compare_emit(const sadp_compare_result* result, const char* format,
                              char** out);
uint64_t sadp_compare_failure_count(const sadp_compare_result* result);
sadp_status sadp_compare_failure_message(const sadp_compare_result* result, uint64_t index,
                                         char** out);
void sadp_compare_result_free(sadp_compare_result* result);

#ifdef __cplusplus
}
#endif

#endif /* SADP_H */
