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

#ifndef SADP_PII_DETECT_HPP
#define SADP_PII_DETECT_HPP

#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"

namespace sadp {

struct PiiType {
  std::string name;                // canonical key, unique per registry
  bool linkable = false;           // can be combined with others to identify someone
  bool datatype_protected = false; // explicitly covered by privacy regulation
  std::string pattern;             // ECMAScript regex; empty means gazetteer-driven
};

// Ordered catalog of PII categories. Flags are explicit configuration so a
// run's scoring inputs are auditable; there are no implicit defaults.
class PiiRegistry {
 public:
  PiiRegistry(std::string version, std::vector<PiiType> types);

  // The seven built-in categories with their documented flag table.
  static PiiRegistry builtin();
  static PiiRegistry load(const std::string& path);
  static PiiRegistry from_json(const std::string& json_text);
  std::string to_json() const;

  const std::vector<PiiType>& types() const { return types_; }
  const std::string& version() const { return version_; }
  const PiiType* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

 private:
  std::string version_;
  std::vector<PiiType> types_;
};

struct PiiSpan {
  std::uint64_t doc_id = 0;
  std::uint32_t begin = 0;  // byte offset, inclusive
  std::uint32_t end = 0;    // exclusive; begin < end <= text size
  std::string surface;      // always equals text[begin:end]
  std::string type;         // a name present in the registry
};

// Deterministic pattern-based detector. Regex types match their registry
// pattern; pattern-less types match against the name gazetteer
// (case-insensitive whole words, multi-word entries allowed). Overlaps are
// resolved longest-match-first, then earlier start, then registry order,
// so e.g. a full SSN is never split by a shorter phone-like match.
class RuleDetector {
 public:
  explicit RuleDetector(const PiiRegistry& registry);
  RuleDetector(const PiiRegistry& registry, std::vector<std::string> gazetteer);

  // Returned spans are sorted by start and pairwise non-overlapping.
  std::vector<PiiSpan> detect(const Document& doc) const;

  static std::vector<std::string> default_gazetteer();

 private:
  struct CompiledType {
    std::string name;
    std::size_t registry_index;
    std::optional<std::regex> regex;  // nullopt => gazetteer-driven
  };
  std::vector<CompiledType> compiled_;
  std::vector<std::string> gazetteer_;  // lowercase
};

struct AgentOptions {
  std::string endpoint;     // e.g. "http://127.0.0.1:8089/detect"
  int timeout_ms = 30000;
};

struct AgentResult {
  std::vector<PiiSpan> spans;
  std::uint64_t dropped = 0;  // unknown types + unaligned values
};

// Client for an external LLM detection agent. POSTs
//   {"doc_id": ..., "text": ..., "allowed_types": [...]}
// and expects {"spans": [{"type": ..., "value": ...}]}. Reported values are
// aligned back to character spans by first-occurrence substring search;
// values that cannot be aligned or carry an unknown type are dropped and
// counted.
AgentResult detect_agent(const Document& doc, const AgentOptions& options,
                         const PiiRegistry& registry);

// Per-token PII assignment: a token gets a type iff its byte span overlaps
// a PiiSpan by at least one byte. When several spans overlap one token the
// one with the higher score wins (ties: earlier span). `type_score` maps
// type name -> score; missing types score 0.
std::vector<std::optional<std::string>> project_spans(
    const std::vector<PiiSpan>& spans, const TokenSequence& seq,
    const std::unordered_map<std::string, double>& type_score = {});

// JSONL (one span object per line) round-trip for the spans file format.
std::string spans_to_jsonl(const std::vector<PiiSpan>& spans);
std::vector<PiiSpan> spans_from_jsonl(const std::string& text);

}  // namespace sadp

#endif  // SADP_PII_DETECT_HPP
