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

#include "pipeline.hpp"

#include <unordered_map>

#include "errors.hpp"

namespace sadp {

std::vector<TokenSequence> tokenize_all(const std::vector<Document>& docs,
                                        const Vocabulary& vocab) {
  std::vector<TokenSequence> seqs;
  seqs.reserve(docs.size());
  for (const Document& doc : docs) seqs.push_back(tokenize(doc, vocab));
  return seqs;
}

std::uint64_t count_words(const std::vector<Document>& docs) {
  std::uint64_t total = 0;
  for (const Document& doc : docs) {
    bool in_word = false;
    for (char c : doc.text) {
      const bool space = c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
      if (!space && !in_word) ++total;
      in_word = !space;
    }
  }
  return total;
}

std::vector<PiiSpan> detect_all(const std::vector<Document>& docs,
                                const PiiRegistry& registry) {
  const RuleDetector detector(registry);
  std::vector<PiiSpan> all;
  for (const Document& doc : docs) {
    std::vector<PiiSpan> spans = detector.detect(doc);
    all.insert(all.end(), std::make_move_iterator(spans.begin()),
               std::make_move_iterator(spans.end()));
  }
  return all;
}

std::vector<AnnotatedSequence> annotate_all(const std::vector<TokenSequence>& seqs,
                                            const std::vector<PiiSpan>& spans,
                                            const SensitivityReport& report,
                                            const NoisePolicy& policy) {
  std::unordered_map<std::uint64_t, std::vector<PiiSpan>> by_doc;
  for (const PiiSpan& s : spans) by_doc[s.doc_id].push_back(s);
  const auto scores = report.final_by_type();

  std::vector<AnnotatedSequence> out;
  out.reserve(seqs.size());
  static const std::vector<PiiSpan> kNone;
  for (const TokenSequence& seq : seqs) {
    const auto it = by_doc.find(seq.doc_id);
    const std::vector<PiiSpan>& doc_spans = it == by_doc.end() ? kNone : it->second;
    const auto assignment = project_spans(doc_spans, seq, scores);
    out.push_back(annotate(seq, assignment, report, policy));
  }
  return out;
}

}  // namespace sadp
