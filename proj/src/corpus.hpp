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

#ifndef SADP_CORPUS_HPP
#define SADP_CORPUS_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sadp {

enum class CorpusFormat {
  plain_text_lines,  // UTF-8, one document per line
  delimited,         // UTF-8, comma-separated, first line is the header
};

enum class DocSource { plain_text, delimited_record };

struct Document {
  std::uint64_t doc_id = 0;  // zero-based input index, unique per corpus
  std::string text;          // valid UTF-8
  DocSource source = DocSource::plain_text;
};

struct LoadResult {
  std::vector<Document> docs;
  // One entry per skipped delimited row: "row <n>: <reason>".
  std::vector<std::string> skipped_rows;
};

// Loads a corpus file. Plain-text mode yields one Document per nonempty
// line. Delimited mode flattens each record to "field=value" pairs joined
// by single spaces; malformed rows (wrong field count, quoted fields) are
// skipped and reported in LoadResult::skipped_rows with their row number.
LoadResult load_corpus(const std::string& path, CorpusFormat format);

CorpusFormat parse_corpus_format(std::string_view name);
const char* corpus_format_name(CorpusFormat format);

// Word vocabulary with reserved special ids. Non-special entries are a
// bijection between id and surface.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kBos = 2;
  static constexpr std::int32_t kEos = 3;
  static constexpr std::size_t kNumSpecials = 4;

  // Keeps the most frequent surfaces up to max_size entries (specials
  // included); ties are broken lexicographically ascending. max_size >= 5.
  // The result depends only on aggregate frequencies, never on document
  // order.
  static Vocabulary build(const std::vector<Document>& docs, std::size_t max_size);

  std::int32_t id_of(std::string_view surface) const;  // kUnk when absent
  const std::string& surface_of(std::int32_t id) const;
  std::size_t size() const { return surfaces_.size(); }

 private:
  std::vector<std::string> surfaces_;  // indexed by id
  std::unordered_map<std::string, std::int32_t> ids_;
};

struct TokenSpan {
  std::uint32_t begin = 0;  // byte offset into Document::text, inclusive
  std::uint32_t end = 0;    // exclusive
};

struct TokenSequence {
  std::uint64_t doc_id = 0;
  std::vector<std::int32_t> tokens;
  std::vector<TokenSpan> offsets;  // strictly increasing, non-overlapping
};

// Whitespace word tokenization. Out-of-vocabulary words map to kUnk;
// offsets always cover the exact byte span of each word, so
// doc.text[offset.begin:offset.end] reproduces the word.
TokenSequence tokenize(const Document& doc, const Vocabulary& vocab);

// True iff `text` is well-formed UTF-8.
bool utf8_valid(std::string_view text);

}  // namespace sadp

#endif  // SADP_CORPUS_HPP
