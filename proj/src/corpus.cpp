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

#include "corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace sadp {

namespace {

bool is_word_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

bool utf8_valid(std::string_view text) {
  std::size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Reject overlong encodings, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

LoadResult load_corpus(const std::string& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open corpus file: " + path);

  LoadResult result;
  std::string line;
  std::uint64_t line_no = 0;

  if (format == CorpusFormat::plain_text_lines) {
    std::uint64_t doc_id = 0;
    while (std::getline(in, line)) {
      ++line_no;
      line = strip_cr(line);
      if (line.empty()) continue;
      if (!utf8_valid(line)) {
        fail(ErrorCode::parse,
             "invalid UTF-8 on line " + std::to_string(line_no) + " of " + path);
      }
      result.docs.push_back({doc_id++, line, DocSource::plain_text});
    }
    return result;
  }

  // Delimited: first line is the header.
  if (!std::getline(in, line)) return result;  // empty file, no error
  line = strip_cr(line);
  if (!utf8_valid(line)) fail(ErrorCode::parse, "invalid UTF-8 in header of " + path);
  const std::vector<std::string> header = split_line(line, ',');
  if (header.empty() || (header.size() == 1 && header[0].empty())) {
    fail(ErrorCode::parse, "delimited header is empty in " + path);
  }

  std::uint64_t doc_id = 0;
  std::uint64_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (!utf8_valid(line)) {
      result.skipped_rows.push_back("row " + std::to_string(row) + ": invalid UTF-8");
      continue;
    }
    if (line.find('"') != std::string::npos) {
      result.skipped_rows.push_back("row " + std::to_string(row) +
                                    ": quoted fields are not supported");
      continue;
    }
    const std::vector<std::string> fields = split_line(line, ',');
    if (fields.size() != header.size()) {
      result.skipped_rows.push_back(
          "row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
          " fields, got " + std::to_string(fields.size()));
      continue;
    }
    std::string flat;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) flat.push_back(' ');
      flat += header[i];
      flat.push_back('=');
      flat += fields[i];
    }
    result.docs.push_back({doc_id++, std::move(flat), DocSource::delimited_record});
  }
  return result;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "plain_text_lines") return CorpusFormat::plain_text_lines;
  if (name == "delimited") return CorpusFormat::delimited;
  fail(ErrorCode::config, "unknown corpus format: " + std::string(name));
}

const char* corpus_format_name(CorpusFormat format) {
  return format == CorpusFormat::plain_text_lines ? "plain_text_lines" : "delimited";
}

Vocabulary Vocabulary::build(const std::vector<Document>& docs, std::size_t max_size) {
  if (max_size < kNumSpecials + 1) {
    fail(ErrorCode::config, "vocabulary max_size must be at least 5");
  }

  // std::map keeps surfaces ordered, which makes the frequency sort below
  // independent of document order.
  std::map<std::string, std::uint64_t> counts;
  for (const Document& doc : docs) {
    std::size_t i = 0;
    const std::string& text = doc.text;
    while (i < text.size()) {
      while (i < text.size() && is_word_space(text[i])) ++i;
      std::size_t start = i;
      while (i < text.size() && !is_word_space(text[i])) ++i;
      if (i > start) counts[text.substr(start, i - start)]++;
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  vocab.surfaces_ = {"<pad>", "<unk>", "<bos>", "<eos>"};
  const std::size_t keep = std::min(ranked.size(), max_size - kNumSpecials);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto id = static_cast<std::int32_t>(vocab.surfaces_.size());
    vocab.ids_.emplace(ranked[i].first, id);
    vocab.surfaces_.push_back(ranked[i].first);
  }
  return vocab;
}

std::int32_t Vocabulary::id_of(std::string_view surface) const {
  const auto it = ids_.find(std::string(surface));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::surface_of(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= surfaces_.size()) {
    fail(ErrorCode::domain, "token id out of range: " + std::to_string(id));
  }
  return surfaces_[static_cast<std::size_t>(id)];
}

TokenSequence tokenize(const Document& doc, const Vocabulary& vocab) {
  TokenSequence seq;
  seq.doc_id = doc.doc_id;
  const std::string& text = doc.text;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_word_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_word_space(text[i])) ++i;
    if (i > start) {
      seq.tokens.push_back(vocab.id_of(std::string_view(text).substr(start, i - start)));
      seq.offsets.push_back({static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(i)});
    }
  }
  return seq;
}

}  // namespace sadp
