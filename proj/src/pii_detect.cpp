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

#include "pii_detect.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

// httplib is only needed for the optional agent client.
#include "httplib.h"

namespace sadp {

namespace {

using nlohmann::ordered_json;

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Candidate {
  std::uint32_t begin;
  std::uint32_t end;
  std::size_t registry_index;
};

}  // namespace

PiiRegistry::PiiRegistry(std::string version, std::vector<PiiType> types)
    : version_(std::move(version)), types_(std::move(types)) {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    for (std::size_t j = i + 1; j < types_.size(); ++j) {
      if (types_[i].name == types_[j].name) {
        fail(ErrorCode::config, "duplicate PII type in registry: " + types_[i].name);
      }
    }
    if (types_[i].name.empty()) fail(ErrorCode::config, "PII type with empty name");
  }
}

// Flag table for the built-in categories. Linkable means the value can be
// combined with other attributes to identify an individual; datatype
// protection marks categories explicitly named by GDPR/HIPAA-style rules.
PiiRegistry PiiRegistry::builtin() {
  std::vector<PiiType> types;
  types.push_back({"EMAIL", true, false,
                   R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})"});
  types.push_back({"SSN", true, true, R"(\b\d{3}-\d{2}-\d{4}\b)"});
  types.push_back({"PHONE", true, false, R"((?:\(\d{3}\)\s?|\b\d{3}-)\d{3}-\d{4}\b)"});
  types.push_back({"IP_ADDRESS", false, false, R"(\b(?:\d{1,3}\.){3}\d{1,3}\b)"});
  types.push_back({"PERSON_NAME", true, false, ""});  // gazetteer-driven
  types.push_back({"CREDIT_CARD", true, true, R"(\b\d{4}[- ]\d{4}[- ]\d{4}[- ]\d{4}\b)"});
  types.push_back({"DATE_OF_BIRTH", true, true, R"(\b\d{4}-\d{2}-\d{2}\b)"});
  return PiiRegistry("builtin-1", std::move(types));
}

PiiRegistry PiiRegistry::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open registry file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

PiiRegistry PiiRegistry::from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("registry JSON: ") + e.what());
  }
  try {
    std::string version = j.at("version").get<std::string>();
    std::vector<PiiType> types;
    for (const auto& t : j.at("types")) {
      PiiType pt;
      pt.name = t.at("name").get<std::string>();
      pt.linkable = t.at("linkable").get<bool>();
      pt.datatype_protected = t.at("datatype_protected").get<bool>();
      if (t.contains("pattern")) pt.pattern = t.at("pattern").get<std::string>();
      types.push_back(std::move(pt));
    }
    return PiiRegistry(std::move(version), std::move(types));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("registry JSON: ") + e.what());
  }
}

std::string PiiRegistry::to_json() const {
  ordered_json j;
  j["version"] = version_;
  j["types"] = ordered_json::array();
  for (const PiiType& t : types_) {
    ordered_json tj;
    tj["name"] = t.name;
    tj["linkable"] = t.linkable;
    tj["datatype_protected"] = t.datatype_protected;
    if (!t.pattern.empty()) tj["pattern"] = t.pattern;
    j["types"].push_back(std::move(tj));
  }
  return j.dump(2) + "\n";
}

const PiiType* PiiRegistry::find(std::string_view name) const {
  for (const PiiType& t : types_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<std::string> RuleDetector::default_gazetteer() {
  // Shipped fixture: common given names plus a few full names, lowercase.
  return {
      "alice",  "bob",    "carol",  "david",  "erin",    "frank",  "grace",
      "henry",  "irene",  "jack",   "karen",  "liam",    "maria",  "nathan",
      "olivia", "peter",  "quinn",  "rachel", "samuel",  "tina",   "victor",
      "wendy",  "yusuf",  "zoe",    "miguel", "amara",   "chen",   "fatima",
      "lars",   "priya",  "alice smith", "bob jones",    "maria garcia",
      "david chen",       "karen miller",
  };
}

RuleDetector::RuleDetector(const PiiRegistry& registry)
    : RuleDetector(registry, default_gazetteer()) {}

RuleDetector::RuleDetector(const PiiRegistry& registry, std::vector<std::string> gazetteer) {
  if (registry.types().empty()) fail(ErrorCode::config, "registry has no PII types");
  const auto& types = registry.types();
  for (std::size_t i = 0; i < types.size(); ++i) {
    CompiledType ct;
    ct.name = types[i].name;
    ct.registry_index = i;
    if (!types[i].pattern.empty()) {
      try {
        ct.regex.emplace(types[i].pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        fail(ErrorCode::config,
             "invalid pattern for " + types[i].name + ": " + e.what());
      }
    }
    compiled_.push_back(std::move(ct));
  }
  gazetteer_.reserve(gazetteer.size());
  for (std::string& g : gazetteer) gazetteer_.push_back(to_lower(g));
}

std::vector<PiiSpan> RuleDetector::detect(const Document& doc) const {
  const std::string& text = doc.text;
  std::vector<Candidate> candidates;

  const std::string lower = to_lower(text);
  for (const CompiledType& ct : compiled_) {
    if (ct.regex) {
      for (auto it = std::sregex_iterator(text.begin(), text.end(), *ct.regex);
           it != std::sregex_iterator(); ++it) {
        const auto begin = static_cast<std::uint32_t>(it->position(0));
        const auto end = begin + static_cast<std::uint32_t>(it->length(0));
        if (end > begin) candidates.push_back({begin, end, ct.registry_index});
      }
    } else {
      for (const std::string& entry : gazetteer_) {
        std::size_t pos = 0;
        while ((pos = lower.find(entry, pos)) != std::string::npos) {
          const std::size_t end = pos + entry.size();
          const bool left_ok = pos == 0 || !is_word_char(lower[pos - 1]);
          const bool right_ok = end == lower.size() || !is_word_char(lower[end]);
          if (left_ok && right_ok) {
            candidates.push_back({static_cast<std::uint32_t>(pos),
                                  static_cast<std::uint32_t>(end), ct.registry_index});
          }
          ++pos;
        }
      }
    }
  }

  // Longest match first, then earlier start, then registry order; accept
  // greedily, rejecting anything that overlaps an accepted span.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    const auto la = a.end - a.begin, lb = b.end - b.begin;
    if (la != lb) return la > lb;
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.registry_index < b.registry_index;
  });

  std::vector<Candidate> accepted;
  for (const Candidate& c : candidates) {
    bool overlaps = false;
    for (const Candidate& a : accepted) {
      if (c.begin < a.end && a.begin < c.end) {
        overlaps = true;
        break;
      }
    }
    if (!overlaps) accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Candidate& a, const Candidate& b) { return a.begin < b.begin; });

  std::vector<PiiSpan> spans;
  spans.reserve(accepted.size());
  for (const Candidate& c : accepted) {
    spans.push_back({doc.doc_id, c.begin, c.end, text.substr(c.begin, c.end - c.begin),
                     compiled_[c.registry_index].name});
  }
  return spans;
}

namespace {

// Splits "http://host:port/path" into client base and path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::config, "agent endpoint must include a scheme: " + endpoint);
  }
  const auto path_pos = endpoint.find('/', scheme_end + 3);
  if (path_pos == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_pos), endpoint.substr(path_pos)};
}

}  // namespace

AgentResult detect_agent(const Document& doc, const AgentOptions& options,
                         const PiiRegistry& registry) {
  const auto [base, path] = split_endpoint(options.endpoint);

  ordered_json request;
  request["doc_id"] = doc.doc_id;
  request["text"] = doc.text;
  request["allowed_types"] = ordered_json::array();
  for (const PiiType& t : registry.types()) request["allowed_types"].push_back(t.name);

  httplib::Client client(base);
  client.set_connection_timeout(options.timeout_ms / 1000, (options.timeout_ms % 1000) * 1000);
  client.set_read_timeout(options.timeout_ms / 1000, (options.timeout_ms % 1000) * 1000);

  const auto response = client.Post(path, request.dump(), "application/json");
  if (!response) {
    fail(ErrorCode::agent_network,
         "agent endpoint unreachable: " + options.endpoint + " (" +
             httplib::to_string(response.error()) + ")");
  }
  if (response->status != 200) {
    fail(ErrorCode::agent_protocol, "agent returned HTTP " + std::to_string(response->status) +
                                        ": " + response->body);
  }

  ordered_json payload;
  try {
    payload = ordered_json::parse(response->body);
  } catch (const std::exception&) {
    fail(ErrorCode::agent_protocol, "unparseable agent response: " + response->body);
  }

  AgentResult result;
  if (!payload.contains("spans") || !payload["spans"].is_array()) {
    fail(ErrorCode::agent_protocol, "agent response missing spans array: " + response->body);
  }
  for (const auto& item : payload["spans"]) {
    if (!item.contains("type") || !item.contains("value")) {
      fail(ErrorCode::agent_protocol, "agent span missing type/value: " + response->body);
    }
    const std::string type = item["type"].get<std::string>();
    const std::string value = item["value"].get<std::string>();
    if (!registry.contains(type) || value.empty()) {
      ++result.dropped;
      continue;
    }
    const std::size_t pos = doc.text.find(value);
    if (pos == std::string::npos) {
      ++result.dropped;
      continue;
    }
    result.spans.push_back({doc.doc_id, static_cast<std::uint32_t>(pos),
                            static_cast<std::uint32_t>(pos + value.size()), value, type});
  }
  std::sort(result.spans.begin(), result.spans.end(),
            [](const PiiSpan& a, const PiiSpan& b) { return a.begin < b.begin; });
  return result;
}

std::vector<std::optional<std::string>> project_spans(
    const std::vector<PiiSpan>& spans, const TokenSequence& seq,
    const std::unordered_map<std::string, double>& type_score) {
  for (const PiiSpan& s : spans) {
    if (s.doc_id != seq.doc_id) {
      fail(ErrorCode::contract, "span doc_id " + std::to_string(s.doc_id) +
                                    " does not match sequence doc_id " +
                                    std::to_string(seq.doc_id));
    }
  }

  const auto score_of = [&](const std::string& type) {
    const auto it = type_score.find(type);
    return it == type_score.end() ? 0.0 : it->second;
  };

  std::vector<std::optional<std::string>> assignment(seq.tokens.size());
  for (std::size_t k = 0; k < seq.offsets.size(); ++k) {
    const TokenSpan tok = seq.offsets[k];
    const PiiSpan* best = nullptr;
    double best_score = 0.0;
    for (const PiiSpan& s : spans) {
      if (s.begin >= tok.end || tok.begin >= s.end) continue;  // zero overlap
      const double sc = score_of(s.type);
      if (best == nullptr || sc > best_score ||
          (sc == best_score && s.begin < best->begin)) {
        best = &s;
        best_score = sc;
      }
    }
    if (best != nullptr) assignment[k] = best->type;
  }
  return assignment;
}

std::string spans_to_jsonl(const std::vector<PiiSpan>& spans) {
  std::string out;
  for (const PiiSpan& s : spans) {
    ordered_json j;
    j["doc_id"] = s.doc_id;
    j["start"] = s.begin;
    j["end"] = s.end;
    j["type"] = s.type;
    j["surface"] = s.surface;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<PiiSpan> spans_from_jsonl(const std::string& text) {
  std::vector<PiiSpan> spans;
  std::istringstream in(text);
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      PiiSpan s;
      s.doc_id = j.at("doc_id").get<std::uint64_t>();
      s.begin = j.at("start").get<std::uint32_t>();
      s.end = j.at("end").get<std::uint32_t>();
      s.type = j.at("type").get<std::string>();
      s.surface = j.at("surface").get<std::string>();
      if (s.begin >= s.end) fail(ErrorCode::parse, "empty span");
      spans.push_back(std::move(s));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::parse,
           "spans line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return spans;
}

}  // namespace sadp
