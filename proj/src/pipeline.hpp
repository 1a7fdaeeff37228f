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

#ifndef SADP_PIPELINE_HPP
#define SADP_PIPELINE_HPP

#include <cstdint>
#include <vector>

#include "corpus.hpp"
#include "noise_policy.hpp"
#include "pii_detect.hpp"
#include "scoring.hpp"

namespace sadp {

// Stage glue shared by the comparison matrix, the C API and the CLI.

std::vector<TokenSequence> tokenize_all(const std::vector<Document>& docs,
                                        const Vocabulary& vocab);

std::uint64_t count_words(const std::vector<Document>& docs);

std::vector<PiiSpan> detect_all(const std::vector<Document>& docs,
                                const PiiRegistry& registry);

// Projects spans onto tokens and annotates every sequence. Documents
// without spans get all-zero scores. The report may be empty (no types)
// only when `spans` is empty.
std::vector<AnnotatedSequence> annotate_all(const std::vector<TokenSequence>& seqs,
                                            const std::vector<PiiSpan>& spans,
                                            const SensitivityReport& report,
                                            const NoisePolicy& policy);

}  // namespace sadp

#endif  // SADP_PIPELINE_HPP
