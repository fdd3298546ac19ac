// Copyright 2026 The DEXA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEXA_TOKENIZER_H_
#define DEXA_TOKENIZER_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dexa {

// Half-open byte range into a source string.
struct TextRange {
  size_t begin = 0;
  size_t end = 0;

  bool operator==(const TextRange &) const = default;
};

enum class SegmentationPolicy {
  // Split after '.', '!' or '?' (plus any closing quotes or brackets) when
  // followed by whitespace and a next character that is not a lowercase
  // ASCII letter, or by the end of the text.
  kRuleBased,
  // Every non-blank line is one sentence.
  kLines,
};

// Returns trimmed sentence ranges in source order. Blank sentences are
// dropped.
std::vector<TextRange> SegmentSentences(std::string_view text,
                                        SegmentationPolicy policy =
                                            SegmentationPolicy::kRuleBased);

// Tokenization rules:
//   1. Split on ASCII whitespace.
//   2. Peel leading characters from ( [ { " off each chunk as single tokens.
//   3. Peel trailing characters from ) ] } " . , ; : ! ? off the remainder
//      as single tokens, innermost last.
// Everything else stays attached, so "n=110", "3.5" and "63%" are one token.
std::vector<TextRange> TokenizeRanges(std::string_view sentence);

std::vector<std::string> Tokenize(std::string_view sentence);

}  // namespace dexa

#endif  // DEXA_TOKENIZER_H_
