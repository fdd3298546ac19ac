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

#include "dexa/tokenizer.h"

namespace dexa {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsTerminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool IsCloser(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

bool IsLeadingPunct(char c) {
  return c == '(' || c == '[' || c == '{' || c == '"';
}

bool IsTrailingPunct(char c) {
  switch (c) {
    case ')': case ']': case '}': case '"': case '.': case ',': case ';':
    case ':': case '!': case '?':
      return true;
    default:
      return false;
  }
}

// Shrinks [begin, end) to exclude surrounding whitespace.
TextRange Trim(std::string_view text, size_t begin, size_t end) {
  while (begin < end && IsSpace(text[begin])) ++begin;
  while (end > begin && IsSpace(text[end - 1])) --end;
  return {begin, end};
}

std::vector<TextRange> SegmentRuleBased(std::string_view text) {
  std::vector<TextRange> out;
  size_t start = 0;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    if (!IsTerminal(text[i])) {
      ++i;
      continue;
    }
    size_t j = i + 1;
    while (j < n && (IsTerminal(text[j]) || IsCloser(text[j]))) ++j;
    if (j < n && !IsSpace(text[j])) {
      i = j;
      continue;
    }
    size_t k = j;
    while (k < n && IsSpace(text[k])) ++k;
    if (k < n && text[k] >= 'a' && text[k] <= 'z') {
      i = k;
      continue;
    }
    TextRange r = Trim(text, start, j);
    if (r.begin < r.end) out.push_back(r);
    start = j;
    i = k;
  }
  TextRange r = Trim(text, start, n);
  if (r.begin < r.end) out.push_back(r);
  return out;
}

std::vector<TextRange> SegmentLines(std::string_view text) {
  std::vector<TextRange> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    TextRange r = Trim(text, start, nl);
    if (r.begin < r.end) out.push_back(r);
    start = nl + 1;
  }
  return out;
}

}  // namespace

std::vector<TextRange> SegmentSentences(std::string_view text,
                                        SegmentationPolicy policy) {
  switch (policy) {
    case SegmentationPolicy::kLines:
      return SegmentLines(text);
    case SegmentationPolicy::kRuleBased:
      break;
  }
  return SegmentRuleBased(text);
}

std::vector<TextRange> TokenizeRanges(std::string_view sentence) {
  std::vector<TextRange> out;
  size_t i = 0;
  const size_t n = sentence.size();
  while (i < n) {
    while (i < n && IsSpace(sentence[i])) ++i;
    if (i == n) break;
    size_t end = i;
    while (end < n && !IsSpace(sentence[end])) ++end;

    size_t b = i;
    while (b < end && IsLeadingPunct(sentence[b])) {
      out.push_back({b, b + 1});
      ++b;
    }
    size_t e = end;
    while (e > b && IsTrailingPunct(sentence[e - 1])) --e;
    if (b < e) out.push_back({b, e});
    for (size_t p = e; p < end; ++p) out.push_back({p, p + 1});
    i = end;
  }
  return out;
}

std::vector<std::string> Tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  for (const TextRange &r : TokenizeRanges(sentence)) {
    tokens.emplace_back(sentence.substr(r.begin, r.end - r.begin));
  }
  return tokens;
}

}  // namespace dexa
