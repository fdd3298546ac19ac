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

#ifndef DEXA_CORPUS_H_
#define DEXA_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dexa/tokenizer.h"

namespace dexa {

// The three independent annotation passes: Participants, Interventions and
// Outcomes.
enum class Subtask : uint8_t {
  kParticipants = 0,
  kInterventions = 1,
  kOutcomes = 2,
};

inline constexpr std::array<Subtask, 3> kAllSubtasks = {
    Subtask::kParticipants, Subtask::kInterventions, Subtask::kOutcomes};

inline constexpr size_t SubtaskIndex(Subtask s) {
  return static_cast<size_t>(s);
}

// "P", "I" or "O".
std::string_view SubtaskName(Subtask s);

// Accepts "P", "I" or "O" (case-insensitive). Throws kInvalidArgument.
Subtask ParseSubtask(std::string_view name);

// Parses a list such as "PIO" or "P,O"; returns sorted, distinct values.
std::vector<Subtask> ParseSubtaskList(std::string_view list);

// End-exclusive token range tagged with the sub-task it annotates.
struct Span {
  Subtask subtask = Subtask::kParticipants;
  size_t start = 0;
  size_t end = 0;

  auto operator<=>(const Span &) const = default;
};

// Tokenized sentence. Immutable after construction.
class Sentence {
 public:
  Sentence(std::string id, std::vector<std::string> tokens,
           std::vector<TextRange> char_offsets = {});

  const std::string &id() const { return id_; }
  const std::vector<std::string> &tokens() const { return tokens_; }
  size_t size() const { return tokens_.size(); }
  // Per-token byte offsets into the document source text
  // (title + '\n' + abstract); empty for pre-tokenized input.
  const std::vector<TextRange> &char_offsets() const { return offsets_; }

 private:
  std::string id_;
  std::vector<std::string> tokens_;
  std::vector<TextRange> offsets_;
};

struct Document {
  std::string doc_id;
  std::string title;
  std::string abstract;
  std::vector<Sentence> sentences;
};

// One bit per token, 1 = inside a span of `subtask`.
struct TokenLabelVector {
  std::string sentence_id;
  Subtask subtask = Subtask::kParticipants;
  std::vector<uint8_t> labels;

  size_t size() const { return labels.size(); }
  std::string ToBitString() const;
  static TokenLabelVector FromBitString(std::string sentence_id,
                                        Subtask subtask,
                                        std::string_view bits);

  bool operator==(const TokenLabelVector &) const = default;
};

// Expert span labels keyed by sentence id. A sentence present here is
// labeled for every sub-task; a missing sub-task entry means "no spans".
class GoldLabels {
 public:
  struct Entry {
    size_t token_count = 0;
    std::array<std::vector<Span>, 3> spans;  // indexed by SubtaskIndex
  };

  // Adds a sentence with no spans, or checks the token count matches.
  void AddSentence(const std::string &sentence_id, size_t token_count);
  // Adds a span after validating it; the sentence must already be present
  // or `token_count` must be supplied by AddSentence first.
  void AddSpan(const std::string &sentence_id, const Span &span);

  bool Contains(const std::string &sentence_id) const;
  const Entry &at(const std::string &sentence_id) const;
  const std::vector<Span> &Spans(const std::string &sentence_id,
                                 Subtask subtask) const;
  TokenLabelVector Labels(const std::string &sentence_id,
                          Subtask subtask) const;

  // Copy restricted to the given sentences; unknown ids are ignored.
  GoldLabels Restrict(std::span<const std::string> sentence_ids) const;

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, Entry> &entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

// Builds sentence id "<doc_id>_<index>".
std::string MakeSentenceId(std::string_view doc_id, size_t index);

// Segments and tokenizes a raw report. The title (if any) is segmented on
// its own and precedes the abstract's sentences. Throws kInvalidArgument
// when both title and abstract are blank.
Document IngestDocument(std::string doc_id, std::string title,
                        std::string abstract,
                        SegmentationPolicy policy =
                            SegmentationPolicy::kRuleBased);

// Alternative ingestion path for text that was tokenized elsewhere.
Document IngestPretokenized(std::string doc_id,
                            std::vector<std::vector<std::string>> sentences);

// Sets bit i iff some span covers token i. Throws kInvalidArgument for an
// out-of-range span or one tagged with a different sub-task.
TokenLabelVector SpansToTokenLabels(std::span<const Span> spans,
                                    const std::string &sentence_id,
                                    size_t token_count, Subtask subtask);
TokenLabelVector SpansToTokenLabels(std::span<const Span> spans,
                                    const Sentence &sentence, Subtask subtask);

// Maximal runs of 1-bits, in ascending order.
std::vector<Span> TokenLabelsToSpans(const TokenLabelVector &v);

// Overlap- and adjacency-merged normal form; same as a round trip through
// token labels.
std::vector<Span> NormalizeSpans(std::span<const Span> spans);

// Validates 0 <= start < end <= token_count.
bool IsValidSpan(const Span &span, size_t token_count);

// Corpus file: JSON lines with either {"doc_id","title","abstract"} or
// {"doc_id","sentences":[[tok,...],...]}. Duplicate doc ids are rejected.
std::vector<Document> ParseCorpus(std::istream &in,
                                  SegmentationPolicy policy =
                                      SegmentationPolicy::kRuleBased);
std::vector<Document> LoadCorpus(const std::string &path,
                                 SegmentationPolicy policy =
                                     SegmentationPolicy::kRuleBased);
// Writes the pre-tokenized form.
void WriteCorpus(std::ostream &out, std::span<const Document> documents);

// Gold file: JSON lines {"sentence_id","subtask","spans":[[s,e],...]}.
// Every sentence referenced must exist in `corpus`; errors name the line.
GoldLabels ParseGold(std::istream &in, std::span<const Document> corpus);
GoldLabels LoadGold(const std::string &path,
                    std::span<const Document> corpus);
void WriteGold(std::ostream &out, const GoldLabels &gold);

// Sentence lookup by id over a set of documents.
class SentenceTable {
 public:
  SentenceTable() = default;
  explicit SentenceTable(std::span<const Document> documents);

  void Add(const Sentence &sentence);
  const Sentence *Find(const std::string &sentence_id) const;
  const Sentence &at(const std::string &sentence_id) const;
  size_t size() const { return by_id_.size(); }

 private:
  std::unordered_map<std::string, Sentence> by_id_;
};

}  // namespace dexa

#endif  // DEXA_CORPUS_H_
