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

#ifndef DEXA_RETRIEVAL_H_
#define DEXA_RETRIEVAL_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dexa/corpus.h"
#include "dexa/embedding.h"

namespace dexa {

// An expert-labeled training sentence shown next to the sentence being
// annotated. Only the gold spans of the HIT's sub-task are visible.
struct DynamicExample {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<Span> visible_spans;
  double score = 0.0;
  size_t rank = 0;  // 1-based

  bool operator==(const DynamicExample &) const = default;
};

// Exhaustive cosine index over the training sentences.
//
// Results are ordered by descending score, ties broken by ascending
// sentence id. Immutable after Build; queries may run concurrently.
class ExampleIndex {
 public:
  struct Entry {
    Sentence sentence;
    EmbeddingVector vector;
  };

  // Throws kInvalidArgument for an empty training set or a training
  // sentence without gold labels, and kNotFound (naming the sentence) when
  // the provider cannot embed one.
  static ExampleIndex Build(std::span<const Sentence> train,
                            std::shared_ptr<const EmbeddingProvider> provider,
                            const GoldLabels &gold);

  std::vector<DynamicExample> QueryTopK(const Sentence &query,
                                        Subtask subtask, size_t k) const;
  std::vector<DynamicExample> QueryTopK(const EmbeddingVector &query,
                                        Subtask subtask, size_t k) const;

  const std::vector<Entry> &entries() const { return entries_; }
  const GoldLabels &gold() const { return gold_; }
  const EmbeddingProvider &provider() const { return *provider_; }
  std::shared_ptr<const EmbeddingProvider> shared_provider() const {
    return provider_;
  }
  size_t size() const { return entries_.size(); }
  bool Contains(const std::string &sentence_id) const;

 private:
  ExampleIndex() = default;

  std::shared_ptr<const EmbeddingProvider> provider_;
  std::vector<Entry> entries_;  // sorted by sentence id
  GoldLabels gold_;
};

}  // namespace dexa

#endif  // DEXA_RETRIEVAL_H_
