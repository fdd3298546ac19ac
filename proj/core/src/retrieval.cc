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

#include "dexa/retrieval.h"

#include <algorithm>
#include <numeric>

#include "dexa/error.h"

namespace dexa {

ExampleIndex ExampleIndex::Build(
    std::span<const Sentence> train,
    std::shared_ptr<const EmbeddingProvider> provider,
    const GoldLabels &gold) {
  if (train.empty()) {
    Fail(ErrorCode::kInvalidArgument, "cannot build an index over no sentences");
  }
  if (provider == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "index requires an embedding provider");
  }
  ExampleIndex index;
  index.provider_ = std::move(provider);
  index.entries_.reserve(train.size());
  std::vector<std::string> ids;
  ids.reserve(train.size());
  for (const Sentence &s : train) {
    if (!gold.Contains(s.id())) {
      Fail(ErrorCode::kInvalidArgument,
           "training sentence " + s.id() + " has no gold labels");
    }
    EmbeddingVector v;
    try {
      v = index.provider_->Embed(s);
    } catch (const Error &e) {
      Fail(e.code(), "cannot embed training sentence " + s.id() + ": " +
                         e.what());
    }
    if (v.dimension() != index.provider_->dimension()) {
      Fail(ErrorCode::kInvalidArgument,
           "embedding of " + s.id() + " has the wrong dimension");
    }
    index.entries_.push_back({s, std::move(v)});
    ids.push_back(s.id());
  }
  std::sort(index.entries_.begin(), index.entries_.end(),
            [](const Entry &a, const Entry &b) {
              return a.sentence.id() < b.sentence.id();
            });
  for (size_t i = 1; i < index.entries_.size(); ++i) {
    if (index.entries_[i].sentence.id() == index.entries_[i - 1].sentence.id()) {
      Fail(ErrorCode::kInvalidArgument,
           "duplicate training sentence " + index.entries_[i].sentence.id());
    }
  }
  index.gold_ = gold.Restrict(ids);
  return index;
}

std::vector<DynamicExample> ExampleIndex::QueryTopK(const Sentence &query,
                                                    Subtask subtask,
                                                    size_t k) const {
  return QueryTopK(provider_->Embed(query), subtask, k);
}

std::vector<DynamicExample> ExampleIndex::QueryTopK(
    const EmbeddingVector &query, Subtask subtask, size_t k) const {
  if (k == 0) Fail(ErrorCode::kInvalidArgument, "k must be at least 1");
  std::vector<double> scores(entries_.size());
  for (size_t i = 0; i < entries_.size(); ++i) {
    scores[i] = Cosine(query, entries_[i].vector);
  }
  // Entries are sorted by id, so a lower position wins a tie.
  std::vector<size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + n, order.end(),
                    [&](size_t a, size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });

  std::vector<DynamicExample> out;
  out.reserve(n);
  for (size_t r = 0; r < n; ++r) {
    const Entry &e = entries_[order[r]];
    out.push_back({e.sentence.id(), e.sentence.tokens(),
                   gold_.Spans(e.sentence.id(), subtask), scores[order[r]],
                   r + 1});
  }
  return out;
}

bool ExampleIndex::Contains(const std::string &sentence_id) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), sentence_id,
      [](const Entry &e, const std::string &id) { return e.sentence.id() < id; });
  return it != entries_.end() && it->sentence.id() == sentence_id;
}

}  // namespace dexa
