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

#ifndef DEXA_EMBEDDING_H_
#define DEXA_EMBEDDING_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dexa/corpus.h"

namespace dexa {

struct EmbeddingVector {
  std::vector<double> values;

  size_t dimension() const { return values.size(); }
  bool operator==(const EmbeddingVector &) const = default;
};

// dot(u,v) / (|u| |v|), or 0 when either norm is 0. Throws kInvalidArgument
// on a dimension mismatch.
double Cosine(const EmbeddingVector &u, const EmbeddingVector &v);

enum class EmbeddingSource { kBuiltinHashedNgram, kPrecomputedTable };

// Maps a sentence to a fixed-dimension vector. Implementations are immutable
// after construction and safe for concurrent use.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string name() const = 0;
  virtual size_t dimension() const = 0;
  virtual EmbeddingSource source() const = 0;
  virtual EmbeddingVector Embed(const Sentence &sentence) const = 0;
};

// Feature-hashed bag of unigrams and bigrams.
//
// Tokens are lowercased (ASCII only); tokens with no alphanumeric ASCII byte
// and no non-ASCII byte are dropped. Features are "u:<tok>" for each kept
// token and "b:<tok1> <tok2>" for each adjacent pair of kept tokens. Each
// feature adds 1 to bucket FNV-1a-64(feature, basis ^ seed) % dimension.
// The counts are divided by the feature count and L2-normalized. A sentence
// with no kept tokens maps to the zero vector.
class HashedNgramEmbedder : public EmbeddingProvider {
 public:
  static constexpr size_t kDefaultDimension = 256;
  static constexpr uint64_t kDefaultSeed = 0x5dee'ce66'd1ce'5eedULL;

  explicit HashedNgramEmbedder(size_t dimension = kDefaultDimension,
                               uint64_t seed = kDefaultSeed);

  std::string name() const override;
  size_t dimension() const override { return dimension_; }
  EmbeddingSource source() const override {
    return EmbeddingSource::kBuiltinHashedNgram;
  }
  EmbeddingVector Embed(const Sentence &sentence) const override;
  EmbeddingVector EmbedTokens(const std::vector<std::string> &tokens) const;

  uint64_t seed() const { return seed_; }

 private:
  size_t dimension_;
  uint64_t seed_;
};

// Serves vectors looked up by sentence id. A miss is an error, never a
// fallback to some other embedder.
class PrecomputedEmbeddings : public EmbeddingProvider {
 public:
  PrecomputedEmbeddings(size_t dimension,
                        std::unordered_map<std::string, EmbeddingVector> table,
                        std::string name = "precomputed");

  std::string name() const override { return name_; }
  size_t dimension() const override { return dimension_; }
  EmbeddingSource source() const override {
    return EmbeddingSource::kPrecomputedTable;
  }
  // Throws kNotFound when the sentence id is not in the table.
  EmbeddingVector Embed(const Sentence &sentence) const override;

  size_t size() const { return table_.size(); }
  bool Contains(const std::string &sentence_id) const {
    return table_.count(sentence_id) != 0;
  }

 private:
  size_t dimension_;
  std::unordered_map<std::string, EmbeddingVector> table_;
  std::string name_;
};

// Embedding table: a header line {"dimension": d}, then JSON lines
// {"sentence_id", "vector": [d numbers]}.
std::unique_ptr<PrecomputedEmbeddings> ParsePrecomputed(std::istream &in);
std::unique_ptr<PrecomputedEmbeddings> LoadPrecomputed(
    const std::string &path);

// Writes the table format; every vector must have `dimension` entries.
void WriteEmbeddingTable(
    std::ostream &out, size_t dimension,
    const std::vector<std::pair<std::string, EmbeddingVector>> &rows);

uint64_t Fnv1a64(std::string_view bytes, uint64_t seed);

}  // namespace dexa

#endif  // DEXA_EMBEDDING_H_
