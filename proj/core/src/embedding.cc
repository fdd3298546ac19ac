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

#include "dexa/embedding.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dexa/error.h"

namespace dexa {

using json = nlohmann::json;

namespace {

constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

bool KeepToken(std::string_view token) {
  for (unsigned char c : token) {
    if (c >= 0x80 || std::isalnum(c)) return true;
  }
  return false;
}

std::string Lower(std::string_view token) {
  std::string out(token);
  for (char &c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

uint64_t Fnv1a64(std::string_view bytes, uint64_t seed) {
  uint64_t h = kFnvOffsetBasis ^ seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

double Cosine(const EmbeddingVector &u, const EmbeddingVector &v) {
  if (u.dimension() != v.dimension()) {
    Fail(ErrorCode::kInvalidArgument,
         "cosine of vectors with dimensions " +
             std::to_string(u.dimension()) + " and " +
             std::to_string(v.dimension()));
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i) {
    dot += u.values[i] * v.values[i];
    uu += u.values[i] * u.values[i];
    vv += v.values[i] * v.values[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  double c = dot / (std::sqrt(uu) * std::sqrt(vv));
  // Rounding can push |c| a hair past 1.
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

HashedNgramEmbedder::HashedNgramEmbedder(size_t dimension, uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) {
    Fail(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
  }
}

std::string HashedNgramEmbedder::name() const {
  return "hashed-ngram-" + std::to_string(dimension_);
}

EmbeddingVector HashedNgramEmbedder::Embed(const Sentence &sentence) const {
  return EmbedTokens(sentence.tokens());
}

EmbeddingVector HashedNgramEmbedder::EmbedTokens(
    const std::vector<std::string> &tokens) const {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const std::string &t : tokens) {
    if (KeepToken(t)) kept.push_back(Lower(t));
  }

  EmbeddingVector v{std::vector<double>(dimension_, 0.0)};
  if (kept.empty()) return v;

  size_t features = 0;
  auto add = [&](const std::string &feature) {
    v.values[Fnv1a64(feature, seed_) % dimension_] += 1.0;
    ++features;
  };
  for (const std::string &t : kept) add("u:" + t);
  for (size_t i = 0; i + 1 < kept.size(); ++i) {
    add("b:" + kept[i] + " " + kept[i + 1]);
  }

  double norm2 = 0.0;
  for (double &x : v.values) {
    x /= static_cast<double>(features);
    norm2 += x * x;
  }
  const double norm = std::sqrt(norm2);
  for (double &x : v.values) x /= norm;
  return v;
}

PrecomputedEmbeddings::PrecomputedEmbeddings(
    size_t dimension, std::unordered_map<std::string, EmbeddingVector> table,
    std::string name)
    : dimension_(dimension), table_(std::move(table)), name_(std::move(name)) {
  if (dimension_ == 0) {
    Fail(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
  }
  for (const auto &[id, vec] : table_) {
    if (vec.dimension() != dimension_) {
      Fail(ErrorCode::kInvalidArgument,
           "embedding for " + id + " has dimension " +
               std::to_string(vec.dimension()) + ", expected " +
               std::to_string(dimension_));
    }
  }
}

EmbeddingVector PrecomputedEmbeddings::Embed(const Sentence &sentence) const {
  auto it = table_.find(sentence.id());
  if (it == table_.end()) {
    Fail(ErrorCode::kNotFound,
         "no precomputed embedding for sentence " + sentence.id());
  }
  return it->second;
}

std::unique_ptr<PrecomputedEmbeddings> ParsePrecomputed(std::istream &in) {
  std::string line;
  size_t line_no = 0;
  size_t dimension = 0;
  std::unordered_map<std::string, EmbeddingVector> table;
  auto where = [&] { return "embedding table line " + std::to_string(line_no); };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error &e) {
      Fail(ErrorCode::kInvalidArgument, where() + ": " + e.what());
    }
    try {
      if (dimension == 0) {
        if (!j.contains("dimension")) {
          Fail(ErrorCode::kInvalidArgument,
               where() + ": expected header {\"dimension\": d}");
        }
        long long d = j.at("dimension").get<long long>();
        if (d <= 0) {
          Fail(ErrorCode::kInvalidArgument,
               where() + ": dimension must be positive");
        }
        dimension = static_cast<size_t>(d);
        continue;
      }
      std::string id = j.at("sentence_id").get<std::string>();
      EmbeddingVector v{j.at("vector").get<std::vector<double>>()};
      if (v.dimension() != dimension) {
        Fail(ErrorCode::kInvalidArgument,
             where() + ": vector for " + id + " has dimension " +
                 std::to_string(v.dimension()) + ", header says " +
                 std::to_string(dimension));
      }
      for (double x : v.values) {
        if (!std::isfinite(x)) {
          Fail(ErrorCode::kInvalidArgument,
               where() + ": non-finite entry for " + id);
        }
      }
      if (!table.emplace(id, std::move(v)).second) {
        Fail(ErrorCode::kInvalidArgument,
             where() + ": duplicate sentence_id " + id);
      }
    } catch (const json::exception &e) {
      Fail(ErrorCode::kInvalidArgument, where() + ": " + e.what());
    }
  }
  if (dimension == 0) {
    Fail(ErrorCode::kInvalidArgument, "embedding table has no header");
  }
  return std::make_unique<PrecomputedEmbeddings>(dimension, std::move(table));
}

std::unique_ptr<PrecomputedEmbeddings> LoadPrecomputed(
    const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open " + path);
  return ParsePrecomputed(in);
}

void WriteEmbeddingTable(
    std::ostream &out, size_t dimension,
    const std::vector<std::pair<std::string, EmbeddingVector>> &rows) {
  out << json{{"dimension", dimension}}.dump() << '\n';
  for (const auto &[id, vec] : rows) {
    if (vec.dimension() != dimension) {
      Fail(ErrorCode::kInvalidArgument, "vector for " + id +
                                            " does not match table dimension");
    }
    out << json{{"sentence_id", id}, {"vector", vec.values}}.dump() << '\n';
  }
}

}  // namespace dexa
