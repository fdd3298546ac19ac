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

#include <gtest/gtest.h>

#include "dexa/error.h"
#include "dexa/random.h"
#include "test_util.h"

namespace dexa {
namespace {

struct Pool {
  std::vector<Sentence> sentences;
  GoldLabels gold;
};

Pool MakePool(std::vector<std::vector<std::string>> token_lists) {
  Pool pool;
  Document doc = IngestPretokenized("tr", std::move(token_lists));
  for (const Sentence &s : doc.sentences) {
    pool.gold.AddSentence(s.id(), s.size());
    pool.gold.AddSpan(s.id(), {Subtask::kParticipants, 0, 1});
    pool.gold.AddSpan(s.id(), {Subtask::kOutcomes, s.size() - 1, s.size()});
  }
  pool.sentences = doc.sentences;
  return pool;
}

std::shared_ptr<const EmbeddingProvider> Builtin() {
  return std::make_shared<HashedNgramEmbedder>();
}

TEST(ExampleIndexTest, IdenticalSentenceRanksFirst) {
  Pool pool = MakePool({{"children", "with", "asthma"},
                        {"adults", "with", "sepsis"},
                        {"pain", "scores", "at", "day", "7"},
                        {"oral", "fluconazole"}});
  const ExampleIndex index = ExampleIndex::Build(pool.sentences, Builtin(),
                                                 pool.gold);
  EXPECT_EQ(index.size(), 4u);
  const auto results = index.QueryTopK(
      Sentence("q", {"adults", "with", "sepsis"}), Subtask::kParticipants, 3);
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(results[0].sentence_id, "tr_1");
  EXPECT_NEAR(results[0].score, 1.0, 1e-12);
  for (size_t i = 0; i < results.size(); ++i) {
    EXPECT_EQ(results[i].rank, i + 1);
    if (i > 0) {
      EXPECT_GE(results[i - 1].score, results[i].score);
    }
  }
}

TEST(ExampleIndexTest, VisibleSpansBelongToTheQueriedSubtask) {
  Pool pool = MakePool({{"a", "b", "c"}, {"d", "e"}});
  const ExampleIndex index = ExampleIndex::Build(pool.sentences, Builtin(),
                                                 pool.gold);
  for (Subtask s : kAllSubtasks) {
    for (const DynamicExample &e :
         index.QueryTopK(Sentence("q", {"a"}), s, 2)) {
      EXPECT_EQ(e.visible_spans, pool.gold.Spans(e.sentence_id, s));
      for (const Span &span : e.visible_spans) EXPECT_EQ(span.subtask, s);
    }
  }
}

TEST(ExampleIndexTest, KIsTruncatedToIndexSize) {
  Pool pool = MakePool({{"a"}, {"b"}, {"c"}, {"d"}});
  const ExampleIndex index = ExampleIndex::Build(pool.sentences, Builtin(),
                                                 pool.gold);
  EXPECT_EQ(index.QueryTopK(Sentence("q", {"z"}), Subtask::kOutcomes, 10)
                .size(),
            4u);
  EXPECT_THROW(index.QueryTopK(Sentence("q", {"z"}), Subtask::kOutcomes, 0),
               Error);
}

TEST(ExampleIndexTest, TiesBrokenBySentenceId) {
  // Zero query vector: every score is 0, so order is by id.
  Pool pool = MakePool({{"x"}, {"y"}, {"z"}});
  const ExampleIndex index = ExampleIndex::Build(pool.sentences, Builtin(),
                                                 pool.gold);
  const auto results =
      index.QueryTopK(Sentence("q", {"."}), Subtask::kParticipants, 3);
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(results[0].sentence_id, "tr_0");
  EXPECT_EQ(results[1].sentence_id, "tr_1");
  EXPECT_EQ(results[2].sentence_id, "tr_2");
}

TEST(ExampleIndexTest, BuildErrors) {
  Pool pool = MakePool({{"a"}});
  EXPECT_EQ(ExampleIndex::Build(pool.sentences, Builtin(), pool.gold).size(),
            1u);
  EXPECT_THROW(ExampleIndex::Build({}, Builtin(), pool.gold), Error);
  EXPECT_THROW(ExampleIndex::Build(pool.sentences, Builtin(), GoldLabels{}),
               Error);
  // Precomputed table without the sentence: the failure names it.
  auto empty = std::make_shared<PrecomputedEmbeddings>(
      4, std::unordered_map<std::string, EmbeddingVector>{});
  try {
    ExampleIndex::Build(pool.sentences, empty, pool.gold);
    FAIL() << "built with missing embeddings";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
    EXPECT_NE(std::string(e.what()).find("tr_0"), std::string::npos);
  }
}

// Brute force: score every entry, stable sort by (score desc, id asc).
std::vector<std::pair<std::string, double>> Exhaustive(
    const ExampleIndex &index, const EmbeddingVector &q, size_t k) {
  std::vector<std::pair<std::string, double>> all;
  for (const auto &e : index.entries()) {
    all.emplace_back(e.sentence.id(), Cosine(q, e.vector));
  }
  std::sort(all.begin(), all.end(), [](const auto &a, const auto &b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

TEST(ExampleIndexTest, AgreesWithExhaustiveScan) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const ExpertCorpus corpus = testing::SyntheticExpert(30, 5, seed);
    const auto index = testing::BuiltinIndex(corpus);
    HashedNgramEmbedder embedder;
    for (size_t i = 0; i < corpus.test.size(); i += 7) {
      const EmbeddingVector q = embedder.Embed(corpus.test[i]);
      const auto got = index->QueryTopK(q, Subtask::kInterventions, 5);
      const auto want = Exhaustive(*index, q, 5);
      ASSERT_EQ(got.size(), want.size());
      for (size_t r = 0; r < got.size(); ++r) {
        EXPECT_EQ(got[r].sentence_id, want[r].first);
        EXPECT_EQ(got[r].score, want[r].second);
      }
    }
  }
}

}  // namespace
}  // namespace dexa
