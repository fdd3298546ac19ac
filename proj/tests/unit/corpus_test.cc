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

#include "dexa/corpus.h"

#include <sstream>

#include <gtest/gtest.h>

#include "dexa/error.h"
#include "dexa/random.h"

namespace dexa {
namespace {

constexpr Subtask kP = Subtask::kParticipants;

std::string Bits(std::vector<Span> spans, size_t n) {
  return SpansToTokenLabels(spans, "s", n, kP).ToBitString();
}

TEST(SpansTest, ToTokenLabels) {
  EXPECT_EQ(Bits({{kP, 2, 5}}, 8), "00111000");
  EXPECT_EQ(Bits({}, 4), "0000");
  EXPECT_EQ(Bits({{kP, 1, 3}, {kP, 2, 4}}, 5), "01110");
}

TEST(SpansTest, RejectsOutOfRangeAndForeignSubtask) {
  EXPECT_THROW(Bits({{kP, 2, 9}}, 8), Error);
  EXPECT_THROW(Bits({{kP, 3, 3}}, 8), Error);
  const std::vector<Span> other = {{Subtask::kOutcomes, 0, 1}};
  EXPECT_THROW(SpansToTokenLabels(other, "s", 4, kP), Error);
}

TEST(SpansTest, FromTokenLabels) {
  auto spans = [](std::string_view bits) {
    return TokenLabelsToSpans(TokenLabelVector::FromBitString("s", kP, bits));
  };
  EXPECT_EQ(spans("00111000"), (std::vector<Span>{{kP, 2, 5}}));
  EXPECT_TRUE(spans("00000").empty());
  EXPECT_EQ(spans("10101"),
            (std::vector<Span>{{kP, 0, 1}, {kP, 2, 3}, {kP, 4, 5}}));
  EXPECT_THROW(spans("0120"), Error);
}

TEST(SpansTest, RoundTripIsNormalization) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const size_t n = 1 + rng.Below(40);
    std::vector<Span> spans;
    for (size_t k = rng.Below(6); k > 0; --k) {
      const size_t a = rng.Below(n);
      const size_t b = a + 1 + rng.Below(n - a);
      spans.push_back({kP, a, b});
    }
    const TokenLabelVector v = SpansToTokenLabels(spans, "s", n, kP);
    const std::vector<Span> back = TokenLabelsToSpans(v);
    EXPECT_EQ(back, NormalizeSpans(spans));
    EXPECT_EQ(SpansToTokenLabels(back, "s", n, kP), v);
    for (size_t i = 1; i < back.size(); ++i) {
      EXPECT_LT(back[i - 1].end, back[i].start);
    }
  }
}

TEST(SentenceTest, RejectsEmptyTokens) {
  EXPECT_THROW(Sentence("s", {}), Error);
}

TEST(CorpusFileTest, ParsesRawAndPretokenized) {
  std::istringstream in(
      R"({"doc_id":"a","title":"T","abstract":"One two. Three."})"
      "\n\n"
      R"({"doc_id":"b","sentences":[["x","y"],["z"]]})"
      "\n");
  const std::vector<Document> docs = ParseCorpus(in);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].sentences.size(), 3u);
  EXPECT_EQ(docs[1].sentences[1].id(), "b_1");

  std::ostringstream out;
  WriteCorpus(out, docs);
  std::istringstream again(out.str());
  const std::vector<Document> reread = ParseCorpus(again);
  ASSERT_EQ(reread.size(), 2u);
  EXPECT_EQ(reread[0].sentences[2].tokens(), docs[0].sentences[2].tokens());
}

TEST(CorpusFileTest, ErrorsNameTheLine) {
  std::istringstream dup(R"({"doc_id":"a","sentences":[["x"]]})"
                         "\n"
                         R"({"doc_id":"a","sentences":[["y"]]})");
  try {
    ParseCorpus(dup);
    FAIL() << "duplicate accepted";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream broken("{not json");
  EXPECT_THROW(ParseCorpus(broken), Error);
}

std::vector<Document> TestDocuments(size_t sentences) {
  std::vector<std::vector<std::string>> s(sentences, {"a", "b", "c", "d"});
  std::vector<Document> docs;
  docs.push_back(IngestPretokenized("t", s));
  return docs;
}

TEST(GoldFileTest, LoadsEveryTestSentence) {
  const std::vector<Document> docs = TestDocuments(426);
  std::ostringstream text;
  for (const Sentence &s : docs[0].sentences) {
    text << R"({"sentence_id":")" << s.id()
         << R"(","subtask":"P","spans":[[1,3]]})" << "\n";
  }
  std::istringstream in(text.str());
  const GoldLabels gold = ParseGold(in, docs);
  EXPECT_EQ(gold.size(), 426u);
  EXPECT_EQ(gold.Labels("t_7", kP).ToBitString(), "0110");
  EXPECT_EQ(gold.Labels("t_7", Subtask::kOutcomes).ToBitString(), "0000");

  std::ostringstream out;
  WriteGold(out, gold);
  std::istringstream again(out.str());
  const GoldLabels reread = ParseGold(again, docs);
  EXPECT_EQ(reread.entries().size(), 426u);
  EXPECT_EQ(reread.Spans("t_400", kP), gold.Spans("t_400", kP));
}

TEST(GoldFileTest, UnknownSentenceRejected) {
  const std::vector<Document> docs = TestDocuments(2);
  std::istringstream in(R"({"sentence_id":"t_0","subtask":"P","spans":[]})"
                        "\n"
                        R"({"sentence_id":"zz_9","subtask":"P","spans":[]})");
  try {
    ParseGold(in, docs);
    FAIL() << "unknown sentence accepted";
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(GoldFileTest, OutOfRangeSpanRejected) {
  const std::vector<Document> docs = TestDocuments(1);
  std::istringstream in(R"({"sentence_id":"t_0","subtask":"I","spans":[[2,9]]})");
  EXPECT_THROW(ParseGold(in, docs), Error);
}

TEST(GoldFileTest, EmptyFile) {
  const std::vector<Document> docs = TestDocuments(1);
  std::istringstream in("");
  EXPECT_TRUE(ParseGold(in, docs).empty());
}

TEST(GoldLabelsTest, RestrictKeepsRequestedSentences) {
  GoldLabels gold;
  gold.AddSentence("a", 3);
  gold.AddSentence("b", 2);
  gold.AddSpan("b", {Subtask::kInterventions, 0, 2});
  const std::vector<std::string> ids = {"b", "missing"};
  const GoldLabels sub = gold.Restrict(ids);
  EXPECT_EQ(sub.size(), 1u);
  EXPECT_TRUE(sub.Contains("b"));
  EXPECT_THROW(gold.AddSentence("a", 4), Error);
}

TEST(SubtaskTest, NamesRoundTrip) {
  for (Subtask s : kAllSubtasks) EXPECT_EQ(ParseSubtask(SubtaskName(s)), s);
  EXPECT_EQ(ParseSubtaskList("O,P"),
            (std::vector<Subtask>{kP, Subtask::kOutcomes}));
  EXPECT_EQ(ParseSubtaskList("PIO").size(), 3u);
  EXPECT_THROW(ParseSubtask("X"), Error);
}

}  // namespace
}  // namespace dexa
