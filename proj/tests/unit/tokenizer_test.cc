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

#include <gtest/gtest.h>

#include "dexa/corpus.h"
#include "dexa/error.h"
#include "test_util.h"

namespace dexa {
namespace {

TEST(TokenizerTest, PeelsBracketsAndTerminals) {
  EXPECT_EQ(Tokenize("Patients (n=110) received fluconazole."),
            (std::vector<std::string>{"Patients", "(", "n=110", ")",
                                      "received", "fluconazole", "."}));
  EXPECT_EQ(Tokenize("\"(3.5%),\""),
            (std::vector<std::string>{"\"", "(", "3.5%", ")", ",", "\""}));
  EXPECT_TRUE(Tokenize("   \t\n").empty());
}

TEST(TokenizerTest, RangesPointIntoInput) {
  const std::string text = "  dose: 400 mg/day.";
  const std::vector<TextRange> ranges = TokenizeRanges(text);
  const std::vector<std::string> tokens = Tokenize(text);
  ASSERT_EQ(ranges.size(), tokens.size());
  for (size_t i = 0; i < ranges.size(); ++i) {
    EXPECT_EQ(text.substr(ranges[i].begin, ranges[i].end - ranges[i].begin),
              tokens[i]);
  }
}

TEST(SegmenterTest, RuleBasedSplitsOnTerminals) {
  const std::string text = "Pain was reduced. No adverse events.";
  const auto ranges = SegmentSentences(text);
  ASSERT_EQ(ranges.size(), 2u);
  EXPECT_EQ(text.substr(ranges[0].begin, ranges[0].end - ranges[0].begin),
            "Pain was reduced.");
  EXPECT_EQ(text.substr(ranges[1].begin, ranges[1].end - ranges[1].begin),
            "No adverse events.");
}

TEST(SegmenterTest, LowercaseContinuationDoesNotSplit) {
  EXPECT_EQ(SegmentSentences("Seen in approx. ten cases. Done").size(), 2u);
}

TEST(SegmenterTest, LinePolicy) {
  const auto ranges =
      SegmentSentences("first line. still first\n\n  second\n",
                       SegmentationPolicy::kLines);
  ASSERT_EQ(ranges.size(), 2u);
}

TEST(IngestTest, GoldenDocuments) {
  const nlohmann::json golden = testing::LoadJson("tokenizer_golden.json");
  ASSERT_FALSE(golden.empty());
  for (const auto &doc : golden) {
    const Document d =
        IngestDocument(doc["doc_id"], doc["title"], doc["abstract"]);
    ASSERT_EQ(d.sentences.size(), doc["sentences"].size()) << doc["doc_id"];
    for (size_t i = 0; i < d.sentences.size(); ++i) {
      const auto &want = doc["sentences"][i];
      const Sentence &got = d.sentences[i];
      EXPECT_EQ(got.id(), want["sentence_id"].get<std::string>());
      EXPECT_EQ(got.tokens(), want["tokens"].get<std::vector<std::string>>());
      ASSERT_EQ(got.char_offsets().size(), want["offsets"].size());
      for (size_t t = 0; t < got.size(); ++t) {
        EXPECT_EQ(got.char_offsets()[t].begin, want["offsets"][t][0]);
        EXPECT_EQ(got.char_offsets()[t].end, want["offsets"][t][1]);
      }
    }
  }
}

TEST(IngestTest, OffsetsCoverTitleAndAbstract) {
  const Document d = IngestDocument("d9", "Short title", "One. Two.");
  const std::string source = d.title + "\n" + d.abstract;
  for (const Sentence &s : d.sentences) {
    for (size_t t = 0; t < s.size(); ++t) {
      const TextRange r = s.char_offsets()[t];
      EXPECT_EQ(source.substr(r.begin, r.end - r.begin), s.tokens()[t]);
    }
  }
  EXPECT_EQ(d.sentences.front().tokens(),
            (std::vector<std::string>{"Short", "title"}));
}

TEST(IngestTest, Deterministic) {
  const std::string abstract =
      "Children (aged 6-12) were enrolled. Outcomes: pain; fever!";
  const Document a = IngestDocument("x", "", abstract);
  const Document b = IngestDocument("x", "", abstract);
  ASSERT_EQ(a.sentences.size(), b.sentences.size());
  for (size_t i = 0; i < a.sentences.size(); ++i) {
    EXPECT_EQ(a.sentences[i].tokens(), b.sentences[i].tokens());
  }
}

TEST(IngestTest, EmptyInputRejected) {
  EXPECT_THROW(IngestDocument("d1", "", ""), Error);
  EXPECT_THROW(IngestDocument("d1", "  ", "\n"), Error);
}

}  // namespace
}  // namespace dexa
