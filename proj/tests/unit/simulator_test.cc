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

#include "dexa/simulator.h"

#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "dexa/error.h"
#include "test_util.h"

namespace dexa {
namespace {

constexpr Subtask kO = Subtask::kOutcomes;

TokenLabelVector RandomGold(size_t n, uint64_t seed) {
  Rng rng(seed);
  TokenLabelVector v{"s", kO, std::vector<uint8_t>(n)};
  for (uint8_t &l : v.labels) l = rng.Bernoulli(0.3);
  return v;
}

TEST(SimulatedAnnotatorTest, ReplayAndAdversarial) {
  const TokenLabelVector gold = RandomGold(300, 1);
  EXPECT_EQ(SimulateWorker(gold, NoiseModel::GoldReplay()).labels, gold);
  const TokenLabelVector flipped =
      SimulateWorker(gold, NoiseModel::Adversarial()).labels;
  for (size_t i = 0; i < gold.size(); ++i) {
    EXPECT_EQ(flipped.labels[i], 1 - gold.labels[i]);
  }
}

TEST(SimulatedAnnotatorTest, FlipRate) {
  const TokenLabelVector gold = RandomGold(10000, 2);
  const TokenLabelVector noisy =
      SimulateWorker(gold, NoiseModel::SymmetricFlip(0.1, 7)).labels;
  size_t diff = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    diff += noisy.labels[i] != gold.labels[i];
  }
  EXPECT_NEAR(diff / 10000.0, 0.1, 0.01);
}

TEST(SimulatedAnnotatorTest, DeterministicUnderSeed) {
  const TokenLabelVector gold = RandomGold(500, 3);
  const NoiseModel m = NoiseModel::SymmetricFlip(0.3, 99);
  EXPECT_EQ(SimulateWorker(gold, m).labels, SimulateWorker(gold, m).labels);
  EXPECT_NE(SimulateWorker(gold, m).labels,
            SimulateWorker(gold, NoiseModel::SymmetricFlip(0.3, 98)).labels);
}

TEST(SimulatedAnnotatorTest, FeedbackFlagFrequency) {
  SimulatedAnnotator a(NoiseModel::FeedbackCoupled(0.05, 0.3, 0.7), 5);
  const TokenLabelVector gold = RandomGold(5, 4);
  int useful = 0;
  for (int i = 0; i < 5000; ++i) useful += a.Annotate(gold).feedback_useful;
  EXPECT_NEAR(useful / 5000.0, 0.7, 0.02);
}

TEST(NoiseModelTest, ParseAndValidate) {
  EXPECT_EQ(ParseNoiseModel("replay").kind, NoiseKind::kGoldReplay);
  EXPECT_EQ(ParseNoiseModel("adversarial").kind, NoiseKind::kAdversarial);
  const NoiseModel flip = ParseNoiseModel("flip:0.25", 3);
  EXPECT_EQ(flip.kind, NoiseKind::kConfusionMatrix);
  EXPECT_DOUBLE_EQ(flip.confusion[0][1], 0.25);
  EXPECT_EQ(flip.seed, 3u);
  const NoiseModel fb = ParseNoiseModel("feedback:0.05,0.3,0.7");
  EXPECT_DOUBLE_EQ(fb.not_useful_confusion[1][0], 0.3);
  EXPECT_DOUBLE_EQ(fb.useful_probability, 0.7);
  EXPECT_THROW(ParseNoiseModel("flip:1.5"), Error);
  EXPECT_THROW(ParseNoiseModel("flip:x"), Error);
  EXPECT_THROW(ParseNoiseModel("feedback:0.1,0.2"), Error);
  EXPECT_THROW(ParseNoiseModel("oracle"), Error);
}

TEST(SyntheticCorpusTest, Shape) {
  SyntheticCorpusOptions options;
  options.documents = 25;
  const SyntheticCorpus c = GenerateSyntheticCorpus(options, 12);
  ASSERT_EQ(c.documents.size(), 25u);
  size_t sentences = 0;
  for (const Document &d : c.documents) {
    EXPECT_GE(d.sentences.size(), options.min_sentences);
    EXPECT_LE(d.sentences.size(), options.max_sentences);
    for (const Sentence &s : d.sentences) {
      EXPECT_GE(s.size(), options.min_tokens);
      EXPECT_LE(s.size(), options.max_tokens);
      EXPECT_TRUE(c.gold.Contains(s.id()));
      ++sentences;
    }
  }
  EXPECT_EQ(c.gold.size(), sentences);
  const SyntheticCorpus again = GenerateSyntheticCorpus(options, 12);
  EXPECT_EQ(again.documents[7].sentences[0].tokens(),
            c.documents[7].sentences[0].tokens());
}

TEST(PlantedMatrixTest, Shape) {
  const std::vector<Confusion> conf = {SymmetricConfusion(0.1),
                                       SymmetricConfusion(0.2)};
  const PlantedMatrix p = GeneratePlantedMatrix(95, 0.2, conf, 10, 1);
  EXPECT_EQ(p.truth.size(), 95u);
  EXPECT_EQ(p.matrix.token_count(), 95u);
  EXPECT_EQ(p.matrix.instances().size(), 10u);
  EXPECT_EQ(p.matrix.annotators().size(), 2u);
}

std::string Dump(const std::vector<AnnotationRecord> &records) {
  std::ostringstream out;
  WriteAnnotationDump(out, records);
  return out.str();
}

TEST(RunSyntheticStudyTest, ReplayWorkersReproduceGold) {
  const ExpertCorpus corpus = testing::SyntheticExpert(24, 5, 6);
  const std::vector<NoiseModel> workers(3, NoiseModel::GoldReplay());
  const std::vector<AnnotationRecord> records =
      RunSyntheticStudy(corpus, {}, workers, 1);
  EXPECT_EQ(records.size(), corpus.test.size() * 3 * 3);
  std::map<std::pair<std::string, Subtask>, int> per_item;
  for (const AnnotationRecord &r : records) {
    ++per_item[{r.sentence_id, r.subtask}];
    EXPECT_EQ(r.spans, corpus.gold.Spans(r.sentence_id, r.subtask));
  }
  EXPECT_EQ(per_item.size(), corpus.test.size() * 3);
  for (const auto &[key, n] : per_item) EXPECT_EQ(n, 3);
}

TEST(RunSyntheticStudyTest, DeterministicDump) {
  const ExpertCorpus corpus = testing::SyntheticExpert(20, 4, 8);
  const std::vector<NoiseModel> workers = {
      NoiseModel::SymmetricFlip(0.05, 1), NoiseModel::SymmetricFlip(0.1, 2),
      NoiseModel::GoldReplay(), NoiseModel::FeedbackCoupled(0.05, 0.2, 0.7, 4)};
  // Noisy workers must not fail the five-sentence test run.
  StudyConfig config;
  config.qualification_threshold = 0.0;
  const std::string a = Dump(RunSyntheticStudy(corpus, config, workers, 5));
  const std::string b = Dump(RunSyntheticStudy(corpus, config, workers, 5));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, Dump(RunSyntheticStudy(corpus, config, workers, 6)));
}

TEST(RunSyntheticStudyTest, NotEnoughWorkers) {
  const ExpertCorpus corpus = testing::SyntheticExpert(12, 3, 2);
  const std::vector<NoiseModel> two(2, NoiseModel::GoldReplay());
  try {
    RunSyntheticStudy(corpus, {}, two, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  const std::vector<NoiseModel> bad = {NoiseModel::GoldReplay(),
                                       NoiseModel::GoldReplay(),
                                       NoiseModel::Adversarial()};
  try {
    RunSyntheticStudy(corpus, {}, bad, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kFailedPrecondition);
  }
}

}  // namespace
}  // namespace dexa
