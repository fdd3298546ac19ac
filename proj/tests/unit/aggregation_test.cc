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

#include "dexa/aggregation.h"

#include <cmath>

#include <gtest/gtest.h>

#include "dexa/error.h"
#include "dexa/simulator.h"
#include "test_util.h"

namespace dexa {
namespace {

constexpr Subtask kP = Subtask::kParticipants;

LabelMatrix Votes(const std::vector<std::vector<uint8_t>> &per_annotator) {
  LabelMatrix m(kP);
  for (size_t a = 0; a < per_annotator.size(); ++a) {
    m.AddVote("s", m.AddAnnotator("a" + std::to_string(a)), per_annotator[a]);
  }
  return m;
}

TEST(MajorityVoteTest, Examples) {
  EXPECT_EQ(MajorityVote(Votes({{1}, {1}, {0}})).labels[0].labels,
            std::vector<uint8_t>{1});
  EXPECT_EQ(MajorityVote(Votes({{0}, {0}, {0}})).labels[0].labels,
            std::vector<uint8_t>{0});
  EXPECT_EQ(MajorityVote(Votes({{1}, {0}})).labels[0].labels,
            std::vector<uint8_t>{0});
  const AggregatedLabels mv = MajorityVote(Votes({{1, 0, 1}, {1, 1, 0}}));
  EXPECT_EQ(mv.labels[0].labels, (std::vector<uint8_t>{1, 0, 0}));
  EXPECT_EQ(mv.n_used, std::vector<size_t>{2});
  EXPECT_THROW(MajorityVote(LabelMatrix(kP)), Error);
}

TEST(LabelMatrixTest, FromRecords) {
  GoldLabels gold;
  gold.AddSentence("a", 4);
  gold.AddSentence("b", 2);
  const std::vector<AnnotationRecord> records = {
      {"h1", "w1", "a", kP, {{kP, 0, 2}}, true, 0},
      {"h2", "w2", "a", kP, {}, true, 0},
      {"h3", "w1", "a", kP, {{kP, 3, 4}}, true, 0},  // repeat: ignored
      {"h4", "w2", "b", kP, {{kP, 1, 2}}, true, 0},
      {"h5", "w3", "zz", kP, {}, true, 0},  // not in gold: skipped
      {"h6", "w3", "b", Subtask::kOutcomes, {}, true, 0},
  };
  const LabelMatrix m = LabelMatrix::FromRecords(records, kP, gold);
  ASSERT_EQ(m.instances().size(), 2u);
  EXPECT_EQ(m.token_count(), 6u);
  EXPECT_EQ(m.vote_count(), 3u);
  EXPECT_EQ(m.instances()[0].votes[0].labels,
            (std::vector<uint8_t>{1, 1, 0, 0}));
  EXPECT_EQ(m.VotesPerAnnotator(), (std::vector<size_t>{1, 2}));

  LabelMatrix direct(kP);
  const size_t col = direct.AddAnnotator("x");
  direct.AddVote("s", col, {1, 0});
  EXPECT_THROW(direct.AddVote("s", col, {1, 0}), Error);
  EXPECT_THROW(direct.AddVote("s", direct.AddAnnotator("y"), {1}), Error);
}

LabelMatrix LoadReferenceMatrix(const nlohmann::json &ref) {
  LabelMatrix m(kP);
  for (const auto &name : ref["annotators"]) m.AddAnnotator(name);
  for (const auto &inst : ref["instances"]) {
    for (const auto &v : inst["votes"]) {
      m.AddVote(inst["sentence_id"], v["annotator"].get<size_t>(),
                v["labels"].get<std::vector<uint8_t>>());
    }
  }
  return m;
}

TEST(DawidSkeneTest, MatchesReferenceImplementation) {
  const nlohmann::json ref = testing::LoadJson("ds_reference.json");
  const LabelMatrix m = LoadReferenceMatrix(ref);
  DawidSkeneOptions options;
  options.smoothing = ref["smoothing"];
  options.tol = ref["tol"];
  options.max_iters = ref["max_iters"];
  const DawidSkeneResult r = DawidSkene(m, options);
  const DawidSkeneModel &model = r.model;

  EXPECT_EQ(model.iterations_run, ref["iterations"].get<size_t>());
  EXPECT_EQ(model.converged, ref["converged"].get<bool>());
  EXPECT_NEAR(model.class_priors[1], ref["class_priors"][1], 1e-9);
  ASSERT_EQ(model.confusion.size(), 5u);
  for (size_t a = 0; a < 5; ++a) {
    for (size_t c = 0; c < 2; ++c) {
      for (size_t l = 0; l < 2; ++l) {
        EXPECT_NEAR(model.confusion[a][c][l], ref["confusion"][a][c][l], 1e-9);
      }
    }
  }
  ASSERT_EQ(model.posteriors.size(), ref["posteriors"].size());
  for (size_t g = 0; g < model.posteriors.size(); ++g) {
    EXPECT_NEAR(model.posteriors[g], ref["posteriors"][g], 1e-9);
  }
  ASSERT_EQ(model.log_likelihood.size(), ref["log_likelihood"].size());
  for (size_t i = 0; i < model.log_likelihood.size(); ++i) {
    EXPECT_NEAR(model.log_likelihood[i], ref["log_likelihood"][i], 1e-7);
  }
  size_t g = 0;
  for (const TokenLabelVector &v : r.labels.labels) {
    for (uint8_t l : v.labels) EXPECT_EQ(l, ref["labels"][g++].get<int>());
  }
}

TEST(DawidSkeneTest, ParametersAreDistributions) {
  const LabelMatrix m = LoadReferenceMatrix(testing::LoadJson("ds_reference.json"));
  const DawidSkeneModel model = DawidSkene(m).model;
  EXPECT_NEAR(model.class_priors[0] + model.class_priors[1], 1.0, 1e-12);
  for (const Confusion &c : model.confusion) {
    for (const auto &row : c) {
      EXPECT_NEAR(row[0] + row[1], 1.0, 1e-12);
      EXPECT_GT(row[0], 0.0);
      EXPECT_GT(row[1], 0.0);
    }
  }
  for (size_t i = 1; i < model.log_likelihood.size(); ++i) {
    EXPECT_GE(model.log_likelihood[i], model.log_likelihood[i - 1] - 1e-9);
  }
  EXPECT_NEAR(model.log_likelihood.back(),
              DawidSkeneLogLikelihood(m, model.class_priors, model.confusion),
              1e-6);
}

TEST(DawidSkeneTest, UnanimousAnnotators) {
  const std::vector<uint8_t> labels = {1, 0, 0, 1, 1, 0, 0, 0};
  const DawidSkeneResult r = DawidSkene(Votes({labels, labels, labels}));
  EXPECT_EQ(r.labels.labels[0].labels, labels);
  for (const Confusion &c : r.model.confusion) {
    EXPECT_GT(c[0][0], 0.95);
    EXPECT_GT(c[1][1], 0.95);
  }
}

TEST(DawidSkeneTest, SingleAnnotatorIsAFixedPoint) {
  const std::vector<uint8_t> labels = {0, 1, 1, 0, 1, 0, 0};
  const DawidSkeneResult r = DawidSkene(Votes({labels}));
  EXPECT_EQ(r.labels.labels[0].labels, labels);
}

TEST(DawidSkeneTest, EmptyColumnRejected) {
  LabelMatrix m = Votes({{1, 0}});
  m.AddAnnotator("idle");
  EXPECT_THROW(DawidSkene(m), Error);
  EXPECT_THROW(DawidSkene(LabelMatrix(kP)), Error);
}

// Bayes-optimal decision under the planted parameters.
std::vector<uint8_t> BayesLabels(const PlantedMatrix &p) {
  std::vector<uint8_t> out;
  for (const auto &inst : p.matrix.instances()) {
    for (size_t t = 0; t < inst.token_count; ++t) {
      double l0 = std::log(1 - p.prior1), l1 = std::log(p.prior1);
      for (const auto &v : inst.votes) {
        l0 += std::log(p.confusion[v.annotator][0][v.labels[t]]);
        l1 += std::log(p.confusion[v.annotator][1][v.labels[t]]);
      }
      out.push_back(l1 > l0);
    }
  }
  return out;
}

TEST(DawidSkeneTest, RecoversPlantedAnnotators) {
  const std::vector<Confusion> planted = {SymmetricConfusion(0.05),
                                          SymmetricConfusion(0.05),
                                          SymmetricConfusion(0.45)};
  const PlantedMatrix p = GeneratePlantedMatrix(5000, 0.2, planted, 10, 42);
  const DawidSkeneResult r = DawidSkene(p.matrix);
  const std::vector<uint8_t> bayes = BayesLabels(p);
  size_t agree_bayes = 0, correct = 0, bayes_correct = 0, g = 0;
  for (const TokenLabelVector &v : r.labels.labels) {
    for (uint8_t l : v.labels) {
      agree_bayes += l == bayes[g];
      correct += l == p.truth[g];
      bayes_correct += bayes[g] == p.truth[g];
      ++g;
    }
  }
  ASSERT_EQ(g, 5000u);
  // No estimator beats the Bayes decision; DS should essentially match it.
  EXPECT_GE(agree_bayes, 4950u);
  EXPECT_NEAR(static_cast<double>(correct) / g,
              static_cast<double>(bayes_correct) / g, 0.01);
  for (size_t a = 0; a < 3; ++a) {
    for (size_t c = 0; c < 2; ++c) {
      for (size_t l = 0; l < 2; ++l) {
        EXPECT_NEAR(r.model.confusion[a][c][l], planted[a][c][l], 0.05);
      }
    }
  }
}

TEST(SubsampleTest, Properties) {
  LabelMatrix m(kP);
  for (int a = 0; a < 11; ++a) m.AddAnnotator("a" + std::to_string(a));
  for (int s = 0; s < 20; ++s) {
    for (size_t a = 0; a < 11; ++a) {
      m.AddVote("s" + std::to_string(s), a, {uint8_t(a % 2), 1});
    }
  }
  const LabelMatrix three = SubsampleAnnotations(m, 3, 9);
  for (const auto &inst : three.instances()) EXPECT_EQ(inst.votes.size(), 3u);
  const LabelMatrix again = SubsampleAnnotations(m, 3, 9);
  for (size_t i = 0; i < three.instances().size(); ++i) {
    ASSERT_EQ(three.instances()[i].votes.size(),
              again.instances()[i].votes.size());
    for (size_t v = 0; v < 3; ++v) {
      EXPECT_EQ(three.instances()[i].votes[v].annotator,
                again.instances()[i].votes[v].annotator);
    }
  }
  const LabelMatrix other = SubsampleAnnotations(m, 3, 10);
  bool differs = false;
  for (size_t i = 0; i < other.instances().size(); ++i) {
    for (size_t v = 0; v < 3; ++v) {
      differs |= three.annotators()[three.instances()[i].votes[v].annotator] !=
                 other.annotators()[other.instances()[i].votes[v].annotator];
    }
  }
  EXPECT_TRUE(differs);

  for (size_t n : {size_t{11}, size_t{50}, kAllAnnotations}) {
    const LabelMatrix all = SubsampleAnnotations(m, n, 1);
    EXPECT_EQ(all.annotators(), m.annotators());
    EXPECT_EQ(all.vote_count(), m.vote_count());
  }
  EXPECT_THROW(SubsampleAnnotations(m, 0, 1), Error);
}

TEST(SubsampleTest, DropsUnusedAnnotatorColumns) {
  LabelMatrix m(kP);
  m.AddVote("s0", m.AddAnnotator("a"), {1});
  m.AddVote("s0", m.AddAnnotator("b"), {0});
  const LabelMatrix one = SubsampleAnnotations(m, 1, 3);
  EXPECT_EQ(one.annotators().size(), 1u);
  // DS must still run on the compacted matrix.
  EXPECT_NO_THROW(DawidSkene(one));
}

}  // namespace
}  // namespace dexa
