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

#ifndef DEXA_SIMULATOR_H_
#define DEXA_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dexa/aggregation.h"
#include "dexa/annotation.h"
#include "dexa/corpus.h"
#include "dexa/embedding.h"
#include "dexa/random.h"
#include "dexa/study.h"

namespace dexa {

enum class NoiseKind {
  kConfusionMatrix,
  kGoldReplay,
  kAdversarial,
  kFeedbackCoupled,
};

// Synthetic annotator behaviour. Each emitted token label is drawn from the
// confusion row of the token's gold class. The usefulness flag is drawn
// once per sentence with probability `useful_probability`; feedback-coupled
// workers then label with useful_confusion or not_useful_confusion
// depending on the flag.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kGoldReplay;
  Confusion confusion = {{{1.0, 0.0}, {0.0, 1.0}}};
  Confusion useful_confusion = {{{1.0, 0.0}, {0.0, 1.0}}};
  Confusion not_useful_confusion = {{{1.0, 0.0}, {0.0, 1.0}}};
  double useful_probability = 1.0;
  uint64_t seed = 0;

  static NoiseModel GoldReplay(uint64_t seed = 0);
  static NoiseModel Adversarial(uint64_t seed = 0);
  static NoiseModel SymmetricFlip(double flip, uint64_t seed = 0);
  static NoiseModel WithConfusion(const Confusion &confusion,
                                  uint64_t seed = 0);
  static NoiseModel FeedbackCoupled(double useful_flip,
                                    double not_useful_flip,
                                    double useful_probability,
                                    uint64_t seed = 0);

  // Throws kInvalidArgument unless every confusion row is a probability
  // distribution (within 1e-9) and useful_probability is in [0, 1].
  void Validate() const;
};

// Parses "replay", "adversarial", "flip:<p>" or
// "feedback:<useful_flip>,<not_useful_flip>,<useful_probability>".
NoiseModel ParseNoiseModel(std::string_view spec, uint64_t seed = 0);

Confusion SymmetricConfusion(double flip);

struct SimulatedAnnotation {
  TokenLabelVector labels;
  bool feedback_useful = true;
};

// Stateful annotator; successive calls continue one random stream.
class SimulatedAnnotator {
 public:
  explicit SimulatedAnnotator(NoiseModel model);
  SimulatedAnnotator(NoiseModel model, uint64_t stream_seed);

  SimulatedAnnotation Annotate(const TokenLabelVector &gold);
  const NoiseModel &model() const { return model_; }

 private:
  NoiseModel model_;
  Rng rng_;
};

// One-shot annotation seeded by model.seed.
SimulatedAnnotation SimulateWorker(const TokenLabelVector &gold,
                                   const NoiseModel &model);

// Drives a study to completion with synthetic workers: each worker is
// registered (approval 1.0), takes the test run, and then workers take
// turns requesting and submitting HITs until no sub-task has eligible
// work. Unlabeled sentences are not used. Throws kInvalidArgument when
// there are fewer workers than the redundancy and kFailedPrecondition when
// fewer than that pass qualification for some sub-task.
std::vector<AnnotationRecord> RunSyntheticStudy(
    const ExpertCorpus &corpus, const StudyConfig &config,
    std::span<const NoiseModel> workers, uint64_t seed,
    std::shared_ptr<const EmbeddingProvider> provider = nullptr);

struct SyntheticCorpusOptions {
  size_t documents = 191;
  size_t min_sentences = 8;
  size_t max_sentences = 13;
  size_t min_tokens = 6;
  size_t max_tokens = 30;
  size_t vocabulary = 400;
  // Probability that a sentence has at least one span for a sub-task.
  double span_probability = 0.6;
  size_t max_span_length = 5;
};

struct SyntheticCorpus {
  std::vector<Document> documents;
  GoldLabels gold;
};

// Random documents with pseudo-words and gold spans for all sub-tasks.
SyntheticCorpus GenerateSyntheticCorpus(const SyntheticCorpusOptions &options,
                                        uint64_t seed);

struct PlantedMatrix {
  LabelMatrix matrix{Subtask::kParticipants};
  std::vector<uint8_t> truth;  // instance-major, like DS posteriors
  std::vector<Confusion> confusion;
  double prior1 = 0.0;
};

// `tokens` independent tokens with P(class 1) = prior1, grouped into
// sentences of `tokens_per_instance`; every annotator labels every token
// through its confusion matrix.
PlantedMatrix GeneratePlantedMatrix(size_t tokens, double prior1,
                                    std::span<const Confusion> annotators,
                                    size_t tokens_per_instance,
                                    uint64_t seed);

}  // namespace dexa

#endif  // DEXA_SIMULATOR_H_
