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

#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "dexa/agreement.h"
#include "dexa/aggregation.h"
#include "dexa/embedding.h"
#include "dexa/retrieval.h"
#include "dexa/simulator.h"
#include "dexa/study.h"

namespace dexa {
namespace {

// Roughly the size of the expert training set (1,636 sentences).
const ExpertCorpus &Corpus() {
  static const ExpertCorpus *corpus = [] {
    SyntheticCorpusOptions options;
    options.documents = 191;
    SyntheticCorpus c = GenerateSyntheticCorpus(options, 7);
    return new ExpertCorpus(SplitExpertSet(std::move(c.documents),
                                           std::move(c.gold), 41, 7));
  }();
  return *corpus;
}

void BM_Embed(benchmark::State &state) {
  HashedNgramEmbedder embedder;
  const Sentence &s = Corpus().test.front();
  for (auto _ : state) benchmark::DoNotOptimize(embedder.Embed(s));
}
BENCHMARK(BM_Embed);

void BM_Cosine(benchmark::State &state) {
  HashedNgramEmbedder embedder;
  const EmbeddingVector u = embedder.Embed(Corpus().test[0]);
  const EmbeddingVector v = embedder.Embed(Corpus().test[1]);
  for (auto _ : state) benchmark::DoNotOptimize(Cosine(u, v));
}
BENCHMARK(BM_Cosine);

void BM_QueryTopK(benchmark::State &state) {
  const ExpertCorpus &corpus = Corpus();
  const ExampleIndex index = ExampleIndex::Build(
      corpus.train, std::make_shared<HashedNgramEmbedder>(), corpus.gold);
  const EmbeddingVector query = index.provider().Embed(corpus.test.front());
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.QueryTopK(
        query, Subtask::kParticipants, static_cast<size_t>(state.range(0))));
  }
  state.counters["entries"] = static_cast<double>(index.size());
}
BENCHMARK(BM_QueryTopK)->Arg(3)->Arg(10);

PlantedMatrix Planted(size_t tokens) {
  const std::vector<Confusion> annotators = {SymmetricConfusion(0.05),
                                             SymmetricConfusion(0.05),
                                             SymmetricConfusion(0.45)};
  return GeneratePlantedMatrix(tokens, 0.2, annotators, 10, 11);
}

void BM_MajorityVote(benchmark::State &state) {
  const PlantedMatrix planted = Planted(static_cast<size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(MajorityVote(planted.matrix));
}
BENCHMARK(BM_MajorityVote)->Arg(5000);

void BM_DawidSkene(benchmark::State &state) {
  const PlantedMatrix planted = Planted(static_cast<size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(DawidSkene(planted.matrix));
}
BENCHMARK(BM_DawidSkene)->Arg(5000)->Arg(50000);

void BM_CohensKappa(benchmark::State &state) {
  const PlantedMatrix planted = Planted(static_cast<size_t>(state.range(0)));
  const auto &instances = planted.matrix.instances();
  std::vector<TokenLabelVector> a, b;
  for (const auto &inst : instances) {
    a.push_back({inst.sentence_id, Subtask::kParticipants, inst.votes[0].labels});
    b.push_back({inst.sentence_id, Subtask::kParticipants, inst.votes[2].labels});
  }
  for (auto _ : state) benchmark::DoNotOptimize(CohensKappa(a, b));
}
BENCHMARK(BM_CohensKappa)->Arg(5000);

void BM_SubsampledEvaluation(benchmark::State &state) {
  const PlantedMatrix planted = Planted(5000);
  GoldLabels gold;
  size_t pos = 0;
  for (const auto &inst : planted.matrix.instances()) {
    gold.AddSentence(inst.sentence_id, inst.token_count);
    std::vector<uint8_t> truth(planted.truth.begin() + pos,
                               planted.truth.begin() + pos + inst.token_count);
    for (const Span &s : TokenLabelsToSpans(
             {inst.sentence_id, Subtask::kParticipants, truth})) {
      gold.AddSpan(inst.sentence_id, s);
    }
    pos += inst.token_count;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(EvaluateSubsampled(
        planted.matrix, gold, 3, AggregationMethod::kMajorityVote, 20, 1));
  }
}
BENCHMARK(BM_SubsampledEvaluation);

}  // namespace
}  // namespace dexa

BENCHMARK_MAIN();
