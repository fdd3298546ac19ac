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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

#include "dexa/error.h"
#include "dexa/retrieval.h"

namespace dexa {

Confusion SymmetricConfusion(double flip) {
  return {{{1.0 - flip, flip}, {flip, 1.0 - flip}}};
}

NoiseModel NoiseModel::GoldReplay(uint64_t seed) {
  NoiseModel m;
  m.kind = NoiseKind::kGoldReplay;
  m.seed = seed;
  return m;
}

NoiseModel NoiseModel::Adversarial(uint64_t seed) {
  NoiseModel m;
  m.kind = NoiseKind::kAdversarial;
  m.confusion = SymmetricConfusion(1.0);
  m.seed = seed;
  return m;
}

NoiseModel NoiseModel::SymmetricFlip(double flip, uint64_t seed) {
  return WithConfusion(SymmetricConfusion(flip), seed);
}

NoiseModel NoiseModel::WithConfusion(const Confusion &confusion,
                                     uint64_t seed) {
  NoiseModel m;
  m.kind = NoiseKind::kConfusionMatrix;
  m.confusion = confusion;
  m.seed = seed;
  return m;
}

NoiseModel NoiseModel::FeedbackCoupled(double useful_flip,
                                       double not_useful_flip,
                                       double useful_probability,
                                       uint64_t seed) {
  NoiseModel m;
  m.kind = NoiseKind::kFeedbackCoupled;
  m.useful_confusion = SymmetricConfusion(useful_flip);
  m.not_useful_confusion = SymmetricConfusion(not_useful_flip);
  m.useful_probability = useful_probability;
  m.seed = seed;
  return m;
}

void NoiseModel::Validate() const {
  auto check = [](const Confusion &c, const char *name) {
    for (const auto &row : c) {
      if (row[0] < 0.0 || row[1] < 0.0 ||
          std::abs(row[0] + row[1] - 1.0) > 1e-9) {
        Fail(ErrorCode::kInvalidArgument,
             std::string(name) + " rows must be probability distributions");
      }
    }
  };
  check(confusion, "confusion");
  check(useful_confusion, "useful_confusion");
  check(not_useful_confusion, "not_useful_confusion");
  if (!(useful_probability >= 0.0 && useful_probability <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "useful_probability must be in [0, 1]");
  }
}

NoiseModel ParseNoiseModel(std::string_view spec, uint64_t seed) {
  auto number = [&](std::string_view text) {
    std::string s(text);
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
      Fail(ErrorCode::kInvalidArgument,
           "bad number '" + s + "' in worker spec '" + std::string(spec) +
               "'");
    }
    return v;
  };
  NoiseModel m;
  if (spec == "replay") {
    m = NoiseModel::GoldReplay(seed);
  } else if (spec == "adversarial") {
    m = NoiseModel::Adversarial(seed);
  } else if (spec.starts_with("flip:")) {
    m = NoiseModel::SymmetricFlip(number(spec.substr(5)), seed);
  } else if (spec.starts_with("feedback:")) {
    std::string_view rest = spec.substr(9);
    std::vector<double> parts;
    while (true) {
      const size_t comma = rest.find(',');
      parts.push_back(number(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (parts.size() != 3) {
      Fail(ErrorCode::kInvalidArgument,
           "feedback worker spec needs three numbers: " + std::string(spec));
    }
    m = NoiseModel::FeedbackCoupled(parts[0], parts[1], parts[2], seed);
  } else {
    Fail(ErrorCode::kInvalidArgument,
         "unknown worker spec '" + std::string(spec) + "'");
  }
  m.Validate();
  return m;
}

SimulatedAnnotator::SimulatedAnnotator(NoiseModel model)
    : SimulatedAnnotator(model, model.seed) {}

SimulatedAnnotator::SimulatedAnnotator(NoiseModel model, uint64_t stream_seed)
    : model_(std::move(model)), rng_(stream_seed) {
  model_.Validate();
}

SimulatedAnnotation SimulatedAnnotator::Annotate(const TokenLabelVector &gold) {
  SimulatedAnnotation out;
  out.labels = gold;
  out.feedback_useful = rng_.Bernoulli(model_.useful_probability);
  const Confusion *confusion = nullptr;
  switch (model_.kind) {
    case NoiseKind::kGoldReplay:
      return out;
    case NoiseKind::kAdversarial:
      for (uint8_t &l : out.labels.labels) l = !l;
      return out;
    case NoiseKind::kConfusionMatrix:
      confusion = &model_.confusion;
      break;
    case NoiseKind::kFeedbackCoupled:
      confusion = out.feedback_useful ? &model_.useful_confusion
                                      : &model_.not_useful_confusion;
      break;
  }
  for (uint8_t &l : out.labels.labels) {
    l = rng_.Bernoulli((*confusion)[l][1]) ? 1 : 0;
  }
  return out;
}

SimulatedAnnotation SimulateWorker(const TokenLabelVector &gold,
                                   const NoiseModel &model) {
  return SimulatedAnnotator(model).Annotate(gold);
}

std::vector<AnnotationRecord> RunSyntheticStudy(
    const ExpertCorpus &corpus, const StudyConfig &config,
    std::span<const NoiseModel> workers, uint64_t seed,
    std::shared_ptr<const EmbeddingProvider> provider) {
  config.Validate();
  if (workers.size() < config.redundancy) {
    Fail(ErrorCode::kInvalidArgument,
         "need at least " + std::to_string(config.redundancy) +
             " workers for redundancy " + std::to_string(config.redundancy) +
             ", got " + std::to_string(workers.size()));
  }
  if (provider == nullptr) provider = std::make_shared<HashedNgramEmbedder>();
  auto index = std::make_shared<const ExampleIndex>(
      ExampleIndex::Build(corpus.train, provider, corpus.gold));

  auto now = std::make_shared<Timestamp>(1'700'000'000'000);
  Study study(corpus, {}, config, index, [now] { return *now += 1000; });

  std::vector<std::string> ids;
  std::vector<SimulatedAnnotator> annotators;
  for (size_t i = 0; i < workers.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "sim-%03zu", i + 1);
    ids.push_back(id);
    annotators.emplace_back(workers[i],
                            Rng::Derive(seed ^ workers[i].seed, i));
    study.RegisterWorker(ids.back(), 1.0);
  }

  const std::vector<Sentence> testrun = study.TestRunSentences();
  std::array<size_t, 3> qualified = {0, 0, 0};
  for (size_t i = 0; i < workers.size(); ++i) {
    std::vector<AnnotationRecord> records;
    for (Subtask s : study.config().subtasks) {
      for (const Sentence &sentence : testrun) {
        SimulatedAnnotation a =
            annotators[i].Annotate(corpus.gold.Labels(sentence.id(), s));
        records.push_back({"", ids[i], sentence.id(), s,
                           TokenLabelsToSpans(a.labels), a.feedback_useful,
                           0});
      }
    }
    QualificationResult q = study.SubmitTestRun(ids[i], std::move(records));
    for (Subtask s : study.config().subtasks) {
      qualified[SubtaskIndex(s)] += q.profile.IsQualified(s);
    }
  }
  for (Subtask s : study.config().subtasks) {
    if (qualified[SubtaskIndex(s)] < config.redundancy) {
      Fail(ErrorCode::kFailedPrecondition,
           "only " + std::to_string(qualified[SubtaskIndex(s)]) +
               " workers qualified for subtask " +
               std::string(SubtaskName(s)));
    }
  }

  bool progress = true;
  while (progress) {
    progress = false;
    for (size_t i = 0; i < workers.size(); ++i) {
      for (Subtask s : study.config().subtasks) {
        if (!study.FindWorker(ids[i])->IsQualified(s)) continue;
        std::optional<Hit> hit = study.NextHit(ids[i], s);
        if (!hit) continue;
        SimulatedAnnotation a =
            annotators[i].Annotate(corpus.gold.Labels(hit->sentence.id(), s));
        AnnotationRecord record;
        record.hit_id = hit->hit_id;
        record.worker_id = ids[i];
        record.spans = TokenLabelsToSpans(a.labels);
        record.feedback_useful = a.feedback_useful;
        study.SubmitAnnotation(record);
        progress = true;
      }
    }
  }
  return study.Annotations();
}

namespace {

const char *const kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "ta", "vi",
                                  "so", "pe", "du", "ga", "xo", "li", "ber",
                                  "tin", "mab", "cor", "ex", "ul", "ph"};

std::string PseudoWord(size_t index) {
  constexpr size_t kBase = sizeof(kSyllables) / sizeof(kSyllables[0]);
  std::string word;
  size_t x = index + kBase;
  while (x > 0) {
    word += kSyllables[x % kBase];
    x /= kBase;
  }
  return word;
}

}  // namespace

SyntheticCorpus GenerateSyntheticCorpus(const SyntheticCorpusOptions &options,
                                        uint64_t seed) {
  if (options.min_sentences == 0 || options.min_tokens < 2 ||
      options.max_sentences < options.min_sentences ||
      options.max_tokens < options.min_tokens || options.vocabulary == 0) {
    Fail(ErrorCode::kInvalidArgument, "invalid synthetic corpus options");
  }
  Rng rng(seed);
  std::vector<std::string> vocab;
  for (size_t i = 0; i < options.vocabulary; ++i) {
    vocab.push_back(PseudoWord(i));
  }
  auto between = [&rng](size_t lo, size_t hi) {
    return lo + static_cast<size_t>(rng.Below(hi - lo + 1));
  };

  SyntheticCorpus out;
  for (size_t d = 0; d < options.documents; ++d) {
    char doc_id[32];
    std::snprintf(doc_id, sizeof(doc_id), "doc%04zu", d);
    std::vector<std::vector<std::string>> sentences(
        between(options.min_sentences, options.max_sentences));
    for (auto &tokens : sentences) {
      const size_t n = between(options.min_tokens, options.max_tokens);
      for (size_t t = 0; t + 1 < n; ++t) {
        // Squaring the uniform skews draws toward frequent words.
        const double u = rng.Uniform();
        tokens.push_back(vocab[static_cast<size_t>(
            u * u * static_cast<double>(options.vocabulary))]);
      }
      tokens.push_back(".");
    }
    Document doc = IngestPretokenized(doc_id, std::move(sentences));
    for (const Sentence &s : doc.sentences) {
      out.gold.AddSentence(s.id(), s.size());
      const size_t content = s.size() - 1;
      for (Subtask subtask : kAllSubtasks) {
        if (!rng.Bernoulli(options.span_probability)) continue;
        const size_t spans = rng.Bernoulli(0.25) ? 2 : 1;
        for (size_t k = 0; k < spans; ++k) {
          const size_t len =
              between(1, std::min(options.max_span_length, content));
          const size_t start = rng.Below(content - len + 1);
          out.gold.AddSpan(s.id(), {subtask, start, start + len});
        }
      }
    }
    out.documents.push_back(std::move(doc));
  }
  return out;
}

PlantedMatrix GeneratePlantedMatrix(size_t tokens, double prior1,
                                    std::span<const Confusion> annotators,
                                    size_t tokens_per_instance,
                                    uint64_t seed) {
  if (tokens == 0 || tokens_per_instance == 0 || annotators.empty()) {
    Fail(ErrorCode::kInvalidArgument, "invalid planted matrix parameters");
  }
  Rng rng(seed);
  PlantedMatrix out;
  out.prior1 = prior1;
  out.confusion.assign(annotators.begin(), annotators.end());
  std::vector<size_t> columns;
  for (size_t a = 0; a < annotators.size(); ++a) {
    char id[32];
    std::snprintf(id, sizeof(id), "a%02zu", a);
    columns.push_back(out.matrix.AddAnnotator(id));
  }
  size_t done = 0;
  size_t instance = 0;
  while (done < tokens) {
    const size_t n = std::min(tokens_per_instance, tokens - done);
    char id[32];
    std::snprintf(id, sizeof(id), "s%06zu", instance++);
    std::vector<uint8_t> truth(n);
    for (uint8_t &t : truth) t = rng.Bernoulli(prior1) ? 1 : 0;
    for (size_t a = 0; a < annotators.size(); ++a) {
      std::vector<uint8_t> labels(n);
      for (size_t t = 0; t < n; ++t) {
        labels[t] = rng.Bernoulli(annotators[a][truth[t]][1]) ? 1 : 0;
      }
      out.matrix.AddVote(id, columns[a], std::move(labels));
    }
    out.truth.insert(out.truth.end(), truth.begin(), truth.end());
    done += n;
  }
  return out;
}

}  // namespace dexa
