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

#ifndef DEXA_AGREEMENT_H_
#define DEXA_AGREEMENT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dexa/aggregation.h"
#include "dexa/annotation.h"
#include "dexa/corpus.h"

namespace dexa {

struct KappaReport {
  double kappa = 0.0;
  double observed_agreement = 0.0;
  double expected_agreement = 0.0;
  uint64_t token_count = 0;
};

// Binary contingency table; n_ab counts tokens labeled a by the first
// rater and b by the second.
struct ContingencyTable {
  uint64_t n11 = 0;
  uint64_t n10 = 0;
  uint64_t n01 = 0;
  uint64_t n00 = 0;

  void Add(bool a, bool b);
  void Add(std::span<const uint8_t> a, std::span<const uint8_t> b);
  ContingencyTable &operator+=(const ContingencyTable &other);
  uint64_t total() const { return n11 + n10 + n01 + n00; }

  // kappa = (p_o - p_e) / (1 - p_e). When p_e = 1 kappa is 1 if p_o = 1
  // and 0 otherwise. Throws kInvalidArgument for an empty table.
  KappaReport Kappa() const;

  bool operator==(const ContingencyTable &) const = default;
};

// Cohen's kappa pooled over every token of every sentence. Both lists must
// cover the same sentences in the same order with equal lengths.
KappaReport CohensKappa(std::span<const TokenLabelVector> a,
                        std::span<const TokenLabelVector> b);

struct WorkerEvaluation {
  std::string worker_id;
  Subtask subtask = Subtask::kParticipants;
  KappaReport kappa;
  size_t sentences_labeled = 0;
  double coverage_fraction = 0.0;
  bool filtered = false;
};

// One evaluation per (worker, sub-task), computed on the gold sentences
// that worker labeled. filtered = coverage < filter_fraction, where
// coverage = distinct sentences labeled / test_size. Records on sentences
// without gold are ignored. Ordered by sub-task, then worker id.
std::vector<WorkerEvaluation> EvaluateWorkers(
    std::span<const AnnotationRecord> records, const GoldLabels &gold,
    double filter_fraction, size_t test_size);

struct WorkerSummary {
  Subtask subtask = Subtask::kParticipants;
  size_t retained = 0;
  size_t filtered = 0;
  double mean_kappa = 0.0;
  double median_kappa = 0.0;
  double min_kappa = 0.0;
  double max_kappa = 0.0;
};

// Summary over the unfiltered evaluations of one sub-task.
WorkerSummary SummarizeWorkers(std::span<const WorkerEvaluation> evaluations,
                               Subtask subtask);

struct SubsampledEvaluation {
  Subtask subtask = Subtask::kParticipants;
  size_t n = kAllAnnotations;
  AggregationMethod method = AggregationMethod::kMajorityVote;
  size_t repeats = 0;
  std::vector<double> per_repeat_kappa;
  double mean_kappa = 0.0;
  uint64_t seed = 0;
};

// Repeats (subsample n per instance -> aggregate -> kappa vs gold) and
// averages. Repeat r uses seed Rng::Derive(seed, r). Throws
// kInvalidArgument when an instance has no gold labels or repeats is 0.
SubsampledEvaluation EvaluateSubsampled(const LabelMatrix &matrix,
                                        const GoldLabels &gold, size_t n,
                                        AggregationMethod method,
                                        size_t repeats, uint64_t seed,
                                        const DawidSkeneOptions &ds = {});

struct PartitionStats {
  size_t records = 0;
  double share = 0.0;  // records / all records of retained workers
  size_t workers = 0;  // workers with a non-empty partition
  double mean_kappa = 0.0;
  double stdev_kappa = 0.0;  // sample standard deviation; 0 for one worker
};

struct FeedbackAnalysis {
  Subtask subtask = Subtask::kParticipants;
  PartitionStats useful;
  PartitionStats not_useful;
};

// Splits each retained worker's records by feedback flag, computes a
// kappa per worker per partition and macro-averages over workers. Workers
// with an empty partition are left out of that partition's average. One
// entry per sub-task present in the records, in P, I, O order.
std::vector<FeedbackAnalysis> FeedbackConditionedAgreement(
    std::span<const AnnotationRecord> records, const GoldLabels &gold,
    double filter_fraction, size_t test_size);

}  // namespace dexa

#endif  // DEXA_AGREEMENT_H_
