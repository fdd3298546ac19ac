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

#include "dexa/agreement.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "dexa/error.h"
#include "dexa/random.h"

namespace dexa {

void ContingencyTable::Add(bool a, bool b) {
  if (a) {
    b ? ++n11 : ++n10;
  } else {
    b ? ++n01 : ++n00;
  }
}

void ContingencyTable::Add(std::span<const uint8_t> a,
                           std::span<const uint8_t> b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kInvalidArgument, "label vectors differ in length");
  }
  for (size_t i = 0; i < a.size(); ++i) Add(a[i] != 0, b[i] != 0);
}

ContingencyTable &ContingencyTable::operator+=(const ContingencyTable &o) {
  n11 += o.n11;
  n10 += o.n10;
  n01 += o.n01;
  n00 += o.n00;
  return *this;
}

KappaReport ContingencyTable::Kappa() const {
  const uint64_t n = total();
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "kappa over zero tokens");
  const double N = static_cast<double>(n);
  const double po = static_cast<double>(n11 + n00) / N;
  const double a1 = static_cast<double>(n11 + n10) / N;
  const double b1 = static_cast<double>(n11 + n01) / N;
  const double pe = a1 * b1 + (1.0 - a1) * (1.0 - b1);
  KappaReport r;
  r.observed_agreement = po;
  r.expected_agreement = pe;
  r.token_count = n;
  if (pe >= 1.0) {
    r.kappa = po >= 1.0 ? 1.0 : 0.0;
  } else {
    r.kappa = (po - pe) / (1.0 - pe);
  }
  return r;
}

KappaReport CohensKappa(std::span<const TokenLabelVector> a,
                        std::span<const TokenLabelVector> b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "kappa inputs cover " + std::to_string(a.size()) + " and " +
             std::to_string(b.size()) + " sentences");
  }
  ContingencyTable table;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].sentence_id != b[i].sentence_id ||
        a[i].size() != b[i].size()) {
      Fail(ErrorCode::kInvalidArgument,
           "kappa inputs disagree at position " + std::to_string(i) + " (" +
               a[i].sentence_id + " vs " + b[i].sentence_id + ")");
    }
    table.Add(a[i].labels, b[i].labels);
  }
  return table.Kappa();
}

namespace {

struct WorkerSlice {
  ContingencyTable table;
  std::set<std::string> sentences;
  std::vector<const AnnotationRecord *> records;
};

// (subtask, worker) -> gold-covered records.
std::map<std::pair<Subtask, std::string>, WorkerSlice> SliceByWorker(
    std::span<const AnnotationRecord> records, const GoldLabels &gold) {
  std::map<std::pair<Subtask, std::string>, WorkerSlice> slices;
  for (const AnnotationRecord &r : records) {
    if (!gold.Contains(r.sentence_id)) continue;
    WorkerSlice &slice = slices[{r.subtask, r.worker_id}];
    const TokenLabelVector expert = gold.Labels(r.sentence_id, r.subtask);
    const TokenLabelVector mine = SpansToTokenLabels(
        r.spans, r.sentence_id, expert.size(), r.subtask);
    slice.table.Add(mine.labels, expert.labels);
    slice.sentences.insert(r.sentence_id);
    slice.records.push_back(&r);
  }
  return slices;
}

double Coverage(size_t sentences, size_t test_size) {
  if (test_size == 0) return 0.0;
  return static_cast<double>(sentences) / static_cast<double>(test_size);
}

}  // namespace

std::vector<WorkerEvaluation> EvaluateWorkers(
    std::span<const AnnotationRecord> records, const GoldLabels &gold,
    double filter_fraction, size_t test_size) {
  std::vector<WorkerEvaluation> out;
  for (const auto &[key, slice] : SliceByWorker(records, gold)) {
    WorkerEvaluation e;
    e.subtask = key.first;
    e.worker_id = key.second;
    e.kappa = slice.table.Kappa();
    e.sentences_labeled = slice.sentences.size();
    e.coverage_fraction = Coverage(e.sentences_labeled, test_size);
    e.filtered = e.coverage_fraction < filter_fraction;
    out.push_back(std::move(e));
  }
  return out;
}

WorkerSummary SummarizeWorkers(std::span<const WorkerEvaluation> evaluations,
                               Subtask subtask) {
  WorkerSummary s;
  s.subtask = subtask;
  std::vector<double> kappas;
  for (const WorkerEvaluation &e : evaluations) {
    if (e.subtask != subtask) continue;
    if (e.filtered) {
      ++s.filtered;
      continue;
    }
    kappas.push_back(e.kappa.kappa);
  }
  s.retained = kappas.size();
  if (kappas.empty()) return s;
  std::sort(kappas.begin(), kappas.end());
  double sum = 0.0;
  for (double k : kappas) sum += k;
  s.mean_kappa = sum / static_cast<double>(kappas.size());
  const size_t mid = kappas.size() / 2;
  s.median_kappa = kappas.size() % 2 == 1
                       ? kappas[mid]
                       : 0.5 * (kappas[mid - 1] + kappas[mid]);
  s.min_kappa = kappas.front();
  s.max_kappa = kappas.back();
  return s;
}

SubsampledEvaluation EvaluateSubsampled(const LabelMatrix &matrix,
                                        const GoldLabels &gold, size_t n,
                                        AggregationMethod method,
                                        size_t repeats, uint64_t seed,
                                        const DawidSkeneOptions &ds) {
  if (repeats == 0) Fail(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  std::vector<TokenLabelVector> expert;
  expert.reserve(matrix.instances().size());
  for (const auto &inst : matrix.instances()) {
    if (!gold.Contains(inst.sentence_id)) {
      Fail(ErrorCode::kInvalidArgument,
           "sentence " + inst.sentence_id + " has no gold labels");
    }
    expert.push_back(gold.Labels(inst.sentence_id, matrix.subtask()));
  }

  SubsampledEvaluation out;
  out.subtask = matrix.subtask();
  out.n = n;
  out.method = method;
  out.repeats = repeats;
  out.seed = seed;
  double sum = 0.0;
  for (size_t r = 0; r < repeats; ++r) {
    const LabelMatrix sample =
        SubsampleAnnotations(matrix, n, Rng::Derive(seed, r));
    const AggregatedLabels agg = Aggregate(sample, method, ds);
    const double k = CohensKappa(agg.labels, expert).kappa;
    out.per_repeat_kappa.push_back(k);
    sum += k;
  }
  out.mean_kappa = sum / static_cast<double>(repeats);
  return out;
}

namespace {

PartitionStats Summarize(const std::vector<double> &kappas, size_t records,
                         size_t total_records) {
  PartitionStats p;
  p.records = records;
  p.share = total_records == 0
                ? 0.0
                : static_cast<double>(records) /
                      static_cast<double>(total_records);
  p.workers = kappas.size();
  if (kappas.empty()) return p;
  double sum = 0.0;
  for (double k : kappas) sum += k;
  p.mean_kappa = sum / static_cast<double>(kappas.size());
  if (kappas.size() > 1) {
    double ss = 0.0;
    for (double k : kappas) ss += (k - p.mean_kappa) * (k - p.mean_kappa);
    p.stdev_kappa = std::sqrt(ss / static_cast<double>(kappas.size() - 1));
  }
  return p;
}

}  // namespace

std::vector<FeedbackAnalysis> FeedbackConditionedAgreement(
    std::span<const AnnotationRecord> records, const GoldLabels &gold,
    double filter_fraction, size_t test_size) {
  struct Accum {
    std::vector<double> useful_kappas;
    std::vector<double> other_kappas;
    size_t useful_records = 0;
    size_t other_records = 0;
    bool present = false;
  };
  std::array<Accum, 3> acc;
  for (const auto &[key, slice] : SliceByWorker(records, gold)) {
    Accum &a = acc[SubtaskIndex(key.first)];
    a.present = true;
    if (Coverage(slice.sentences.size(), test_size) < filter_fraction) {
      continue;
    }
    ContingencyTable useful;
    ContingencyTable other;
    size_t n_useful = 0;
    size_t n_other = 0;
    for (const AnnotationRecord *r : slice.records) {
      const TokenLabelVector expert = gold.Labels(r->sentence_id, r->subtask);
      const TokenLabelVector mine = SpansToTokenLabels(
          r->spans, r->sentence_id, expert.size(), r->subtask);
      if (r->feedback_useful) {
        useful.Add(mine.labels, expert.labels);
        ++n_useful;
      } else {
        other.Add(mine.labels, expert.labels);
        ++n_other;
      }
    }
    a.useful_records += n_useful;
    a.other_records += n_other;
    if (n_useful > 0) a.useful_kappas.push_back(useful.Kappa().kappa);
    if (n_other > 0) a.other_kappas.push_back(other.Kappa().kappa);
  }

  std::vector<FeedbackAnalysis> out;
  for (Subtask s : kAllSubtasks) {
    const Accum &a = acc[SubtaskIndex(s)];
    if (!a.present) continue;
    const size_t total = a.useful_records + a.other_records;
    out.push_back({s, Summarize(a.useful_kappas, a.useful_records, total),
                   Summarize(a.other_kappas, a.other_records, total)});
  }
  return out;
}

}  // namespace dexa
