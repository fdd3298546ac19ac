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

#ifndef DEXA_AGGREGATION_H_
#define DEXA_AGGREGATION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dexa/annotation.h"
#include "dexa/corpus.h"

namespace dexa {

enum class AggregationMethod { kMajorityVote, kDawidSkene };

// "MV" / "DS".
std::string_view MethodName(AggregationMethod method);
// Accepts "mv" or "ds" in any case.
AggregationMethod ParseMethod(std::string_view name);

// Requests every available annotation.
inline constexpr size_t kAllAnnotations = std::numeric_limits<size_t>::max();

// Token x annotator matrix with cells {0, 1, absent} for one sub-task.
//
// Annotators label whole sentences, so the matrix is stored per task
// instance (sentence): each instance holds the votes of the annotators who
// labeled it. An annotator missing from an instance is an absent cell.
class LabelMatrix {
 public:
  struct Vote {
    size_t annotator = 0;  // column
    std::vector<uint8_t> labels;
  };
  struct Instance {
    std::string sentence_id;
    size_t token_count = 0;
    std::vector<Vote> votes;  // ascending annotator column
  };

  // Token count for a sentence, or nullopt to skip records on it.
  using TokenCounter = std::function<std::optional<size_t>(const std::string &)>;

  explicit LabelMatrix(Subtask subtask) : subtask_(subtask) {}

  // Builds the matrix from annotation records of `subtask`. Records on
  // sentences the counter does not know are skipped. A second record by the
  // same worker on the same sentence is ignored. Throws kInvalidArgument
  // for spans outside the sentence.
  static LabelMatrix FromRecords(std::span<const AnnotationRecord> records,
                                 Subtask subtask, const TokenCounter &counter);
  static LabelMatrix FromRecords(std::span<const AnnotationRecord> records,
                                 Subtask subtask, const GoldLabels &gold);
  static LabelMatrix FromRecords(std::span<const AnnotationRecord> records,
                                 Subtask subtask, const SentenceTable &table);

  // Returns the column of `annotator_id`, adding it if needed.
  size_t AddAnnotator(const std::string &annotator_id);
  // Throws kInvalidArgument on a length mismatch with an existing instance
  // and kConflict when the annotator already voted on the sentence.
  void AddVote(const std::string &sentence_id, size_t annotator,
               std::vector<uint8_t> labels);

  Subtask subtask() const { return subtask_; }
  const std::vector<std::string> &annotators() const { return annotators_; }
  // Sorted by sentence id.
  const std::vector<Instance> &instances() const;
  size_t token_count() const;
  size_t vote_count() const;
  // Number of sentences each annotator labeled.
  std::vector<size_t> VotesPerAnnotator() const;
  bool empty() const { return instances_.empty(); }

 private:
  Subtask subtask_;
  std::vector<std::string> annotators_;
  std::vector<Instance> instances_;
};

struct AggregatedLabels {
  AggregationMethod method = AggregationMethod::kMajorityVote;
  Subtask subtask = Subtask::kParticipants;
  std::vector<TokenLabelVector> labels;  // one per instance, same order
  std::vector<size_t> n_used;            // annotations aggregated per instance
};

// Label 1 iff strictly more than half of the present votes are 1; exact
// ties give 0. Throws kInvalidArgument for an empty matrix or an instance
// without votes.
AggregatedLabels MajorityVote(const LabelMatrix &matrix);

// 2x2 row-stochastic matrix: [true class][emitted label].
using Confusion = std::array<std::array<double, 2>, 2>;

struct DawidSkeneOptions {
  size_t max_iters = 100;
  double tol = 1e-6;
  // Additive smoothing applied to priors and confusion counts.
  double smoothing = 0.01;
};

struct DawidSkeneModel {
  std::array<double, 2> class_priors = {0.5, 0.5};
  std::vector<Confusion> confusion;  // per annotator column
  // Posterior P(class 1) per token, instance-major.
  std::vector<double> posteriors;
  size_t iterations_run = 0;
  bool converged = false;
  // Observed-data log-likelihood of the parameters estimated in each
  // iteration.
  std::vector<double> log_likelihood;
};

struct DawidSkeneResult {
  DawidSkeneModel model;
  AggregatedLabels labels;
};

// Binary Dawid-Skene EM. Posteriors start from majority vote (0.5 on ties);
// the M-step re-estimates priors and per-annotator confusion matrices with
// additive smoothing; the E-step recomputes posteriors. Stops when the
// largest posterior change is below tol or after max_iters. A token is
// labeled 1 iff its posterior exceeds 0.5. Throws kInvalidArgument for an
// empty matrix or an annotator column with no votes.
DawidSkeneResult DawidSkene(const LabelMatrix &matrix,
                            const DawidSkeneOptions &options = {});

// Observed-data log-likelihood of `matrix` under the given parameters.
double DawidSkeneLogLikelihood(const LabelMatrix &matrix,
                               const std::array<double, 2> &priors,
                               std::span<const Confusion> confusion);

// For every instance keeps min(n, available) votes drawn uniformly without
// replacement. Annotators left without votes are dropped from the column
// list. Deterministic under `seed`; n >= available is the identity.
LabelMatrix SubsampleAnnotations(const LabelMatrix &matrix, size_t n,
                                 uint64_t seed);

AggregatedLabels Aggregate(const LabelMatrix &matrix, AggregationMethod method,
                           const DawidSkeneOptions &options = {});

// Aggregated output file: JSON lines
// {"sentence_id","subtask","labels": bit string,"method","n"}; n is an
// integer or "all".
void WriteAggregated(std::ostream &out, const AggregatedLabels &labels,
                     size_t n);

}  // namespace dexa

#endif  // DEXA_AGGREGATION_H_
