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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dexa/error.h"
#include "dexa/random.h"

namespace dexa {

std::string_view MethodName(AggregationMethod method) {
  return method == AggregationMethod::kMajorityVote ? "MV" : "DS";
}

AggregationMethod ParseMethod(std::string_view name) {
  std::string lower(name);
  for (char &c : lower) c = static_cast<char>(std::tolower(c));
  if (lower == "mv") return AggregationMethod::kMajorityVote;
  if (lower == "ds") return AggregationMethod::kDawidSkene;
  Fail(ErrorCode::kInvalidArgument,
       "unknown aggregation method '" + std::string(name) + "'");
}

LabelMatrix LabelMatrix::FromRecords(std::span<const AnnotationRecord> records,
                                     Subtask subtask,
                                     const TokenCounter &counter) {
  LabelMatrix m(subtask);
  for (const AnnotationRecord &r : records) {
    if (r.subtask != subtask) continue;
    std::optional<size_t> n = counter(r.sentence_id);
    if (!n) continue;
    TokenLabelVector v = SpansToTokenLabels(r.spans, r.sentence_id, *n, subtask);
    const size_t col = m.AddAnnotator(r.worker_id);
    try {
      m.AddVote(r.sentence_id, col, std::move(v.labels));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kConflict) throw;
    }
  }
  return m;
}

LabelMatrix LabelMatrix::FromRecords(std::span<const AnnotationRecord> records,
                                     Subtask subtask, const GoldLabels &gold) {
  return FromRecords(records, subtask,
                     [&gold](const std::string &id) -> std::optional<size_t> {
                       if (!gold.Contains(id)) return std::nullopt;
                       return gold.at(id).token_count;
                     });
}

LabelMatrix LabelMatrix::FromRecords(std::span<const AnnotationRecord> records,
                                     Subtask subtask,
                                     const SentenceTable &table) {
  return FromRecords(records, subtask,
                     [&table](const std::string &id) -> std::optional<size_t> {
                       return table.at(id).size();
                     });
}

size_t LabelMatrix::AddAnnotator(const std::string &annotator_id) {
  auto it = std::find(annotators_.begin(), annotators_.end(), annotator_id);
  if (it != annotators_.end()) return it - annotators_.begin();
  annotators_.push_back(annotator_id);
  return annotators_.size() - 1;
}

void LabelMatrix::AddVote(const std::string &sentence_id, size_t annotator,
                          std::vector<uint8_t> labels) {
  if (annotator >= annotators_.size()) {
    Fail(ErrorCode::kInvalidArgument, "unknown annotator column");
  }
  auto it = std::lower_bound(
      instances_.begin(), instances_.end(), sentence_id,
      [](const Instance &inst, const std::string &id) {
        return inst.sentence_id < id;
      });
  if (it == instances_.end() || it->sentence_id != sentence_id) {
    it = instances_.insert(it, Instance{sentence_id, labels.size(), {}});
  } else if (it->token_count != labels.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "vote on " + sentence_id + " has " + std::to_string(labels.size()) +
             " tokens, expected " + std::to_string(it->token_count));
  }
  auto &votes = it->votes;
  auto vit = std::lower_bound(
      votes.begin(), votes.end(), annotator,
      [](const Vote &v, size_t a) { return v.annotator < a; });
  if (vit != votes.end() && vit->annotator == annotator) {
    Fail(ErrorCode::kConflict, "annotator " + annotators_[annotator] +
                                   " already voted on " + sentence_id);
  }
  votes.insert(vit, Vote{annotator, std::move(labels)});
}

const std::vector<LabelMatrix::Instance> &LabelMatrix::instances() const {
  return instances_;
}

size_t LabelMatrix::token_count() const {
  size_t n = 0;
  for (const Instance &inst : instances_) n += inst.token_count;
  return n;
}

size_t LabelMatrix::vote_count() const {
  size_t n = 0;
  for (const Instance &inst : instances_) n += inst.votes.size();
  return n;
}

std::vector<size_t> LabelMatrix::VotesPerAnnotator() const {
  std::vector<size_t> counts(annotators_.size(), 0);
  for (const Instance &inst : instances_) {
    for (const Vote &v : inst.votes) ++counts[v.annotator];
  }
  return counts;
}

AggregatedLabels MajorityVote(const LabelMatrix &matrix) {
  if (matrix.empty()) {
    Fail(ErrorCode::kInvalidArgument, "majority vote over an empty matrix");
  }
  AggregatedLabels out;
  out.method = AggregationMethod::kMajorityVote;
  out.subtask = matrix.subtask();
  for (const auto &inst : matrix.instances()) {
    if (inst.votes.empty()) {
      Fail(ErrorCode::kInvalidArgument,
           "token " + inst.sentence_id + ":0 has no votes");
    }
    TokenLabelVector v{inst.sentence_id, matrix.subtask(),
                       std::vector<uint8_t>(inst.token_count, 0)};
    for (size_t t = 0; t < inst.token_count; ++t) {
      size_t ones = 0;
      for (const auto &vote : inst.votes) ones += vote.labels[t];
      v.labels[t] = 2 * ones > inst.votes.size();
    }
    out.labels.push_back(std::move(v));
    out.n_used.push_back(inst.votes.size());
  }
  return out;
}

namespace {

double SafeLog(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

struct Estimates {
  std::array<double, 2> priors;
  std::vector<Confusion> confusion;
};

Estimates MaximizationStep(const LabelMatrix &matrix,
                           const std::vector<double> &posterior,
                           double alpha) {
  const size_t annotators = matrix.annotators().size();
  std::vector<std::array<std::array<double, 2>, 2>> counts(
      annotators, {{{0.0, 0.0}, {0.0, 0.0}}});
  double mass1 = 0.0;
  size_t g = 0;
  for (const auto &inst : matrix.instances()) {
    for (size_t t = 0; t < inst.token_count; ++t, ++g) {
      const double p1 = posterior[g];
      const double p0 = 1.0 - p1;
      mass1 += p1;
      for (const auto &vote : inst.votes) {
        const size_t l = vote.labels[t];
        counts[vote.annotator][1][l] += p1;
        counts[vote.annotator][0][l] += p0;
      }
    }
  }
  const double n = static_cast<double>(g);
  Estimates est;
  const double denom = 2.0 * alpha + n;
  est.priors[1] = denom > 0.0 ? (alpha + mass1) / denom : 0.5;
  est.priors[0] = 1.0 - est.priors[1];
  est.confusion.resize(annotators);
  for (size_t a = 0; a < annotators; ++a) {
    for (size_t c = 0; c < 2; ++c) {
      const double row = 2.0 * alpha + counts[a][c][0] + counts[a][c][1];
      if (row > 0.0) {
        est.confusion[a][c][1] = (alpha + counts[a][c][1]) / row;
        est.confusion[a][c][0] = 1.0 - est.confusion[a][c][1];
      } else {
        est.confusion[a][c] = {0.5, 0.5};
      }
    }
  }
  return est;
}

// Fills `posterior` and returns the observed-data log-likelihood.
double ExpectationStep(const LabelMatrix &matrix,
                       const std::array<double, 2> &priors,
                       std::span<const Confusion> confusion,
                       std::vector<double> *posterior) {
  std::vector<std::array<std::array<double, 2>, 2>> log_conf(confusion.size());
  for (size_t a = 0; a < confusion.size(); ++a) {
    for (size_t c = 0; c < 2; ++c) {
      for (size_t l = 0; l < 2; ++l) {
        log_conf[a][c][l] = SafeLog(confusion[a][c][l]);
      }
    }
  }
  const double log_prior0 = SafeLog(priors[0]);
  const double log_prior1 = SafeLog(priors[1]);
  double ll = 0.0;
  size_t g = 0;
  for (const auto &inst : matrix.instances()) {
    for (size_t t = 0; t < inst.token_count; ++t, ++g) {
      double lp0 = log_prior0;
      double lp1 = log_prior1;
      for (const auto &vote : inst.votes) {
        const size_t l = vote.labels[t];
        lp0 += log_conf[vote.annotator][0][l];
        lp1 += log_conf[vote.annotator][1][l];
      }
      const double m = std::max(lp0, lp1);
      const double e0 = std::exp(lp0 - m);
      const double e1 = std::exp(lp1 - m);
      ll += m + std::log(e0 + e1);
      if (posterior != nullptr) (*posterior)[g] = e1 / (e0 + e1);
    }
  }
  return ll;
}

}  // namespace

double DawidSkeneLogLikelihood(const LabelMatrix &matrix,
                               const std::array<double, 2> &priors,
                               std::span<const Confusion> confusion) {
  return ExpectationStep(matrix, priors, confusion, nullptr);
}

DawidSkeneResult DawidSkene(const LabelMatrix &matrix,
                            const DawidSkeneOptions &options) {
  if (matrix.empty()) {
    Fail(ErrorCode::kInvalidArgument, "Dawid-Skene over an empty matrix");
  }
  const std::vector<size_t> per_annotator = matrix.VotesPerAnnotator();
  for (size_t a = 0; a < per_annotator.size(); ++a) {
    if (per_annotator[a] == 0) {
      Fail(ErrorCode::kInvalidArgument,
           "annotator " + matrix.annotators()[a] + " has no votes");
    }
  }

  std::vector<double> posterior;
  posterior.reserve(matrix.token_count());
  for (const auto &inst : matrix.instances()) {
    if (inst.votes.empty()) {
      Fail(ErrorCode::kInvalidArgument,
           "token " + inst.sentence_id + ":0 has no votes");
    }
    for (size_t t = 0; t < inst.token_count; ++t) {
      size_t ones = 0;
      for (const auto &vote : inst.votes) ones += vote.labels[t];
      const size_t twice = 2 * ones;
      posterior.push_back(twice > inst.votes.size()   ? 1.0
                          : twice < inst.votes.size() ? 0.0
                                                      : 0.5);
    }
  }

  DawidSkeneResult result;
  DawidSkeneModel &model = result.model;
  std::vector<double> next(posterior.size());
  for (size_t iter = 1; iter <= options.max_iters; ++iter) {
    Estimates est = MaximizationStep(matrix, posterior, options.smoothing);
    model.class_priors = est.priors;
    model.confusion = std::move(est.confusion);
    const double ll = ExpectationStep(matrix, model.class_priors,
                                      model.confusion, &next);
    model.log_likelihood.push_back(ll);
    double delta = 0.0;
    for (size_t g = 0; g < posterior.size(); ++g) {
      delta = std::max(delta, std::abs(next[g] - posterior[g]));
    }
    posterior.swap(next);
    model.iterations_run = iter;
    if (delta < options.tol) {
      model.converged = true;
      break;
    }
  }
  model.posteriors = posterior;

  AggregatedLabels &labels = result.labels;
  labels.method = AggregationMethod::kDawidSkene;
  labels.subtask = matrix.subtask();
  size_t g = 0;
  for (const auto &inst : matrix.instances()) {
    TokenLabelVector v{inst.sentence_id, matrix.subtask(),
                       std::vector<uint8_t>(inst.token_count, 0)};
    for (size_t t = 0; t < inst.token_count; ++t, ++g) {
      v.labels[t] = posterior[g] > 0.5;
    }
    labels.labels.push_back(std::move(v));
    labels.n_used.push_back(inst.votes.size());
  }
  return result;
}

LabelMatrix SubsampleAnnotations(const LabelMatrix &matrix, size_t n,
                                 uint64_t seed) {
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "sample size must be >= 1");
  Rng rng(seed);
  std::vector<std::vector<const LabelMatrix::Vote *>> kept;
  kept.reserve(matrix.instances().size());
  std::vector<bool> used(matrix.annotators().size(), false);
  for (const auto &inst : matrix.instances()) {
    std::vector<size_t> order(inst.votes.size());
    std::iota(order.begin(), order.end(), size_t{0});
    const size_t take = std::min(n, order.size());
    if (take < order.size()) {
      for (size_t i = 0; i < take; ++i) {
        std::swap(order[i], order[i + rng.Below(order.size() - i)]);
      }
      order.resize(take);
      std::sort(order.begin(), order.end());
    }
    std::vector<const LabelMatrix::Vote *> votes;
    for (size_t i : order) {
      votes.push_back(&inst.votes[i]);
      used[inst.votes[i].annotator] = true;
    }
    kept.push_back(std::move(votes));
  }

  LabelMatrix out(matrix.subtask());
  std::vector<size_t> column(matrix.annotators().size(), 0);
  for (size_t a = 0; a < matrix.annotators().size(); ++a) {
    if (used[a]) column[a] = out.AddAnnotator(matrix.annotators()[a]);
  }
  for (size_t i = 0; i < kept.size(); ++i) {
    for (const LabelMatrix::Vote *v : kept[i]) {
      out.AddVote(matrix.instances()[i].sentence_id, column[v->annotator],
                  v->labels);
    }
  }
  return out;
}

AggregatedLabels Aggregate(const LabelMatrix &matrix, AggregationMethod method,
                           const DawidSkeneOptions &options) {
  if (method == AggregationMethod::kMajorityVote) return MajorityVote(matrix);
  return DawidSkene(matrix, options).labels;
}

void WriteAggregated(std::ostream &out, const AggregatedLabels &labels,
                     size_t n) {
  const nlohmann::json n_json =
      n == kAllAnnotations ? nlohmann::json("all") : nlohmann::json(n);
  for (const TokenLabelVector &v : labels.labels) {
    nlohmann::json line = {{"sentence_id", v.sentence_id},
                           {"subtask", SubtaskName(v.subtask)},
                           {"labels", v.ToBitString()},
                           {"method", MethodName(labels.method)},
                           {"n", n_json}};
    out << line.dump() << '\n';
  }
}

}  // namespace dexa
