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

#ifndef DEXA_STUDY_H_
#define DEXA_STUDY_H_

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dexa/annotation.h"
#include "dexa/corpus.h"
#include "dexa/retrieval.h"

namespace dexa {

using Clock = std::function<Timestamp()>;
using Duration = std::chrono::milliseconds;

Clock SystemClock();

// Expert-labeled documents split at document granularity into the pool
// examples are drawn from (train) and the set injected into the annotation
// work to measure workers (test). The two sides never share a document.
struct ExpertCorpus {
  std::vector<Document> documents;
  GoldLabels gold;
  std::vector<std::string> train_doc_ids;
  std::vector<std::string> test_doc_ids;
  std::vector<Sentence> train;
  std::vector<Sentence> test;
  uint64_t split_seed = 0;
};

// Shuffles the documents under `seed` and puts the first `test_doc_count`
// on the test side. Every sentence must carry gold labels. Throws
// kInvalidArgument unless 0 < test_doc_count < documents.size().
ExpertCorpus SplitExpertSet(std::vector<Document> documents, GoldLabels gold,
                            size_t test_doc_count, uint64_t seed);

// Rebuilds a split from explicit document id lists (e.g. a saved split
// file). Throws when the lists overlap or name unknown documents.
ExpertCorpus MakeExpertCorpus(std::vector<Document> documents,
                              GoldLabels gold,
                              std::vector<std::string> test_doc_ids,
                              uint64_t seed);

// Split file: {"seed", "test_docs": [...], "train_docs": [...]}.
void WriteSplit(std::ostream &out, const ExpertCorpus &corpus);
ExpertCorpus LoadSplit(const std::string &path, std::vector<Document> documents,
                       GoldLabels gold);

struct StudyConfig {
  std::vector<Subtask> subtasks = {kAllSubtasks.begin(), kAllSubtasks.end()};
  size_t k = 3;
  size_t redundancy = 3;
  double min_approval_rate = 0.90;
  double qualification_threshold = 0.5;
  double worker_filter_fraction = 0.05;
  // Number of training sentences served for the qualification test run.
  size_t testrun_sentences = 5;

  void Validate() const;
};

enum class Provenance { kUnlabeled, kInjectedTest };

struct AnnotationItem {
  Sentence sentence;
  Provenance provenance;
};

struct WorkerProfile {
  std::string worker_id;
  double approval_rate = 0.0;
  std::array<bool, 3> qualified = {false, false, false};
  std::array<size_t, 3> annotation_count = {0, 0, 0};
  // Opaque credential owned by the serving layer; empty when unused.
  std::string credential;

  bool IsQualified(Subtask s) const { return qualified[SubtaskIndex(s)]; }
  bool operator==(const WorkerProfile &) const = default;
};

struct Hit {
  std::string hit_id;
  Sentence sentence;
  Subtask subtask = Subtask::kParticipants;
  std::vector<DynamicExample> examples;
  std::string issued_to;
  Timestamp issued_at = 0;
};

enum class QualificationStatus {
  kQualified,
  kApprovalTooLow,
  kBelowThreshold,
  kNoTestRun,
};

std::string_view QualificationStatusName(QualificationStatus status);

struct SubtaskQualification {
  Subtask subtask = Subtask::kParticipants;
  QualificationStatus status = QualificationStatus::kNoTestRun;
  std::optional<double> kappa;

  bool qualified() const { return status == QualificationStatus::kQualified; }
};

struct QualificationResult {
  WorkerProfile profile;
  std::vector<SubtaskQualification> subtasks;
};

// Grades a test run per configured sub-task: qualified iff the approval
// rate reaches min_approval_rate and the pooled token-level kappa against
// gold reaches qualification_threshold. A sub-task without test-run
// records keeps its previous state and reports kNoTestRun.
QualificationResult QualifyWorker(const WorkerProfile &worker,
                                  std::span<const AnnotationRecord> testrun,
                                  const GoldLabels &gold,
                                  const StudyConfig &config);

// Study mutations are expressed as events so a log of them can rebuild the
// exact state.
struct WorkerRegistered {
  WorkerProfile profile;
};
struct WorkerQualified {
  std::string worker_id;
  std::vector<SubtaskQualification> results;
};
struct HitIssued {
  Hit hit;
};
struct HitExpired {
  std::string hit_id;
  Timestamp at = 0;
};
struct AnnotationSubmitted {
  AnnotationRecord record;
};

using StudyEvent = std::variant<WorkerRegistered, WorkerQualified, HitIssued,
                                HitExpired, AnnotationSubmitted>;

// "worker-registered", "worker-qualified", "hit-issued", "hit-expired" or
// "annotation-submitted".
std::string_view EventKind(const StudyEvent &event);

// Receives every event after validation and before it is applied. Throwing
// aborts the mutation and leaves the study unchanged.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void Append(const StudyEvent &event, Timestamp at) = 0;
};

enum class HitStatus { kOpen, kCompleted, kExpired };

struct SubtaskProgress {
  size_t completed = 0;
  size_t open = 0;
  size_t remaining = 0;
};

// Annotation study over A = U + injected test sentences.
//
// Thread-safe: mutations run under one exclusive writer lock, reads take a
// shared lock. Given the same order of mutations and clock readings the
// resulting state is identical.
class Study {
 public:
  Study(ExpertCorpus corpus, std::vector<Sentence> unlabeled,
        StudyConfig config, std::shared_ptr<const ExampleIndex> index,
        Clock clock = SystemClock());

  Study(const Study &) = delete;
  Study &operator=(const Study &) = delete;

  // Not owned. Set before any concurrent use.
  void SetEventSink(EventSink *sink) { sink_ = sink; }

  const StudyConfig &config() const { return config_; }
  const ExpertCorpus &corpus() const { return corpus_; }
  const ExampleIndex &index() const { return *index_; }
  const std::vector<AnnotationItem> &items() const { return items_; }
  size_t TotalSlots() const;
  // Stable digest of configuration, annotation set and index membership.
  std::string Fingerprint() const;

  // An empty worker_id assigns the next free "w<N>". Throws kConflict for
  // a duplicate id and kInvalidArgument for a rate outside [0, 1].
  WorkerProfile RegisterWorker(std::string worker_id, double approval_rate,
                               std::string credential = {});

  // Training sentences served for the qualification test run.
  std::vector<Sentence> TestRunSentences() const;

  // Grades the records (which must reference test-run sentences) and
  // records the outcome.
  QualificationResult SubmitTestRun(const std::string &worker_id,
                                    std::vector<AnnotationRecord> records);

  // Issues the eligible sentence with the fewest completed annotations
  // (ties by sentence id), or nullopt when none is eligible. Throws
  // kNotFound for an unknown worker and kPermissionDenied when the worker
  // is not qualified for the sub-task.
  std::optional<Hit> NextHit(const std::string &worker_id, Subtask subtask);

  // Only hit_id, worker_id, spans and feedback_useful are read from the
  // record; sentence and sub-task come from the HIT. Returns the stored
  // record. Throws kNotFound (unknown HIT), kConflict (HIT not open),
  // kPermissionDenied (HIT issued to someone else) or kInvalidArgument
  // (bad spans).
  AnnotationRecord SubmitAnnotation(const AnnotationRecord &record);

  // Throws kNotFound, kConflict when the HIT is not open, and
  // kFailedPrecondition when it is younger than `timeout`.
  void ExpireHit(const std::string &hit_id, Duration timeout);
  // Expires every open HIT at least `timeout` old; returns their ids.
  std::vector<std::string> ExpireStale(Duration timeout);

  // Replay path: applies an event without notifying the sink. Throws
  // kDataLoss when the event is inconsistent with the current state.
  void Apply(const StudyEvent &event);

  std::optional<WorkerProfile> FindWorker(const std::string &worker_id) const;
  std::optional<std::string> WorkerForCredential(
      const std::string &credential) const;
  std::optional<Hit> FindHit(const std::string &hit_id) const;
  std::optional<HitStatus> GetHitStatus(const std::string &hit_id) const;
  std::map<Subtask, SubtaskProgress> Progress() const;
  std::vector<AnnotationRecord> Annotations() const;
  size_t AnnotationCount() const;

  // Canonical dump of the mutable state, for replay comparisons.
  nlohmann::json StateSnapshot() const;
  // Recomputes the redundancy-cap, no-repeat and counter invariants from
  // the HIT table; returns a description of each violation.
  std::vector<std::string> CheckInvariants() const;

 private:
  struct Slot {
    size_t open = 0;
    size_t completed = 0;
  };
  struct WorkerState {
    WorkerProfile profile;
    std::array<std::unordered_set<size_t>, 3> issued;  // item positions
  };
  struct HitState {
    Hit hit;
    HitStatus status = HitStatus::kOpen;
  };

  void Emit(const StudyEvent &event, Timestamp at);
  void ApplyLocked(const StudyEvent &event);
  void ApplyEvent(const WorkerRegistered &e);
  void ApplyEvent(const WorkerQualified &e);
  void ApplyEvent(const HitIssued &e);
  void ApplyEvent(const HitExpired &e);
  void ApplyEvent(const AnnotationSubmitted &e);
  size_t ItemPosition(const std::string &sentence_id) const;
  bool SubtaskEnabled(Subtask s) const;
  void ExpireLocked(const std::string &hit_id, Timestamp now);

  ExpertCorpus corpus_;
  StudyConfig config_;
  std::shared_ptr<const ExampleIndex> index_;
  Clock clock_;
  EventSink *sink_ = nullptr;

  std::vector<AnnotationItem> items_;  // sorted by sentence id
  std::unordered_map<std::string, size_t> item_position_;
  std::unordered_set<std::string> testrun_ids_;

  mutable std::shared_mutex mu_;
  std::array<std::vector<Slot>, 3> slots_;
  std::map<std::string, WorkerState> workers_;
  std::unordered_map<std::string, std::string> credentials_;
  std::map<std::string, HitState> hits_;
  std::vector<AnnotationRecord> annotations_;
  uint64_t next_hit_number_ = 1;
};

}  // namespace dexa

#endif  // DEXA_STUDY_H_
