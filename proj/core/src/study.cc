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

#include "dexa/study.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "dexa/agreement.h"
#include "dexa/embedding.h"
#include "dexa/error.h"
#include "dexa/json_format.h"
#include "dexa/random.h"

namespace dexa {

using json = nlohmann::json;

Clock SystemClock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

ExpertCorpus MakeExpertCorpus(std::vector<Document> documents,
                              GoldLabels gold,
                              std::vector<std::string> test_doc_ids,
                              uint64_t seed) {
  std::set<std::string> test(test_doc_ids.begin(), test_doc_ids.end());
  if (test.size() != test_doc_ids.size()) {
    Fail(ErrorCode::kInvalidArgument, "test document list has duplicates");
  }
  ExpertCorpus corpus;
  corpus.split_seed = seed;
  size_t matched = 0;
  for (const Document &doc : documents) {
    const bool is_test = test.count(doc.doc_id) != 0;
    matched += is_test;
    for (const Sentence &s : doc.sentences) {
      if (!gold.Contains(s.id())) {
        Fail(ErrorCode::kInvalidArgument,
             "expert sentence " + s.id() + " has no gold labels");
      }
      (is_test ? corpus.test : corpus.train).push_back(s);
    }
    (is_test ? corpus.test_doc_ids : corpus.train_doc_ids)
        .push_back(doc.doc_id);
  }
  if (matched != test.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "test document list names documents not in the corpus");
  }
  corpus.documents = std::move(documents);
  corpus.gold = std::move(gold);
  return corpus;
}

ExpertCorpus SplitExpertSet(std::vector<Document> documents, GoldLabels gold,
                            size_t test_doc_count, uint64_t seed) {
  if (test_doc_count == 0 || test_doc_count >= documents.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "test document count " + std::to_string(test_doc_count) +
             " must be in (0, " + std::to_string(documents.size()) + ")");
  }
  std::vector<std::string> ids;
  ids.reserve(documents.size());
  for (const Document &d : documents) ids.push_back(d.doc_id);
  std::sort(ids.begin(), ids.end());
  // Fisher-Yates over the sorted ids so input order does not matter.
  Rng rng(seed);
  for (size_t i = ids.size() - 1; i > 0; --i) {
    std::swap(ids[i], ids[rng.Below(i + 1)]);
  }
  ids.resize(test_doc_count);
  std::sort(ids.begin(), ids.end());
  return MakeExpertCorpus(std::move(documents), std::move(gold),
                          std::move(ids), seed);
}

void WriteSplit(std::ostream &out, const ExpertCorpus &corpus) {
  json j = {{"seed", corpus.split_seed},
            {"test_docs", corpus.test_doc_ids},
            {"train_docs", corpus.train_doc_ids}};
  out << j.dump(2) << '\n';
}

ExpertCorpus LoadSplit(const std::string &path,
                       std::vector<Document> documents, GoldLabels gold) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    Fail(ErrorCode::kInvalidArgument, path + ": " + e.what());
  }
  ExpertCorpus corpus = MakeExpertCorpus(
      std::move(documents), std::move(gold),
      j.at("test_docs").get<std::vector<std::string>>(),
      j.value("seed", uint64_t{0}));
  if (j.contains("train_docs")) {
    auto train = j.at("train_docs").get<std::vector<std::string>>();
    std::sort(train.begin(), train.end());
    auto have = corpus.train_doc_ids;
    std::sort(have.begin(), have.end());
    if (train != have) {
      Fail(ErrorCode::kInvalidArgument,
           path + ": train_docs does not match the corpus minus test_docs");
    }
  }
  return corpus;
}

void StudyConfig::Validate() const {
  if (k < 1) Fail(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (redundancy < 1) {
    Fail(ErrorCode::kInvalidArgument, "redundancy must be at least 1");
  }
  if (subtasks.empty()) {
    Fail(ErrorCode::kInvalidArgument, "at least one subtask is required");
  }
  if (min_approval_rate < 0.0 || min_approval_rate > 1.0) {
    Fail(ErrorCode::kInvalidArgument, "min_approval_rate must be in [0, 1]");
  }
  if (worker_filter_fraction < 0.0 || worker_filter_fraction > 1.0) {
    Fail(ErrorCode::kInvalidArgument,
         "worker_filter_fraction must be in [0, 1]");
  }
}

std::string_view QualificationStatusName(QualificationStatus status) {
  switch (status) {
    case QualificationStatus::kQualified: return "qualified";
    case QualificationStatus::kApprovalTooLow: return "approval_too_low";
    case QualificationStatus::kBelowThreshold: return "below_threshold";
    case QualificationStatus::kNoTestRun: return "no_test_run";
  }
  return "unknown";
}

QualificationResult QualifyWorker(const WorkerProfile &worker,
                                  std::span<const AnnotationRecord> testrun,
                                  const GoldLabels &gold,
                                  const StudyConfig &config) {
  QualificationResult result{worker, {}};
  const bool approval_ok = worker.approval_rate >= config.min_approval_rate;
  for (Subtask subtask : config.subtasks) {
    std::vector<TokenLabelVector> mine;
    std::vector<TokenLabelVector> expert;
    for (const AnnotationRecord &r : testrun) {
      if (r.subtask != subtask) continue;
      const GoldLabels::Entry &entry = gold.at(r.sentence_id);
      mine.push_back(SpansToTokenLabels(r.spans, r.sentence_id,
                                        entry.token_count, subtask));
      expert.push_back(gold.Labels(r.sentence_id, subtask));
    }
    SubtaskQualification q{subtask, QualificationStatus::kNoTestRun, {}};
    if (!mine.empty()) {
      q.kappa = CohensKappa(mine, expert).kappa;
      if (!approval_ok) {
        q.status = QualificationStatus::kApprovalTooLow;
      } else if (*q.kappa < config.qualification_threshold) {
        q.status = QualificationStatus::kBelowThreshold;
      } else {
        q.status = QualificationStatus::kQualified;
      }
      result.profile.qualified[SubtaskIndex(subtask)] = q.qualified();
    }
    result.subtasks.push_back(q);
  }
  return result;
}

std::string_view EventKind(const StudyEvent &event) {
  struct Visitor {
    std::string_view operator()(const WorkerRegistered &) const {
      return "worker-registered";
    }
    std::string_view operator()(const WorkerQualified &) const {
      return "worker-qualified";
    }
    std::string_view operator()(const HitIssued &) const {
      return "hit-issued";
    }
    std::string_view operator()(const HitExpired &) const {
      return "hit-expired";
    }
    std::string_view operator()(const AnnotationSubmitted &) const {
      return "annotation-submitted";
    }
  };
  return std::visit(Visitor{}, event);
}

Study::Study(ExpertCorpus corpus, std::vector<Sentence> unlabeled,
             StudyConfig config, std::shared_ptr<const ExampleIndex> index,
             Clock clock)
    : corpus_(std::move(corpus)),
      config_(std::move(config)),
      index_(std::move(index)),
      clock_(std::move(clock)) {
  config_.Validate();
  std::sort(config_.subtasks.begin(), config_.subtasks.end());
  config_.subtasks.erase(
      std::unique(config_.subtasks.begin(), config_.subtasks.end()),
      config_.subtasks.end());
  if (index_ == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "study requires an example index");
  }
  if (index_->size() != corpus_.train.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "index has " + std::to_string(index_->size()) +
             " entries but the training set has " +
             std::to_string(corpus_.train.size()) + " sentences");
  }
  for (const Sentence &s : corpus_.train) {
    if (!index_->Contains(s.id())) {
      Fail(ErrorCode::kInvalidArgument,
           "index does not cover training sentence " + s.id());
    }
  }

  for (Sentence &s : unlabeled) {
    items_.push_back({std::move(s), Provenance::kUnlabeled});
  }
  for (const Sentence &s : corpus_.test) {
    items_.push_back({s, Provenance::kInjectedTest});
  }
  std::sort(items_.begin(), items_.end(),
            [](const AnnotationItem &a, const AnnotationItem &b) {
              return a.sentence.id() < b.sentence.id();
            });
  for (size_t i = 0; i < items_.size(); ++i) {
    const std::string &id = items_[i].sentence.id();
    if (!item_position_.emplace(id, i).second) {
      Fail(ErrorCode::kInvalidArgument,
           "sentence " + id + " appears twice in the annotation set");
    }
    if (index_->Contains(id)) {
      Fail(ErrorCode::kInvalidArgument,
           "annotation sentence " + id + " is also a training example");
    }
  }
  for (auto &slots : slots_) slots.assign(items_.size(), Slot{});
  for (const Sentence &s : TestRunSentences()) testrun_ids_.insert(s.id());
}

size_t Study::TotalSlots() const {
  return items_.size() * config_.subtasks.size() * config_.redundancy;
}

std::string Study::Fingerprint() const {
  std::string material = json(config_).dump();
  for (const AnnotationItem &item : items_) {
    material += '|';
    material += item.sentence.id();
    material += item.provenance == Provenance::kInjectedTest ? "#t" : "#u";
    material += std::to_string(item.sentence.size());
  }
  material += "||";
  material += index_->provider().name();
  for (const auto &e : index_->entries()) {
    material += '|';
    material += e.sentence.id();
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(material, 0)));
  return buf;
}

bool Study::SubtaskEnabled(Subtask s) const {
  return std::find(config_.subtasks.begin(), config_.subtasks.end(), s) !=
         config_.subtasks.end();
}

size_t Study::ItemPosition(const std::string &sentence_id) const {
  auto it = item_position_.find(sentence_id);
  if (it == item_position_.end()) {
    Fail(ErrorCode::kDataLoss,
         "sentence " + sentence_id + " is not in the annotation set");
  }
  return it->second;
}

void Study::Emit(const StudyEvent &event, Timestamp at) {
  if (sink_ != nullptr) sink_->Append(event, at);
  ApplyLocked(event);
}

WorkerProfile Study::RegisterWorker(std::string worker_id,
                                    double approval_rate,
                                    std::string credential) {
  if (!(approval_rate >= 0.0 && approval_rate <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "approval rate must be in [0, 1]");
  }
  std::unique_lock lock(mu_);
  if (worker_id.empty()) {
    size_t n = workers_.size() + 1;
    do {
      worker_id = "w" + std::to_string(n++);
    } while (workers_.count(worker_id) != 0);
  } else if (workers_.count(worker_id) != 0) {
    Fail(ErrorCode::kConflict, "worker " + worker_id + " already registered");
  }
  if (!credential.empty() && credentials_.count(credential) != 0) {
    Fail(ErrorCode::kConflict, "credential already in use");
  }
  WorkerProfile profile;
  profile.worker_id = std::move(worker_id);
  profile.approval_rate = approval_rate;
  profile.credential = std::move(credential);
  Emit(WorkerRegistered{profile}, clock_());
  return profile;
}

std::vector<Sentence> Study::TestRunSentences() const {
  std::vector<Sentence> out;
  const auto &entries = index_->entries();
  const size_t n = std::min(config_.testrun_sentences, entries.size());
  for (size_t i = 0; i < n; ++i) out.push_back(entries[i].sentence);
  return out;
}

QualificationResult Study::SubmitTestRun(
    const std::string &worker_id, std::vector<AnnotationRecord> records) {
  for (AnnotationRecord &r : records) {
    if (testrun_ids_.count(r.sentence_id) == 0) {
      Fail(ErrorCode::kInvalidArgument,
           "sentence " + r.sentence_id + " is not a test-run sentence");
    }
    r.worker_id = worker_id;
    for (Span &s : r.spans) s.subtask = r.subtask;
    const size_t n = corpus_.gold.at(r.sentence_id).token_count;
    for (const Span &s : r.spans) {
      if (!IsValidSpan(s, n)) {
        Fail(ErrorCode::kInvalidArgument,
             "span out of range for test-run sentence " + r.sentence_id);
      }
    }
  }
  std::unique_lock lock(mu_);
  auto it = workers_.find(worker_id);
  if (it == workers_.end()) {
    Fail(ErrorCode::kNotFound, "unknown worker " + worker_id);
  }
  QualificationResult result =
      QualifyWorker(it->second.profile, records, corpus_.gold, config_);
  Emit(WorkerQualified{worker_id, result.subtasks}, clock_());
  result.profile = it->second.profile;
  return result;
}

std::optional<Hit> Study::NextHit(const std::string &worker_id,
                                  Subtask subtask) {
  if (!SubtaskEnabled(subtask)) {
    Fail(ErrorCode::kInvalidArgument,
         "subtask " + std::string(SubtaskName(subtask)) +
             " is not part of this study");
  }
  std::unique_lock lock(mu_);
  auto it = workers_.find(worker_id);
  if (it == workers_.end()) {
    Fail(ErrorCode::kNotFound, "unknown worker " + worker_id);
  }
  const WorkerState &worker = it->second;
  if (!worker.profile.IsQualified(subtask)) {
    Fail(ErrorCode::kPermissionDenied,
         "worker " + worker_id + " is not qualified for subtask " +
             std::string(SubtaskName(subtask)));
  }

  const auto &slots = slots_[SubtaskIndex(subtask)];
  const auto &issued = worker.issued[SubtaskIndex(subtask)];
  size_t best = items_.size();
  for (size_t i = 0; i < items_.size(); ++i) {
    const Slot &slot = slots[i];
    if (slot.open + slot.completed >= config_.redundancy) continue;
    if (issued.count(i) != 0) continue;
    // Items are sorted by id, so the first minimum wins ties.
    if (best == items_.size() || slot.completed < slots[best].completed) {
      best = i;
    }
  }
  if (best == items_.size()) return std::nullopt;

  const Sentence &sentence = items_[best].sentence;
  Hit hit{"h" + std::to_string(next_hit_number_), sentence, subtask,
          index_->QueryTopK(sentence, subtask, config_.k), worker_id,
          clock_()};
  Emit(HitIssued{hit}, hit.issued_at);
  return hit;
}

AnnotationRecord Study::SubmitAnnotation(const AnnotationRecord &record) {
  std::unique_lock lock(mu_);
  auto it = hits_.find(record.hit_id);
  if (it == hits_.end()) {
    Fail(ErrorCode::kNotFound, "unknown HIT " + record.hit_id);
  }
  const HitState &state = it->second;
  if (state.status != HitStatus::kOpen) {
    Fail(ErrorCode::kConflict,
         "HIT " + record.hit_id + " is no longer open");
  }
  if (state.hit.issued_to != record.worker_id) {
    Fail(ErrorCode::kPermissionDenied,
         "HIT " + record.hit_id + " was not issued to " + record.worker_id);
  }
  if (!record.sentence_id.empty() &&
      record.sentence_id != state.hit.sentence.id()) {
    Fail(ErrorCode::kInvalidArgument,
         "record sentence does not match HIT " + record.hit_id);
  }
  AnnotationRecord stored;
  stored.hit_id = record.hit_id;
  stored.worker_id = record.worker_id;
  stored.sentence_id = state.hit.sentence.id();
  stored.subtask = state.hit.subtask;
  stored.feedback_useful = record.feedback_useful;
  std::vector<Span> spans = record.spans;
  for (Span &s : spans) {
    s.subtask = stored.subtask;
    if (!IsValidSpan(s, state.hit.sentence.size())) {
      Fail(ErrorCode::kInvalidArgument,
           "span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
               ") out of range for a sentence of " +
               std::to_string(state.hit.sentence.size()) + " tokens");
    }
  }
  stored.spans = NormalizeSpans(spans);
  stored.submitted_at = clock_();
  Emit(AnnotationSubmitted{stored}, stored.submitted_at);
  return stored;
}

void Study::ExpireLocked(const std::string &hit_id, Timestamp now) {
  Emit(HitExpired{hit_id, now}, now);
}

void Study::ExpireHit(const std::string &hit_id, Duration timeout) {
  std::unique_lock lock(mu_);
  auto it = hits_.find(hit_id);
  if (it == hits_.end()) Fail(ErrorCode::kNotFound, "unknown HIT " + hit_id);
  if (it->second.status != HitStatus::kOpen) {
    Fail(ErrorCode::kConflict, "HIT " + hit_id + " is not open");
  }
  const Timestamp now = clock_();
  if (now - it->second.hit.issued_at < timeout.count()) {
    Fail(ErrorCode::kFailedPrecondition,
         "HIT " + hit_id + " has not reached its timeout");
  }
  ExpireLocked(hit_id, now);
}

std::vector<std::string> Study::ExpireStale(Duration timeout) {
  std::unique_lock lock(mu_);
  const Timestamp now = clock_();
  std::vector<std::string> stale;
  for (const auto &[id, state] : hits_) {
    if (state.status == HitStatus::kOpen &&
        now - state.hit.issued_at >= timeout.count()) {
      stale.push_back(id);
    }
  }
  for (const std::string &id : stale) ExpireLocked(id, now);
  return stale;
}

void Study::Apply(const StudyEvent &event) {
  std::unique_lock lock(mu_);
  ApplyLocked(event);
}

void Study::ApplyLocked(const StudyEvent &event) {
  std::visit([this](const auto &e) { ApplyEvent(e); }, event);
}

void Study::ApplyEvent(const WorkerRegistered &e) {
  if (workers_.count(e.profile.worker_id) != 0) {
    Fail(ErrorCode::kDataLoss,
         "worker " + e.profile.worker_id + " registered twice");
  }
  WorkerState state;
  state.profile = e.profile;
  state.profile.qualified = {false, false, false};
  state.profile.annotation_count = {0, 0, 0};
  if (!state.profile.credential.empty()) {
    credentials_[state.profile.credential] = state.profile.worker_id;
  }
  workers_.emplace(e.profile.worker_id, std::move(state));
}

void Study::ApplyEvent(const WorkerQualified &e) {
  auto it = workers_.find(e.worker_id);
  if (it == workers_.end()) {
    Fail(ErrorCode::kDataLoss, "qualification for unknown worker " +
                                   e.worker_id);
  }
  for (const SubtaskQualification &q : e.results) {
    if (q.status == QualificationStatus::kNoTestRun) continue;
    it->second.profile.qualified[SubtaskIndex(q.subtask)] = q.qualified();
  }
}

void Study::ApplyEvent(const HitIssued &e) {
  const Hit &hit = e.hit;
  if (hits_.count(hit.hit_id) != 0) {
    Fail(ErrorCode::kDataLoss, "HIT " + hit.hit_id + " issued twice");
  }
  auto wit = workers_.find(hit.issued_to);
  if (wit == workers_.end()) {
    Fail(ErrorCode::kDataLoss, "HIT issued to unknown worker " +
                                   hit.issued_to);
  }
  const size_t pos = ItemPosition(hit.sentence.id());
  const size_t t = SubtaskIndex(hit.subtask);
  Slot &slot = slots_[t][pos];
  if (slot.open + slot.completed >= config_.redundancy) {
    Fail(ErrorCode::kDataLoss,
         "HIT " + hit.hit_id + " exceeds the redundancy cap");
  }
  if (!wit->second.issued[t].insert(pos).second) {
    Fail(ErrorCode::kDataLoss,
         "HIT " + hit.hit_id + " repeats a sentence for its worker");
  }
  ++slot.open;
  uint64_t number = 0;
  if (hit.hit_id.size() > 1 && hit.hit_id[0] == 'h') {
    try {
      number = std::stoull(hit.hit_id.substr(1));
    } catch (const std::exception &) {
      number = 0;
    }
  }
  next_hit_number_ = std::max(next_hit_number_, number + 1);
  hits_.emplace(hit.hit_id, HitState{hit, HitStatus::kOpen});
}

void Study::ApplyEvent(const HitExpired &e) {
  auto it = hits_.find(e.hit_id);
  if (it == hits_.end() || it->second.status != HitStatus::kOpen) {
    Fail(ErrorCode::kDataLoss, "expiry of HIT " + e.hit_id +
                                   " which is not open");
  }
  it->second.status = HitStatus::kExpired;
  const Hit &hit = it->second.hit;
  --slots_[SubtaskIndex(hit.subtask)][ItemPosition(hit.sentence.id())].open;
}

void Study::ApplyEvent(const AnnotationSubmitted &e) {
  auto it = hits_.find(e.record.hit_id);
  if (it == hits_.end() || it->second.status != HitStatus::kOpen) {
    Fail(ErrorCode::kDataLoss, "annotation for HIT " + e.record.hit_id +
                                   " which is not open");
  }
  const Hit &hit = it->second.hit;
  if (hit.issued_to != e.record.worker_id ||
      hit.sentence.id() != e.record.sentence_id ||
      hit.subtask != e.record.subtask) {
    Fail(ErrorCode::kDataLoss, "annotation for HIT " + e.record.hit_id +
                                   " does not match the HIT");
  }
  it->second.status = HitStatus::kCompleted;
  Slot &slot = slots_[SubtaskIndex(hit.subtask)][ItemPosition(hit.sentence.id())];
  --slot.open;
  ++slot.completed;
  ++workers_.at(hit.issued_to)
        .profile.annotation_count[SubtaskIndex(hit.subtask)];
  annotations_.push_back(e.record);
}

std::optional<WorkerProfile> Study::FindWorker(
    const std::string &worker_id) const {
  std::shared_lock lock(mu_);
  auto it = workers_.find(worker_id);
  if (it == workers_.end()) return std::nullopt;
  return it->second.profile;
}

std::optional<std::string> Study::WorkerForCredential(
    const std::string &credential) const {
  if (credential.empty()) return std::nullopt;
  std::shared_lock lock(mu_);
  auto it = credentials_.find(credential);
  if (it == credentials_.end()) return std::nullopt;
  return it->second;
}

std::optional<Hit> Study::FindHit(const std::string &hit_id) const {
  std::shared_lock lock(mu_);
  auto it = hits_.find(hit_id);
  if (it == hits_.end()) return std::nullopt;
  return it->second.hit;
}

std::optional<HitStatus> Study::GetHitStatus(const std::string &hit_id) const {
  std::shared_lock lock(mu_);
  auto it = hits_.find(hit_id);
  if (it == hits_.end()) return std::nullopt;
  return it->second.status;
}

std::map<Subtask, SubtaskProgress> Study::Progress() const {
  std::shared_lock lock(mu_);
  std::map<Subtask, SubtaskProgress> out;
  for (Subtask s : config_.subtasks) {
    SubtaskProgress p;
    for (const Slot &slot : slots_[SubtaskIndex(s)]) {
      p.completed += slot.completed;
      p.open += slot.open;
    }
    p.remaining = items_.size() * config_.redundancy - p.completed - p.open;
    out[s] = p;
  }
  return out;
}

std::vector<AnnotationRecord> Study::Annotations() const {
  std::shared_lock lock(mu_);
  return annotations_;
}

size_t Study::AnnotationCount() const {
  std::shared_lock lock(mu_);
  return annotations_.size();
}

json Study::StateSnapshot() const {
  std::shared_lock lock(mu_);
  json workers = json::array();
  for (const auto &[id, w] : workers_) {
    json issued = json::object();
    for (Subtask s : kAllSubtasks) {
      std::vector<size_t> positions(w.issued[SubtaskIndex(s)].begin(),
                                    w.issued[SubtaskIndex(s)].end());
      std::sort(positions.begin(), positions.end());
      issued[std::string(SubtaskName(s))] = positions;
    }
    workers.push_back({{"profile", w.profile}, {"issued", issued}});
  }
  json hits = json::array();
  for (const auto &[id, h] : hits_) {
    hits.push_back({{"hit", HitToJson(h.hit)},
                    {"status", static_cast<int>(h.status)}});
  }
  json slots = json::object();
  for (Subtask s : config_.subtasks) {
    json rows = json::array();
    for (const Slot &slot : slots_[SubtaskIndex(s)]) {
      rows.push_back({slot.open, slot.completed});
    }
    slots[std::string(SubtaskName(s))] = rows;
  }
  return {{"workers", workers},
          {"hits", hits},
          {"slots", slots},
          {"annotations", annotations_},
          {"next_hit_number", next_hit_number_}};
}

std::vector<std::string> Study::CheckInvariants() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> problems;
  std::array<std::vector<Slot>, 3> recount;
  for (auto &r : recount) r.assign(items_.size(), Slot{});
  std::set<std::tuple<std::string, std::string, int>> seen;
  size_t completed_hits = 0;
  for (const auto &[id, h] : hits_) {
    auto pos_it = item_position_.find(h.hit.sentence.id());
    if (pos_it == item_position_.end()) {
      problems.push_back("HIT " + id + " references an unknown sentence");
      continue;
    }
    Slot &slot = recount[SubtaskIndex(h.hit.subtask)][pos_it->second];
    if (h.status == HitStatus::kOpen) ++slot.open;
    if (h.status == HitStatus::kCompleted) {
      ++slot.completed;
      ++completed_hits;
    }
    if (!seen.emplace(h.hit.issued_to, h.hit.sentence.id(),
                      static_cast<int>(h.hit.subtask))
             .second) {
      problems.push_back("worker " + h.hit.issued_to + " holds sentence " +
                         h.hit.sentence.id() + " twice");
    }
  }
  for (Subtask s : kAllSubtasks) {
    const size_t t = SubtaskIndex(s);
    for (size_t i = 0; i < items_.size(); ++i) {
      const Slot &have = slots_[t][i];
      const Slot &want = recount[t][i];
      if (want.open + want.completed > config_.redundancy) {
        problems.push_back("sentence " + items_[i].sentence.id() +
                           " exceeds redundancy for " +
                           std::string(SubtaskName(s)));
      }
      if (have.open != want.open || have.completed != want.completed) {
        problems.push_back("counter drift on " + items_[i].sentence.id());
      }
    }
  }
  if (completed_hits != annotations_.size()) {
    problems.push_back("annotation count does not match completed HITs");
  }
  return problems;
}

}  // namespace dexa
