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

#ifndef DEXA_STUDY_SERVICE_H_
#define DEXA_STUDY_SERVICE_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dexa/annotation.h"
#include "dexa/event_log.h"
#include "dexa/report.h"
#include "dexa/study.h"

namespace dexa {

inline constexpr char kEventLogName[] = "events.jsonl";

struct ServiceOptions {
  std::filesystem::path store_dir;
  bool sync = true;
};

struct Registration {
  WorkerProfile profile;
  std::string token;
};

// A study whose every mutation is written to the event log in
// `store_dir` before it takes effect. The first record describes the study
// (configuration and fingerprint); reopening a store replays the remaining
// records and refuses a store that belongs to a different study.
class StudyService : private EventSink {
 public:
  StudyService(ExpertCorpus corpus, std::vector<Sentence> unlabeled,
               StudyConfig config, std::shared_ptr<const ExampleIndex> index,
               ServiceOptions options, Clock clock = SystemClock());
  ~StudyService() override;

  Study &study() { return *study_; }
  const Study &study() const { return *study_; }
  size_t replayed_events() const { return replayed_; }
  bool recovered_torn_tail() const { return log_->recovered_torn_tail(); }

  // Registers a worker under the next free id with a fresh bearer token.
  Registration RegisterWorker(double approval_rate);
  std::optional<std::string> Authenticate(const std::string &token) const;

  // BuildReport over the annotations collected so far, against the gold of
  // the injected test sentences.
  nlohmann::json Report(const ReportOptions &options = {}) const;

 private:
  void Append(const StudyEvent &event, Timestamp at) override;

  std::unique_ptr<Study> study_;
  std::unique_ptr<EventLog> log_;
  size_t replayed_ = 0;
};

// 32 hex digits from the system entropy source.
std::string GenerateToken();

// The annotation-submitted records of a store, in log order.
std::vector<AnnotationRecord> ExportAnnotations(
    const std::filesystem::path &store_dir);

}  // namespace dexa

#endif  // DEXA_STUDY_SERVICE_H_
