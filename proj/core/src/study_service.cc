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

#include "dexa/study_service.h"

#include <cstdio>
#include <random>

#include "dexa/error.h"
#include "dexa/json_format.h"

namespace dexa {

using json = nlohmann::json;

namespace {

constexpr char kStudyCreated[] = "study-created";

}  // namespace

StudyService::StudyService(ExpertCorpus corpus,
                           std::vector<Sentence> unlabeled,
                           StudyConfig config,
                           std::shared_ptr<const ExampleIndex> index,
                           ServiceOptions options, Clock clock)
    : study_(std::make_unique<Study>(std::move(corpus), std::move(unlabeled),
                                     std::move(config), std::move(index),
                                     clock)) {
  std::filesystem::create_directories(options.store_dir);
  log_ = std::make_unique<EventLog>(options.store_dir / kEventLogName,
                                    EventLog::Options{options.sync});
  const std::string fingerprint = study_->Fingerprint();
  const auto &records = log_->existing();
  if (records.empty()) {
    log_->Append(kStudyCreated,
                 {{"config", study_->config()}, {"fingerprint", fingerprint}},
                 clock());
  } else {
    const LogRecord &first = records.front();
    if (first.kind != kStudyCreated) {
      Fail(ErrorCode::kDataLoss,
           "event seq " + std::to_string(first.seq) + ": expected " +
               kStudyCreated + ", found " + first.kind);
    }
    const std::string stored = first.payload.value("fingerprint", "");
    if (stored != fingerprint) {
      Fail(ErrorCode::kFailedPrecondition,
           "store " + options.store_dir.string() +
               " belongs to a different study (fingerprint " + stored +
               ", expected " + fingerprint + ")");
    }
    for (size_t i = 1; i < records.size(); ++i) {
      const LogRecord &r = records[i];
      try {
        study_->Apply(EventFromPayload(r.kind, r.payload));
      } catch (const Error &e) {
        Fail(ErrorCode::kDataLoss,
             "event seq " + std::to_string(r.seq) + ": " + e.what());
      }
      ++replayed_;
    }
  }
  study_->SetEventSink(this);
}

StudyService::~StudyService() = default;

void StudyService::Append(const StudyEvent &event, Timestamp at) {
  log_->Append(std::string(EventKind(event)), EventPayload(event), at);
}

Registration StudyService::RegisterWorker(double approval_rate) {
  std::string token = GenerateToken();
  WorkerProfile profile = study_->RegisterWorker("", approval_rate, token);
  return {std::move(profile), std::move(token)};
}

std::optional<std::string> StudyService::Authenticate(
    const std::string &token) const {
  if (token.empty()) return std::nullopt;
  return study_->WorkerForCredential(token);
}

json StudyService::Report(const ReportOptions &options) const {
  const ExpertCorpus &corpus = study_->corpus();
  std::vector<std::string> test_ids;
  for (const Sentence &s : corpus.test) test_ids.push_back(s.id());
  const GoldLabels gold = corpus.gold.Restrict(test_ids);
  const std::vector<AnnotationRecord> records = study_->Annotations();
  return BuildReport(records, gold, test_ids.size(), options);
}

std::string GenerateToken() {
  std::random_device device;
  std::string token;
  for (int i = 0; i < 4; ++i) {
    char hex[9];
    std::snprintf(hex, sizeof(hex), "%08x",
                  static_cast<unsigned>(device()));
    token += hex;
  }
  return token;
}

std::vector<AnnotationRecord> ExportAnnotations(
    const std::filesystem::path &store_dir) {
  const std::filesystem::path path = store_dir / kEventLogName;
  if (!std::filesystem::exists(path)) {
    Fail(ErrorCode::kNotFound, "no event log at " + path.string());
  }
  std::vector<AnnotationRecord> out;
  for (const LogRecord &r : ReadEventLog(path).records) {
    if (r.kind != "annotation-submitted") continue;
    try {
      out.push_back(r.payload.get<AnnotationRecord>());
    } catch (const std::exception &e) {
      Fail(ErrorCode::kDataLoss,
           "event seq " + std::to_string(r.seq) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dexa
