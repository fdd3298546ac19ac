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

#include "dexa/json_format.h"

#include <fstream>
#include <istream>
#include <ostream>

#include "dexa/error.h"

namespace dexa {

using json = nlohmann::json;

json SpansToJson(std::span<const Span> spans) {
  json out = json::array();
  for (const Span &s : spans) out.push_back({s.start, s.end});
  return out;
}

std::vector<Span> SpansFromJson(const json &j, Subtask subtask) {
  if (!j.is_array()) {
    Fail(ErrorCode::kInvalidArgument, "spans must be a list of pairs");
  }
  std::vector<Span> spans;
  for (const json &pair : j) {
    if (!pair.is_array() || pair.size() != 2 ||
        !pair[0].is_number_integer() || !pair[1].is_number_integer() ||
        pair[0].get<long long>() < 0 || pair[1].get<long long>() < 0) {
      Fail(ErrorCode::kInvalidArgument, "malformed span " + pair.dump());
    }
    spans.push_back({subtask, pair[0].get<size_t>(), pair[1].get<size_t>()});
  }
  return spans;
}

void to_json(json &j, const AnnotationRecord &r) {
  j = json{{"hit_id", r.hit_id},
           {"worker_id", r.worker_id},
           {"sentence_id", r.sentence_id},
           {"subtask", SubtaskName(r.subtask)},
           {"spans", SpansToJson(r.spans)},
           {"feedback_useful", r.feedback_useful},
           {"submitted_at", r.submitted_at}};
}

void from_json(const json &j, AnnotationRecord &r) {
  r.hit_id = j.value("hit_id", std::string());
  r.worker_id = j.at("worker_id").get<std::string>();
  r.sentence_id = j.at("sentence_id").get<std::string>();
  r.subtask = ParseSubtask(j.at("subtask").get<std::string>());
  r.spans = SpansFromJson(j.at("spans"), r.subtask);
  r.feedback_useful = j.value("feedback_useful", false);
  r.submitted_at = j.value("submitted_at", Timestamp{0});
}

std::vector<AnnotationRecord> ParseAnnotationDump(std::istream &in) {
  std::vector<AnnotationRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(json::parse(line).get<AnnotationRecord>());
    } catch (const json::exception &e) {
      Fail(ErrorCode::kInvalidArgument,
           "annotation dump line " + std::to_string(line_no) + ": " +
               e.what());
    } catch (const Error &e) {
      Fail(e.code(), "annotation dump line " + std::to_string(line_no) +
                         ": " + e.what());
    }
  }
  return records;
}

std::vector<AnnotationRecord> LoadAnnotationDump(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open " + path);
  return ParseAnnotationDump(in);
}

void WriteAnnotationDump(std::ostream &out,
                         std::span<const AnnotationRecord> records) {
  for (const AnnotationRecord &r : records) out << json(r).dump() << '\n';
}

void to_json(json &j, const DynamicExample &e) {
  j = json{{"sentence_id", e.sentence_id},
           {"tokens", e.tokens},
           {"visible_spans", SpansToJson(e.visible_spans)},
           {"score", e.score},
           {"rank", e.rank}};
}

namespace {

DynamicExample ExampleFromJson(const json &j, Subtask subtask) {
  DynamicExample e;
  e.sentence_id = j.at("sentence_id").get<std::string>();
  e.tokens = j.at("tokens").get<std::vector<std::string>>();
  e.visible_spans = SpansFromJson(j.at("visible_spans"), subtask);
  e.score = j.at("score").get<double>();
  e.rank = j.at("rank").get<size_t>();
  return e;
}

json SubtaskList(const std::vector<Subtask> &subtasks) {
  json out = json::array();
  for (Subtask s : subtasks) out.push_back(SubtaskName(s));
  return out;
}

}  // namespace

void to_json(json &j, const StudyConfig &c) {
  j = json{{"subtasks", SubtaskList(c.subtasks)},
           {"k", c.k},
           {"redundancy", c.redundancy},
           {"min_approval_rate", c.min_approval_rate},
           {"qualification_threshold", c.qualification_threshold},
           {"worker_filter_fraction", c.worker_filter_fraction},
           {"testrun_sentences", c.testrun_sentences}};
}

void from_json(const json &j, StudyConfig &c) {
  c.subtasks.clear();
  for (const json &s : j.at("subtasks")) {
    c.subtasks.push_back(ParseSubtask(s.get<std::string>()));
  }
  c.k = j.at("k").get<size_t>();
  c.redundancy = j.at("redundancy").get<size_t>();
  c.min_approval_rate = j.at("min_approval_rate").get<double>();
  c.qualification_threshold = j.at("qualification_threshold").get<double>();
  c.worker_filter_fraction = j.at("worker_filter_fraction").get<double>();
  c.testrun_sentences = j.value("testrun_sentences", size_t{5});
}

void to_json(json &j, const WorkerProfile &w) {
  json qualified = json::object();
  json counts = json::object();
  for (Subtask s : kAllSubtasks) {
    qualified[std::string(SubtaskName(s))] = w.qualified[SubtaskIndex(s)];
    counts[std::string(SubtaskName(s))] = w.annotation_count[SubtaskIndex(s)];
  }
  j = json{{"worker_id", w.worker_id},
           {"approval_rate", w.approval_rate},
           {"qualified", qualified},
           {"annotation_count", counts},
           {"credential", w.credential}};
}

void from_json(const json &j, WorkerProfile &w) {
  w.worker_id = j.at("worker_id").get<std::string>();
  w.approval_rate = j.at("approval_rate").get<double>();
  w.credential = j.value("credential", std::string());
  for (Subtask s : kAllSubtasks) {
    const std::string key(SubtaskName(s));
    if (j.contains("qualified")) {
      w.qualified[SubtaskIndex(s)] = j["qualified"].value(key, false);
    }
    if (j.contains("annotation_count")) {
      w.annotation_count[SubtaskIndex(s)] =
          j["annotation_count"].value(key, size_t{0});
    }
  }
}

void to_json(json &j, const SubtaskQualification &q) {
  j = json{{"subtask", SubtaskName(q.subtask)},
           {"status", QualificationStatusName(q.status)},
           {"qualified", q.qualified()},
           {"kappa", q.kappa ? json(*q.kappa) : json(nullptr)}};
}

void from_json(const json &j, SubtaskQualification &q) {
  q.subtask = ParseSubtask(j.at("subtask").get<std::string>());
  const std::string status = j.at("status").get<std::string>();
  bool matched = false;
  for (QualificationStatus s :
       {QualificationStatus::kQualified, QualificationStatus::kApprovalTooLow,
        QualificationStatus::kBelowThreshold,
        QualificationStatus::kNoTestRun}) {
    if (QualificationStatusName(s) == status) {
      q.status = s;
      matched = true;
    }
  }
  if (!matched) {
    Fail(ErrorCode::kInvalidArgument, "unknown qualification status " + status);
  }
  q.kappa.reset();
  if (j.contains("kappa") && !j["kappa"].is_null()) {
    q.kappa = j["kappa"].get<double>();
  }
}

void to_json(json &j, const KappaReport &k) {
  j = json{{"kappa", k.kappa},
           {"observed_agreement", k.observed_agreement},
           {"expected_agreement", k.expected_agreement},
           {"token_count", k.token_count}};
}

json HitToJson(const Hit &hit) {
  return {{"hit_id", hit.hit_id},
          {"sentence_id", hit.sentence.id()},
          {"tokens", hit.sentence.tokens()},
          {"subtask", SubtaskName(hit.subtask)},
          {"examples", hit.examples},
          {"issued_to", hit.issued_to},
          {"issued_at", hit.issued_at}};
}

Hit HitFromJson(const json &j) {
  Hit hit{j.at("hit_id").get<std::string>(),
          Sentence(j.at("sentence_id").get<std::string>(),
                   j.at("tokens").get<std::vector<std::string>>()),
          ParseSubtask(j.at("subtask").get<std::string>()),
          {},
          j.at("issued_to").get<std::string>(),
          j.at("issued_at").get<Timestamp>()};
  for (const json &e : j.at("examples")) {
    hit.examples.push_back(ExampleFromJson(e, hit.subtask));
  }
  return hit;
}

json WorkerFacingHit(const Hit &hit) {
  return {{"hit_id", hit.hit_id},
          {"subtask", SubtaskName(hit.subtask)},
          {"sentence",
           {{"sentence_id", hit.sentence.id()},
            {"tokens", hit.sentence.tokens()}}},
          {"examples", hit.examples},
          {"issued_at", hit.issued_at}};
}

json EventPayload(const StudyEvent &event) {
  struct Visitor {
    json operator()(const WorkerRegistered &e) const {
      return {{"worker_id", e.profile.worker_id},
              {"approval_rate", e.profile.approval_rate},
              {"credential", e.profile.credential}};
    }
    json operator()(const WorkerQualified &e) const {
      return {{"worker_id", e.worker_id}, {"results", e.results}};
    }
    json operator()(const HitIssued &e) const { return HitToJson(e.hit); }
    json operator()(const HitExpired &e) const {
      return {{"hit_id", e.hit_id}, {"at", e.at}};
    }
    json operator()(const AnnotationSubmitted &e) const { return e.record; }
  };
  return std::visit(Visitor{}, event);
}

StudyEvent EventFromPayload(std::string_view kind, const json &payload) {
  try {
    if (kind == "worker-registered") {
      WorkerProfile p;
      p.worker_id = payload.at("worker_id").get<std::string>();
      p.approval_rate = payload.at("approval_rate").get<double>();
      p.credential = payload.value("credential", std::string());
      return WorkerRegistered{p};
    }
    if (kind == "worker-qualified") {
      return WorkerQualified{
          payload.at("worker_id").get<std::string>(),
          payload.at("results").get<std::vector<SubtaskQualification>>()};
    }
    if (kind == "hit-issued") return HitIssued{HitFromJson(payload)};
    if (kind == "hit-expired") {
      return HitExpired{payload.at("hit_id").get<std::string>(),
                        payload.at("at").get<Timestamp>()};
    }
    if (kind == "annotation-submitted") {
      return AnnotationSubmitted{payload.get<AnnotationRecord>()};
    }
  } catch (const json::exception &e) {
    Fail(ErrorCode::kDataLoss,
         "malformed " + std::string(kind) + " payload: " + e.what());
  } catch (const Error &e) {
    Fail(ErrorCode::kDataLoss,
         "malformed " + std::string(kind) + " payload: " + e.what());
  }
  Fail(ErrorCode::kDataLoss, "unknown event kind " + std::string(kind));
}

}  // namespace dexa
