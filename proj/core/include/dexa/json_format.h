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

#ifndef DEXA_JSON_FORMAT_H_
#define DEXA_JSON_FORMAT_H_

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dexa/aggregation.h"
#include "dexa/agreement.h"
#include "dexa/annotation.h"
#include "dexa/corpus.h"
#include "dexa/retrieval.h"
#include "dexa/study.h"

// JSON mappings of the domain types. Spans are written as [start, end]
// pairs; their sub-task comes from the enclosing object.
namespace dexa {

nlohmann::json SpansToJson(std::span<const Span> spans);
// Throws kInvalidArgument for anything but a list of non-negative integer
// pairs. Range checks are left to the caller.
std::vector<Span> SpansFromJson(const nlohmann::json &j, Subtask subtask);

void to_json(nlohmann::json &j, const AnnotationRecord &r);
void from_json(const nlohmann::json &j, AnnotationRecord &r);

void to_json(nlohmann::json &j, const DynamicExample &e);
void to_json(nlohmann::json &j, const StudyConfig &c);
void from_json(const nlohmann::json &j, StudyConfig &c);
void to_json(nlohmann::json &j, const WorkerProfile &w);
void from_json(const nlohmann::json &j, WorkerProfile &w);
void to_json(nlohmann::json &j, const SubtaskQualification &q);
void from_json(const nlohmann::json &j, SubtaskQualification &q);
void to_json(nlohmann::json &j, const KappaReport &k);

// Complete HIT, including example payloads; used by the event log.
nlohmann::json HitToJson(const Hit &hit);
Hit HitFromJson(const nlohmann::json &j);

// The document a worker receives: hit id, sub-task, the sentence tokens
// and the dynamic examples. Carries nothing that reveals whether the
// sentence is an injected test item, and never its gold spans.
nlohmann::json WorkerFacingHit(const Hit &hit);

nlohmann::json EventPayload(const StudyEvent &event);
// Throws kDataLoss for an unknown kind or malformed payload.
StudyEvent EventFromPayload(std::string_view kind,
                            const nlohmann::json &payload);

}  // namespace dexa

#endif  // DEXA_JSON_FORMAT_H_
