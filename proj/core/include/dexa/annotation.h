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

#ifndef DEXA_ANNOTATION_H_
#define DEXA_ANNOTATION_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dexa/corpus.h"

namespace dexa {

// Milliseconds since the Unix epoch.
using Timestamp = int64_t;

// One worker's labels for one HIT plus the usefulness answer
// ("was at least one of the examples useful?").
struct AnnotationRecord {
  std::string hit_id;
  std::string worker_id;
  std::string sentence_id;
  Subtask subtask = Subtask::kParticipants;
  std::vector<Span> spans;
  bool feedback_useful = false;
  Timestamp submitted_at = 0;

  bool operator==(const AnnotationRecord &) const = default;
};

// Annotation dump: JSON lines with the field names above; spans are
// [[start, end], ...] pairs, subtask is "P", "I" or "O".
std::vector<AnnotationRecord> ParseAnnotationDump(std::istream &in);
std::vector<AnnotationRecord> LoadAnnotationDump(const std::string &path);
void WriteAnnotationDump(std::ostream &out,
                         std::span<const AnnotationRecord> records);

}  // namespace dexa

#endif  // DEXA_ANNOTATION_H_
