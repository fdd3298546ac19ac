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

#ifndef DEXA_EVENT_LOG_H_
#define DEXA_EVENT_LOG_H_

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dexa/annotation.h"

namespace dexa {

struct LogRecord {
  uint64_t seq = 0;
  Timestamp at = 0;
  std::string kind;
  nlohmann::json payload;
};

// CRC-32 of the canonical serialization of {at, kind, payload, seq}, as
// eight lower-case hex digits.
std::string RecordChecksum(const LogRecord &record);

// One JSON line per record:
//   {"at":..,"crc":"..","kind":"..","payload":{..},"seq":N}
std::string EncodeRecord(const LogRecord &record);

struct LogContents {
  std::vector<LogRecord> records;
  // Bytes covered by complete records. A final line without a newline is a
  // torn write and is not counted.
  uint64_t valid_bytes = 0;
  bool torn_tail = false;
};

// Reads a log. A complete line that fails to parse, carries a wrong
// checksum or breaks the seq order throws kDataLoss naming the seq (or the
// line number when the seq is unreadable). A missing file reads as empty.
LogContents ReadEventLog(const std::filesystem::path &path);

// Append-only writer. Opening truncates a torn tail, so the next record
// starts on a fresh line.
class EventLog {
 public:
  struct Options {
    // fsync after every append.
    bool sync = true;
  };

  EventLog(const std::filesystem::path &path, Options options);
  ~EventLog();

  EventLog(const EventLog &) = delete;
  EventLog &operator=(const EventLog &) = delete;

  // Records present when the log was opened.
  const std::vector<LogRecord> &existing() const { return existing_; }
  bool recovered_torn_tail() const { return torn_tail_; }

  // Assigns the next seq, writes and (optionally) syncs. Throws
  // kUnavailable when the write fails.
  uint64_t Append(const std::string &kind, const nlohmann::json &payload,
                  Timestamp at);

  uint64_t last_seq() const;
  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
  Options options_;
  std::vector<LogRecord> existing_;
  bool torn_tail_ = false;
  int fd_ = -1;
  mutable std::mutex mu_;
  uint64_t last_seq_ = 0;
};

}  // namespace dexa

#endif  // DEXA_EVENT_LOG_H_
