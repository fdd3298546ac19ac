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

#include "dexa/event_log.h"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dexa/error.h"

namespace dexa {

using json = nlohmann::json;

namespace {

json Canonical(const LogRecord &record) {
  return {{"at", record.at},
          {"kind", record.kind},
          {"payload", record.payload},
          {"seq", record.seq}};
}

}  // namespace

std::string RecordChecksum(const LogRecord &record) {
  const std::string text = Canonical(record).dump();
  const uLong crc = crc32(crc32(0L, Z_NULL, 0),
                          reinterpret_cast<const Bytef *>(text.data()),
                          static_cast<uInt>(text.size()));
  char hex[9];
  std::snprintf(hex, sizeof(hex), "%08lx", static_cast<unsigned long>(crc));
  return hex;
}

std::string EncodeRecord(const LogRecord &record) {
  json j = Canonical(record);
  j["crc"] = RecordChecksum(record);
  return j.dump() + "\n";
}

LogContents ReadEventLog(const std::filesystem::path &path) {
  LogContents out;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (std::filesystem::exists(path)) {
      Fail(ErrorCode::kUnavailable, "cannot read " + path.string());
    }
    return out;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string data = buffer.str();

  size_t pos = 0;
  size_t line_number = 0;
  while (pos < data.size()) {
    const size_t newline = data.find('\n', pos);
    if (newline == std::string::npos) {
      out.torn_tail = true;
      break;
    }
    ++line_number;
    const std::string line = data.substr(pos, newline - pos);
    pos = newline + 1;
    const std::string where = path.string() + " line " +
                              std::to_string(line_number);
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("seq") ||
        !j["seq"].is_number_unsigned()) {
      Fail(ErrorCode::kDataLoss, where + ": unreadable event record");
    }
    LogRecord record;
    record.seq = j["seq"].get<uint64_t>();
    const std::string seq_text = "event seq " + std::to_string(record.seq);
    try {
      record.at = j.at("at").get<Timestamp>();
      record.kind = j.at("kind").get<std::string>();
      record.payload = j.at("payload");
      if (j.at("crc").get<std::string>() != RecordChecksum(record)) {
        Fail(ErrorCode::kDataLoss,
             where + ": checksum mismatch at " + seq_text);
      }
    } catch (const json::exception &e) {
      Fail(ErrorCode::kDataLoss,
           where + ": malformed " + seq_text + ": " + e.what());
    }
    const uint64_t expected =
        out.records.empty() ? 1 : out.records.back().seq + 1;
    if (record.seq != expected) {
      Fail(ErrorCode::kDataLoss, where + ": " + seq_text + " out of order");
    }
    out.records.push_back(std::move(record));
    out.valid_bytes = pos;
  }
  return out;
}

EventLog::EventLog(const std::filesystem::path &path, Options options)
    : path_(path), options_(options) {
  LogContents contents = ReadEventLog(path_);
  existing_ = std::move(contents.records);
  torn_tail_ = contents.torn_tail;
  last_seq_ = existing_.empty() ? 0 : existing_.back().seq;
  if (torn_tail_) {
    std::filesystem::resize_file(path_, contents.valid_bytes);
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC,
               0644);
  if (fd_ < 0) {
    Fail(ErrorCode::kUnavailable,
         "cannot open " + path_.string() + ": " + std::strerror(errno));
  }
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

uint64_t EventLog::Append(const std::string &kind, const json &payload,
                          Timestamp at) {
  std::lock_guard lock(mu_);
  LogRecord record{last_seq_ + 1, at, kind, payload};
  const std::string line = EncodeRecord(record);
  const off_t start = ::lseek(fd_, 0, SEEK_END);
  size_t written = 0;
  while (written < line.size()) {
    const ssize_t n =
        ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string reason = std::strerror(errno);
      // Drop the partial line so later appends stay parseable.
      if (start >= 0 && ::ftruncate(fd_, start) != 0) {
        Fail(ErrorCode::kDataLoss, "event log left with a partial record");
      }
      Fail(ErrorCode::kUnavailable, "event log write failed: " + reason);
    }
    written += static_cast<size_t>(n);
  }
  if (options_.sync && ::fsync(fd_) != 0) {
    Fail(ErrorCode::kUnavailable,
         "event log fsync failed: " + std::string(std::strerror(errno)));
  }
  last_seq_ = record.seq;
  return record.seq;
}

uint64_t EventLog::last_seq() const {
  std::lock_guard lock(mu_);
  return last_seq_;
}

}  // namespace dexa
