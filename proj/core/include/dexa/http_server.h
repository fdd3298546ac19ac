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

#ifndef DEXA_HTTP_SERVER_H_
#define DEXA_HTTP_SERVER_H_

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "dexa/study.h"
#include "dexa/study_service.h"

namespace dexa {

struct ServerOptions {
  std::string host = "127.0.0.1";
  // 0 picks a free port.
  int port = 8080;
  // Open HITs older than this are expired by a background sweep.
  std::optional<Duration> hit_timeout;
  // Served under "/" when set (the annotation client bundle).
  std::string static_dir;
  int threads = 8;
};

// Parses "host:port"; a bare port binds 127.0.0.1. Throws
// kInvalidArgument for anything else.
std::pair<std::string, int> ParseBindAddress(const std::string &address);

// JSON-over-HTTP front end of a StudyService.
//
//   POST /workers                      {approval_rate} -> {worker_id, token}
//   GET  /workers/{id}/testrun         test-run sentences          (auth)
//   POST /workers/{id}/testrun         {records} -> {qualified, kappa, ..}
//   GET  /hits/next?subtask=P|I|O      HIT, or 204 when exhausted  (auth)
//   POST /hits/{id}/annotation         {spans, feedback_useful}    (auth)
//   GET  /admin/progress
//   GET  /admin/report[?repeats=&seed=]
//   POST /admin/hits/{id}/expire[?timeout_ms=]
//
// Workers authenticate with "Authorization: Bearer <token>". Errors are
// {"error": {"code", "message"}} with 400/401/403/404/409/412/500/503.
class AnnotationServer {
 public:
  AnnotationServer(StudyService &service, ServerOptions options);
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer &) = delete;
  AnnotationServer &operator=(const AnnotationServer &) = delete;

  // Binds and starts serving on a background thread; returns the bound
  // port. Throws kUnavailable when the address cannot be bound.
  int Start();
  // Blocks until Stop() is called (from another thread or a signal path).
  void Wait();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dexa

#endif  // DEXA_HTTP_SERVER_H_
