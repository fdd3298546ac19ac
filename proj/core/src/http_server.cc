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

#include "dexa/http_server.h"

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dexa/error.h"
#include "dexa/json_format.h"

namespace dexa {

using json = nlohmann::json;

namespace {

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return 400;
    case ErrorCode::kPermissionDenied:
      return 403;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kFailedPrecondition:
      return 412;
    case ErrorCode::kDataLoss:
      return 500;
    case ErrorCode::kUnavailable:
      return 503;
  }
  return 500;
}

void SendJson(httplib::Response &res, const json &body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response &res, int status, std::string_view code,
               const std::string &message) {
  SendJson(res, {{"error", {{"code", code}, {"message", message}}}}, status);
}

json ParseBody(const httplib::Request &req) {
  json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) {
    Fail(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  }
  return body;
}

template <typename T>
T Field(const json &body, const char *name) {
  auto it = body.find(name);
  if (it == body.end()) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("missing field '") + name + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception &) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("field '") + name + "' has the wrong type");
  }
}

std::string BearerToken(const httplib::Request &req) {
  const std::string header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.size() <= kPrefix.size() || !header.starts_with(kPrefix)) {
    return {};
  }
  return header.substr(kPrefix.size());
}

struct Unauthenticated {};

}  // namespace

std::pair<std::string, int> ParseBindAddress(const std::string &address) {
  std::string host = "127.0.0.1";
  std::string port = address;
  const size_t colon = address.rfind(':');
  if (colon != std::string::npos) {
    host = address.substr(0, colon);
    port = address.substr(colon + 1);
  }
  char *end = nullptr;
  const long value = std::strtol(port.c_str(), &end, 10);
  if (host.empty() || port.empty() || *end != '\0' || value < 0 ||
      value > 65535) {
    Fail(ErrorCode::kInvalidArgument, "bad bind address '" + address + "'");
  }
  return {host, static_cast<int>(value)};
}

struct AnnotationServer::Impl {
  StudyService &service;
  ServerOptions options;
  httplib::Server http;
  std::thread listener;
  std::thread sweeper;
  std::mutex mu;
  std::condition_variable cv;
  bool stopping = false;
  bool stopped = false;

  Impl(StudyService &s, ServerOptions o) : service(s), options(std::move(o)) {}

  std::string Authenticate(const httplib::Request &req) {
    std::optional<std::string> worker =
        service.Authenticate(BearerToken(req));
    if (!worker) throw Unauthenticated{};
    return *worker;
  }

  // Runs `body` and turns failures into error responses.
  template <typename F>
  httplib::Server::Handler Wrap(F body) {
    return [this, body](const httplib::Request &req, httplib::Response &res) {
      try {
        body(req, res);
      } catch (const Unauthenticated &) {
        SendError(res, 401, "UNAUTHENTICATED",
                  "missing or unknown bearer token");
      } catch (const Error &e) {
        SendError(res, HttpStatus(e.code()), ErrorCodeName(e.code()),
                  e.what());
      } catch (const std::exception &e) {
        SendError(res, 500, "INTERNAL", e.what());
      }
    };
  }

  void Routes() {
    http.Post("/workers", Wrap([this](const auto &req, auto &res) {
      const json body = ParseBody(req);
      Registration r =
          service.RegisterWorker(Field<double>(body, "approval_rate"));
      SendJson(res, {{"worker_id", r.profile.worker_id}, {"token", r.token}},
               201);
    }));

    http.Get(R"(/workers/([^/]+)/testrun)",
             Wrap([this](const auto &req, auto &res) {
               RequireSelf(req, req.matches[1]);
               json sentences = json::array();
               for (const Sentence &s : service.study().TestRunSentences()) {
                 sentences.push_back(
                     {{"sentence_id", s.id()}, {"tokens", s.tokens()}});
               }
               json subtasks = json::array();
               for (Subtask s : service.study().config().subtasks) {
                 subtasks.push_back(SubtaskName(s));
               }
               SendJson(res,
                        {{"sentences", sentences}, {"subtasks", subtasks}});
             }));

    http.Post(R"(/workers/([^/]+)/testrun)",
              Wrap([this](const auto &req, auto &res) {
                const std::string worker_id = req.matches[1];
                RequireSelf(req, worker_id);
                const json body = ParseBody(req);
                const json records = Field<json>(body, "records");
                if (!records.is_array()) {
                  Fail(ErrorCode::kInvalidArgument, "records must be a list");
                }
                std::vector<AnnotationRecord> parsed;
                for (const json &r : records) {
                  if (!r.is_object()) {
                    Fail(ErrorCode::kInvalidArgument,
                         "each record must be an object");
                  }
                  AnnotationRecord record;
                  record.worker_id = worker_id;
                  record.sentence_id = Field<std::string>(r, "sentence_id");
                  record.subtask =
                      ParseSubtask(Field<std::string>(r, "subtask"));
                  record.spans = SpansFromJson(Field<json>(r, "spans"),
                                               record.subtask);
                  record.feedback_useful = r.value("feedback_useful", false);
                  parsed.push_back(std::move(record));
                }
                QualificationResult result =
                    service.study().SubmitTestRun(worker_id, parsed);
                json subtasks = json::object();
                double kappa_sum = 0.0;
                size_t graded = 0;
                bool any_qualified = false;
                for (const SubtaskQualification &q : result.subtasks) {
                  subtasks[std::string(SubtaskName(q.subtask))] = q;
                  if (q.kappa) {
                    kappa_sum += *q.kappa;
                    ++graded;
                  }
                  any_qualified = any_qualified || q.qualified();
                }
                SendJson(res, {{"qualified", any_qualified},
                               {"kappa", graded == 0
                                             ? json(nullptr)
                                             : json(kappa_sum / graded)},
                               {"subtasks", subtasks}});
              }));

    http.Get("/hits/next", Wrap([this](const auto &req, auto &res) {
      const std::string worker_id = Authenticate(req);
      if (!req.has_param("subtask")) {
        Fail(ErrorCode::kInvalidArgument, "missing subtask parameter");
      }
      const Subtask subtask = ParseSubtask(req.get_param_value("subtask"));
      std::optional<Hit> hit = service.study().NextHit(worker_id, subtask);
      if (!hit) {
        res.status = 204;
        return;
      }
      SendJson(res, WorkerFacingHit(*hit));
    }));

    http.Post(R"(/hits/([^/]+)/annotation)",
              Wrap([this](const auto &req, auto &res) {
                AnnotationRecord record;
                record.worker_id = Authenticate(req);
                record.hit_id = req.matches[1];
                const json body = ParseBody(req);
                std::optional<Hit> hit = service.study().FindHit(record.hit_id);
                if (!hit) {
                  Fail(ErrorCode::kNotFound, "unknown HIT " + record.hit_id);
                }
                record.spans = SpansFromJson(Field<json>(body, "spans"),
                                             hit->subtask);
                record.feedback_useful =
                    Field<bool>(body, "feedback_useful");
                AnnotationRecord stored =
                    service.study().SubmitAnnotation(record);
                SendJson(res, {{"hit_id", stored.hit_id},
                               {"sentence_id", stored.sentence_id},
                               {"subtask", SubtaskName(stored.subtask)},
                               {"spans", SpansToJson(stored.spans)},
                               {"feedback_useful", stored.feedback_useful},
                               {"submitted_at", stored.submitted_at}});
              }));

    http.Get("/admin/progress", Wrap([this](const auto &, auto &res) {
      json body = json::object();
      for (const auto &[subtask, p] : service.study().Progress()) {
        body[std::string(SubtaskName(subtask))] = {
            {"completed", p.completed},
            {"open", p.open},
            {"remaining", p.remaining}};
      }
      SendJson(res, body);
    }));

    http.Get("/admin/report", Wrap([this](const auto &req, auto &res) {
      ReportOptions options;
      options.filter_fraction =
          service.study().config().worker_filter_fraction;
      if (req.has_param("repeats")) {
        options.repeats = std::stoul(req.get_param_value("repeats"));
      }
      if (req.has_param("seed")) {
        options.seed = std::stoull(req.get_param_value("seed"));
      }
      SendJson(res, service.Report(options));
    }));

    http.Post(R"(/admin/hits/([^/]+)/expire)",
              Wrap([this](const auto &req, auto &res) {
                Duration timeout{0};
                if (req.has_param("timeout_ms")) {
                  timeout = Duration(
                      std::stoll(req.get_param_value("timeout_ms")));
                }
                service.study().ExpireHit(req.matches[1], timeout);
                SendJson(res, {{"hit_id", std::string(req.matches[1])},
                               {"status", "expired"}});
              }));

    if (!options.static_dir.empty() &&
        !http.set_mount_point("/", options.static_dir)) {
      Fail(ErrorCode::kInvalidArgument,
           "static directory " + options.static_dir + " does not exist");
    }
  }

  void RequireSelf(const httplib::Request &req, const std::string &id) {
    if (Authenticate(req) != id) {
      Fail(ErrorCode::kPermissionDenied,
           "token does not belong to worker " + id);
    }
  }

  void Sweep() {
    std::unique_lock lock(mu);
    const Duration timeout = *options.hit_timeout;
    const auto period = std::clamp(timeout / 4, Duration(10), Duration(1000));
    while (!stopping) {
      cv.wait_for(lock, period);
      if (stopping) break;
      lock.unlock();
      try {
        service.study().ExpireStale(timeout);
      } catch (const Error &) {
        // The log is unavailable; requests will report it.
      }
      lock.lock();
    }
  }
};

AnnotationServer::AnnotationServer(StudyService &service,
                                   ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  const int threads = impl_->options.threads;
  impl_->http.new_task_queue = [threads] {
    return new httplib::ThreadPool(threads);
  };
  impl_->Routes();
}

AnnotationServer::~AnnotationServer() { Stop(); }

int AnnotationServer::Start() {
  const ServerOptions &o = impl_->options;
  int port = o.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(o.host);
    if (port < 0) port = 0;
  } else if (!impl_->http.bind_to_port(o.host, port)) {
    port = 0;
  }
  if (port == 0) {
    Fail(ErrorCode::kUnavailable,
         "cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  impl_->listener = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  if (o.hit_timeout) {
    impl_->sweeper = std::thread([this] { impl_->Sweep(); });
  }
  return port;
}

void AnnotationServer::Wait() {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait(lock, [this] { return impl_->stopped; });
}

void AnnotationServer::Stop() {
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->stopping) return;
    impl_->stopping = true;
  }
  impl_->cv.notify_all();
  impl_->http.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  if (impl_->sweeper.joinable()) impl_->sweeper.join();
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopped = true;
  }
  impl_->cv.notify_all();
}

}  // namespace dexa
