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

#include "dexa/report.h"

#include <cstdio>
#include <sstream>

#include "dexa/agreement.h"
#include "dexa/json_format.h"

namespace dexa {

using json = nlohmann::json;

namespace {

json SampleJson(size_t n) {
  return n == kAllAnnotations ? json("all") : json(n);
}

json PartitionJson(const PartitionStats &p) {
  return {{"records", p.records},
          {"share", p.share},
          {"workers", p.workers},
          {"mean_kappa", p.mean_kappa},
          {"stdev_kappa", p.stdev_kappa}};
}

std::string Fixed(double x, int precision = 3) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, x);
  return buf;
}

std::string Pad(const std::string &s, size_t width) {
  if (s.size() >= width) return s + " ";
  return s + std::string(width - s.size(), ' ');
}

std::string PadLeft(const std::string &s, size_t width) {
  if (s.size() >= width) return " " + s;
  return std::string(width - s.size(), ' ') + s;
}

}  // namespace

json BuildReport(std::span<const AnnotationRecord> records,
                 const GoldLabels &gold, size_t test_size,
                 const ReportOptions &options) {
  json report;
  report["test_size"] = test_size;
  report["records"] = records.size();
  report["filter_fraction"] = options.filter_fraction;

  const std::vector<WorkerEvaluation> evaluations =
      EvaluateWorkers(records, gold, options.filter_fraction, test_size);
  json workers = json::array();
  for (const WorkerEvaluation &e : evaluations) {
    workers.push_back({{"worker_id", e.worker_id},
                       {"subtask", SubtaskName(e.subtask)},
                       {"kappa", e.kappa},
                       {"sentences_labeled", e.sentences_labeled},
                       {"coverage", e.coverage_fraction},
                       {"filtered", e.filtered}});
  }
  report["workers"] = workers;

  std::vector<Subtask> present;
  json summary = json::object();
  for (Subtask s : kAllSubtasks) {
    bool any = false;
    for (const WorkerEvaluation &e : evaluations) any |= e.subtask == s;
    if (!any) continue;
    present.push_back(s);
    const WorkerSummary ws = SummarizeWorkers(evaluations, s);
    summary[std::string(SubtaskName(s))] = {{"retained", ws.retained},
                                            {"filtered", ws.filtered},
                                            {"mean_kappa", ws.mean_kappa},
                                            {"median_kappa", ws.median_kappa},
                                            {"min_kappa", ws.min_kappa},
                                            {"max_kappa", ws.max_kappa}};
  }
  report["worker_summary"] = summary;

  json aggregation = json::array();
  std::vector<LabelMatrix> matrices;
  for (Subtask s : present) {
    matrices.push_back(LabelMatrix::FromRecords(records, s, gold));
  }
  for (AggregationMethod method : options.methods) {
    for (size_t n : options.sample_sizes) {
      json row = {{"method", MethodName(method)},
                  {"n", SampleJson(n)},
                  {"repeats", options.repeats},
                  {"seed", options.seed}};
      json kappa = json::object();
      json per_repeat = json::object();
      for (const LabelMatrix &m : matrices) {
        if (m.empty()) continue;
        const SubsampledEvaluation ev =
            EvaluateSubsampled(m, gold, n, method, options.repeats,
                               options.seed, options.ds);
        kappa[std::string(SubtaskName(m.subtask()))] = ev.mean_kappa;
        per_repeat[std::string(SubtaskName(m.subtask()))] =
            ev.per_repeat_kappa;
      }
      row["kappa"] = kappa;
      row["per_repeat"] = per_repeat;
      aggregation.push_back(std::move(row));
    }
  }
  report["aggregation"] = aggregation;

  json feedback = json::object();
  for (const FeedbackAnalysis &f : FeedbackConditionedAgreement(
           records, gold, options.filter_fraction, test_size)) {
    feedback[std::string(SubtaskName(f.subtask))] = {
        {"useful", PartitionJson(f.useful)},
        {"not_useful", PartitionJson(f.not_useful)}};
  }
  report["feedback"] = feedback;
  return report;
}

std::string RenderReportText(const json &report) {
  std::ostringstream out;
  const std::vector<std::string> subtasks = {"P", "I", "O"};

  out << "Per-worker agreement to gold (workers below "
      << Fixed(100.0 * report.value("filter_fraction", 0.0), 1) << "% of "
      << report.value("test_size", 0) << " test sentences filtered)\n";
  out << Pad("subtask", 9) << PadLeft("retained", 9) << PadLeft("filtered", 9)
      << PadLeft("mean", 8) << PadLeft("median", 8) << PadLeft("min", 8)
      << PadLeft("max", 8) << '\n';
  for (const std::string &s : subtasks) {
    if (!report["worker_summary"].contains(s)) continue;
    const json &w = report["worker_summary"][s];
    out << Pad(s, 9) << PadLeft(std::to_string(w["retained"].get<size_t>()), 9)
        << PadLeft(std::to_string(w["filtered"].get<size_t>()), 9)
        << PadLeft(Fixed(w["mean_kappa"].get<double>()), 8)
        << PadLeft(Fixed(w["median_kappa"].get<double>()), 8)
        << PadLeft(Fixed(w["min_kappa"].get<double>()), 8)
        << PadLeft(Fixed(w["max_kappa"].get<double>()), 8) << '\n';
  }

  out << "\nAggregated agreement to gold (Cohen's kappa, mean over repeats)\n";
  out << Pad("", 10);
  for (const std::string &s : subtasks) out << PadLeft(s, 8);
  out << '\n';
  for (const json &row : report["aggregation"]) {
    const std::string n = row["n"].is_string()
                              ? std::string("ALL")
                              : std::to_string(row["n"].get<size_t>());
    out << Pad(row["method"].get<std::string>() + n, 10);
    for (const std::string &s : subtasks) {
      out << PadLeft(row["kappa"].contains(s)
                         ? Fixed(row["kappa"][s].get<double>())
                         : std::string("-"),
                     8);
    }
    out << '\n';
  }

  out << "\nUsefulness feedback (record share; mean kappa +- stdev over "
         "workers)\n";
  out << Pad("feedback", 12);
  for (const std::string &s : subtasks) out << PadLeft("share " + s, 9);
  for (const std::string &s : subtasks) out << PadLeft("kappa " + s, 15);
  out << '\n';
  for (const char *part : {"useful", "not_useful"}) {
    out << Pad(part, 12);
    for (const std::string &s : subtasks) {
      const json &f = report["feedback"];
      out << PadLeft(f.contains(s)
                         ? Fixed(100.0 * f[s][part]["share"].get<double>(), 0) +
                               "%"
                         : std::string("-"),
                     9);
    }
    for (const std::string &s : subtasks) {
      const json &f = report["feedback"];
      std::string cell = "-";
      if (f.contains(s) && f[s][part]["workers"].get<size_t>() > 0) {
        cell = Fixed(f[s][part]["mean_kappa"].get<double>(), 2) + " +- " +
               Fixed(f[s][part]["stdev_kappa"].get<double>(), 2);
      }
      out << PadLeft(cell, 15);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace dexa
