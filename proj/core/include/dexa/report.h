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

#ifndef DEXA_REPORT_H_
#define DEXA_REPORT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dexa/aggregation.h"
#include "dexa/annotation.h"
#include "dexa/corpus.h"

namespace dexa {

struct ReportOptions {
  std::vector<size_t> sample_sizes = {3, 6, 9, kAllAnnotations};
  std::vector<AggregationMethod> methods = {AggregationMethod::kMajorityVote,
                                            AggregationMethod::kDawidSkene};
  size_t repeats = 20;
  uint64_t seed = 0;
  double filter_fraction = 0.05;
  DawidSkeneOptions ds;
};

// Evaluation report over an annotation dump: per-worker kappa with the
// coverage filter, subsampled MV/DS aggregation kappa per sample size, and
// the feedback-conditioned split. Only records on gold sentences count.
nlohmann::json BuildReport(std::span<const AnnotationRecord> records,
                           const GoldLabels &gold, size_t test_size,
                           const ReportOptions &options = {});

// Aligned-column rendering of a BuildReport document.
std::string RenderReportText(const nlohmann::json &report);

}  // namespace dexa

#endif  // DEXA_REPORT_H_
