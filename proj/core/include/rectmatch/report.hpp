// Copyright 2026 The rectmatch Authors.
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

#ifndef RECTMATCH_REPORT_HPP_
#define RECTMATCH_REPORT_HPP_

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rectmatch/dataset.hpp"

namespace rectmatch {

enum class ReportFormat { kCsv, kJson, kPlot };
ReportFormat ParseReportFormat(const std::string& name);

struct CategoryAccuracy {
  std::string method;
  Category category;
  int pairs = 0;
  int accurate = 0;
  // Pairs with MAE strictly below each threshold, in threshold order.
  std::vector<int> mae_below;

  double Ratio() const { return pairs ? static_cast<double>(accurate) / pairs : 0.0; }
};

// Grouped by method, then category, both ascending.
std::vector<CategoryAccuracy> AccuracyByCategory(const std::vector<PairOutcome>& outcomes,
                                                 const std::vector<double>& mae_thresholds);

// Everything that `rectmatch report` needs to regenerate the outputs.
struct ReportData {
  std::vector<PairOutcome> outcomes;
  std::vector<double> mae_thresholds;
  nlohmann::json config;
};

nlohmann::json ReportDataToJson(const ReportData& data);
ReportData ReportDataFromJson(const nlohmann::json& j);

// Per-pair table. Contains no timings, so reruns are byte-identical.
std::string PairsCsv(const std::vector<PairOutcome>& outcomes);
std::string AccuracyCsv(const std::vector<CategoryAccuracy>& rows,
                        const std::vector<double>& mae_thresholds);
// Averages of the complexity statistics and stage timings per method.
std::string StatsCsv(const std::vector<PairOutcome>& outcomes);
nlohmann::json SummaryJson(const ReportData& data);
std::string AccuracyPlotSvg(const std::vector<CategoryAccuracy>& rows);
std::string TimingPlotSvg(const std::vector<PairOutcome>& outcomes);

// Writes the selected outputs into `dir`; evaluations.json is always written.
void WriteReport(const std::string& dir, const ReportData& data,
                 const std::set<ReportFormat>& formats);

}  // namespace rectmatch

#endif  // RECTMATCH_REPORT_HPP_
