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

#include "rectmatch/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rectmatch/error.hpp"

namespace rectmatch {
namespace {

namespace fs = std::filesystem;

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string Num(const std::optional<double>& v) { return v ? Num(*v) : std::string(); }

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

std::string SvgEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::map<std::string, std::vector<const PairOutcome*>> ByMethod(
    const std::vector<PairOutcome>& outcomes) {
  std::map<std::string, std::vector<const PairOutcome*>> groups;
  for (const auto& o : outcomes) groups[o.evaluation.method].push_back(&o);
  return groups;
}

nlohmann::json CategoryToJson(const Category& c) {
  return {{"type", CategoryTypeName(c.type)}, {"index", c.index}};
}

Category CategoryFromJson(const nlohmann::json& j) {
  Category c;
  const std::string type = j.at("type").get<std::string>();
  if (type == "rotation") {
    c.type = CategoryType::kRotation;
  } else if (type == "covisibility") {
    c.type = CategoryType::kCovisibility;
  } else if (type == "none") {
    c.type = CategoryType::kNone;
  } else {
    Fail(ErrorCode::kFormatError, "unknown category type " + type);
  }
  c.index = j.at("index").get<int>();
  return c;
}

}  // namespace

ReportFormat ParseReportFormat(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  if (name == "plot") return ReportFormat::kPlot;
  Fail(ErrorCode::kInvalidParameter, "unknown report format " + name);
}

std::vector<CategoryAccuracy> AccuracyByCategory(const std::vector<PairOutcome>& outcomes,
                                                 const std::vector<double>& mae_thresholds) {
  std::map<std::pair<std::string, Category>, CategoryAccuracy> rows;
  for (const auto& o : outcomes) {
    auto& row = rows[{o.evaluation.method, o.category}];
    if (row.pairs == 0) {
      row.method = o.evaluation.method;
      row.category = o.category;
      row.mae_below.assign(mae_thresholds.size(), 0);
    }
    ++row.pairs;
    if (o.evaluation.accurate) ++row.accurate;
    if (o.evaluation.mae_px) {
      for (std::size_t i = 0; i < mae_thresholds.size(); ++i) {
        if (*o.evaluation.mae_px < mae_thresholds[i]) ++row.mae_below[i];
      }
    }
  }
  std::vector<CategoryAccuracy> out;
  out.reserve(rows.size());
  for (auto& [key, row] : rows) out.push_back(std::move(row));
  return out;
}

nlohmann::json ReportDataToJson(const ReportData& data) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& o : data.outcomes) {
    nlohmann::json e = PairEvaluationToJson(o.evaluation);
    e["category"] = CategoryToJson(o.category);
    e["stage_error"] = o.stage_error ? nlohmann::json(*o.stage_error) : nlohmann::json(nullptr);
    pairs.push_back(std::move(e));
  }
  return {{"mae_thresholds", data.mae_thresholds}, {"config", data.config}, {"pairs", pairs}};
}

ReportData ReportDataFromJson(const nlohmann::json& j) {
  ReportData data;
  try {
    data.mae_thresholds = j.at("mae_thresholds").get<std::vector<double>>();
    data.config = j.value("config", nlohmann::json::object());
    for (const auto& e : j.at("pairs")) {
      PairOutcome o;
      o.evaluation = PairEvaluationFromJson(e);
      o.category = CategoryFromJson(e.at("category"));
      if (e.contains("stage_error") && !e.at("stage_error").is_null()) {
        o.stage_error = e.at("stage_error").get<std::string>();
      }
      data.outcomes.push_back(std::move(o));
    }
  } catch (const nlohmann::json::exception& ex) {
    Fail(ErrorCode::kFormatError, std::string("evaluations: ") + ex.what());
  }
  return data;
}

std::string PairsCsv(const std::vector<PairOutcome>& outcomes) {
  std::ostringstream s;
  s << "pair_id,method,category,mode,rotation_error_deg,mae_px,accurate,match_count,"
       "inlier_count,total_warp_area_px,keypoint_count,component_count,"
       "rectifications_per_component,failure\n";
  for (const auto& o : outcomes) {
    const PairEvaluation& e = o.evaluation;
    s << CsvField(e.pair_id) << ',' << e.method << ',' << o.category.Label() << ','
      << EvaluationModeName(e.mode) << ',' << Num(e.rotation_error_deg) << ',' << Num(e.mae_px)
      << ',' << (e.accurate ? 1 : 0) << ',' << e.match_count << ',' << e.inlier_count << ','
      << Num(e.stats.total_warp_area_px) << ',' << e.stats.keypoint_count << ','
      << e.stats.component_count << ',' << Num(e.stats.rectifications_per_component) << ','
      << CsvField(e.failure) << '\n';
  }
  return s.str();
}

std::string AccuracyCsv(const std::vector<CategoryAccuracy>& rows,
                        const std::vector<double>& mae_thresholds) {
  std::ostringstream s;
  s << "method,category_type,category,label,pairs,accurate,accuracy";
  for (double t : mae_thresholds) s << ",mae_below_" << Num(t);
  s << '\n';
  for (const auto& r : rows) {
    s << r.method << ',' << CategoryTypeName(r.category.type) << ',' << r.category.index << ','
      << r.category.Label() << ',' << r.pairs << ',' << r.accurate << ',' << Num(r.Ratio());
    for (int c : r.mae_below) s << ',' << c;
    s << '\n';
  }
  return s.str();
}

std::string StatsCsv(const std::vector<PairOutcome>& outcomes) {
  std::ostringstream s;
  s << "method,pairs,total_warp_area_px,keypoint_count,component_count,"
       "rectifications_per_component,segmentation_s,covering_s,warping_s,detection_s,"
       "matching_s,estimation_s,total_s\n";
  for (const auto& [method, group] : ByMethod(outcomes)) {
    double v[11] = {};
    for (const PairOutcome* o : group) {
      const auto& st = o->evaluation.stats;
      const auto& t = o->evaluation.timings;
      const double row[11] = {st.total_warp_area_px,
                              static_cast<double>(st.keypoint_count),
                              static_cast<double>(st.component_count),
                              st.rectifications_per_component,
                              t.segmentation,
                              t.covering,
                              t.warping,
                              t.detection,
                              t.matching,
                              t.estimation,
                              t.Total()};
      for (int i = 0; i < 11; ++i) v[i] += row[i];
    }
    const double n = static_cast<double>(group.size());
    s << method << ',' << group.size();
    for (double x : v) s << ',' << Num(x / n);
    s << '\n';
  }
  return s.str();
}

nlohmann::json SummaryJson(const ReportData& data) {
  nlohmann::json methods = nlohmann::json::object();
  const auto rows = AccuracyByCategory(data.outcomes, data.mae_thresholds);
  for (const auto& [method, group] : ByMethod(data.outcomes)) {
    int accurate = 0;
    int failures = 0;
    RunStats mean;
    StageTimings time;
    for (const PairOutcome* o : group) {
      const auto& e = o->evaluation;
      accurate += e.accurate ? 1 : 0;
      failures += e.failure.empty() ? 0 : 1;
      mean.total_warp_area_px += e.stats.total_warp_area_px;
      mean.rectifications_per_component += e.stats.rectifications_per_component;
      time.segmentation += e.timings.segmentation;
      time.covering += e.timings.covering;
      time.warping += e.timings.warping;
      time.detection += e.timings.detection;
      time.matching += e.timings.matching;
      time.estimation += e.timings.estimation;
    }
    const double n = static_cast<double>(group.size());
    double keypoints = 0.0;
    double components = 0.0;
    for (const PairOutcome* o : group) {
      keypoints += static_cast<double>(o->evaluation.stats.keypoint_count);
      components += static_cast<double>(o->evaluation.stats.component_count);
    }
    nlohmann::json categories = nlohmann::json::array();
    for (const auto& r : rows) {
      if (r.method != method) continue;
      categories.push_back({{"category", r.category.Label()},
                            {"pairs", r.pairs},
                            {"accurate", r.accurate},
                            {"accuracy", r.Ratio()},
                            {"mae_below", r.mae_below}});
    }
    methods[method] = {
        {"pairs", group.size()},
        {"accurate", accurate},
        {"accuracy", n > 0 ? accurate / n : 0.0},
        {"failures", failures},
        {"categories", categories},
        {"mean_stats",
         {{"total_warp_area_px", mean.total_warp_area_px / n},
          {"keypoint_count", keypoints / n},
          {"component_count", components / n},
          {"rectifications_per_component", mean.rectifications_per_component / n}}},
        {"mean_timings_s",
         {{"segmentation", time.segmentation / n},
          {"covering", time.covering / n},
          {"warping", time.warping / n},
          {"detection", time.detection / n},
          {"matching", time.matching / n},
          {"estimation", time.estimation / n}}}};
  }
  return {{"pair_count", data.outcomes.size()},
          {"mae_thresholds", data.mae_thresholds},
          {"config", data.config},
          {"methods", methods}};
}

std::string AccuracyPlotSvg(const std::vector<CategoryAccuracy>& rows) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 160, kTop = 30, kBottom = 60;
  std::vector<Category> cats;
  for (const auto& r : rows) {
    if (std::find(cats.begin(), cats.end(), r.category) == cats.end()) cats.push_back(r.category);
  }
  std::sort(cats.begin(), cats.end());
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto x_of = [&](std::size_t i) {
    return kLeft + (cats.size() > 1 ? pw * static_cast<double>(i) / static_cast<double>(cats.size() - 1)
                                    : pw / 2);
  };
  auto y_of = [&](double ratio) { return kTop + ph * (1.0 - ratio); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"13\">Accuracy per category</text>\n";
  for (int g = 0; g <= 4; ++g) {
    const double y = y_of(g / 4.0);
    s << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << y << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
      << "\" text-anchor=\"end\">" << Num(g / 4.0) << "</text>\n";
  }
  for (std::size_t i = 0; i < cats.size(); ++i) {
    s << "<text x=\"" << x_of(i) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
      << SvgEscape(cats[i].Label()) << "</text>\n";
  }
  std::map<std::string, std::vector<std::pair<std::size_t, double>>> series;
  for (const auto& r : rows) {
    const auto it = std::find(cats.begin(), cats.end(), r.category);
    series[r.method].emplace_back(static_cast<std::size_t>(it - cats.begin()), r.Ratio());
  }
  std::size_t color = 0;
  for (const auto& [method, pts] : series) {
    const char* c = kPalette[color % std::size(kPalette)];
    s << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (const auto& [i, v] : pts) s << x_of(i) << ',' << y_of(v) << ' ';
    s << "\"/>\n";
    for (const auto& [i, v] : pts) {
      s << "<circle cx=\"" << x_of(i) << "\" cy=\"" << y_of(v) << "\" r=\"3\" fill=\"" << c
        << "\"/>\n";
    }
    const double ly = kTop + 14.0 * static_cast<double>(color);
    s << "<rect x=\"" << kW - kRight + 14 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\""
      << c << "\"/><text x=\"" << kW - kRight + 30 << "\" y=\"" << ly + 9 << "\">"
      << SvgEscape(method) << "</text>\n";
    ++color;
  }
  s << "</svg>\n";
  return s.str();
}

std::string TimingPlotSvg(const std::vector<PairOutcome>& outcomes) {
  static const char* const kStages[] = {"segmentation", "covering", "warping",
                                        "detection", "matching", "estimation"};
  constexpr double kW = 640, kBar = 22, kLeft = 120, kRight = 40, kTop = 40;
  const auto groups = ByMethod(outcomes);
  std::vector<std::pair<std::string, std::array<double, 6>>> bars;
  double longest = 0.0;
  for (const auto& [method, group] : groups) {
    std::array<double, 6> t{};
    for (const PairOutcome* o : group) {
      const auto& tm = o->evaluation.timings;
      const double v[6] = {tm.segmentation, tm.covering, tm.warping,
                           tm.detection, tm.matching, tm.estimation};
      for (int i = 0; i < 6; ++i) t[static_cast<std::size_t>(i)] += v[i];
    }
    double total = 0.0;
    for (double& x : t) {
      x /= static_cast<double>(group.size());
      total += x;
    }
    longest = std::max(longest, total);
    bars.emplace_back(method, t);
  }
  const double pw = kW - kLeft - kRight;
  const double height = kTop + (kBar + 10) * static_cast<double>(bars.size()) + 50;
  const double scale = longest > 0 ? pw / longest : 0.0;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"13\">Mean time per pair [s], max "
    << Num(longest) << "</text>\n";
  for (std::size_t b = 0; b < bars.size(); ++b) {
    const double y = kTop + (kBar + 10) * static_cast<double>(b);
    s << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + kBar * 0.7 << "\" text-anchor=\"end\">"
      << SvgEscape(bars[b].first) << "</text>\n";
    double x = kLeft;
    for (std::size_t i = 0; i < 6; ++i) {
      const double w = bars[b].second[i] * scale;
      s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << kBar
        << "\" fill=\"" << kPalette[i] << "\"><title>" << kStages[i] << ' '
        << Num(bars[b].second[i]) << "</title></rect>\n";
      x += w;
    }
  }
  const double ly = kTop + (kBar + 10) * static_cast<double>(bars.size()) + 10;
  for (std::size_t i = 0; i < 6; ++i) {
    const double lx = kLeft + 85.0 * static_cast<double>(i);
    s << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\""
      << kPalette[i] << "\"/><text x=\"" << lx + 14 << "\" y=\"" << ly + 9 << "\">" << kStages[i]
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void WriteReport(const std::string& dir, const ReportData& data,
                 const std::set<ReportFormat>& formats) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) Fail(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());
  WriteText(root / "evaluations.json", ReportDataToJson(data).dump(2) + "\n");
  const auto rows = AccuracyByCategory(data.outcomes, data.mae_thresholds);
  if (formats.count(ReportFormat::kCsv)) {
    WriteText(root / "pairs.csv", PairsCsv(data.outcomes));
    WriteText(root / "accuracy_by_category.csv", AccuracyCsv(rows, data.mae_thresholds));
    WriteText(root / "stats.csv", StatsCsv(data.outcomes));
  }
  if (formats.count(ReportFormat::kJson)) {
    WriteText(root / "summary.json", SummaryJson(data).dump(2) + "\n");
  }
  if (formats.count(ReportFormat::kPlot)) {
    WriteText(root / "accuracy_by_category.svg", AccuracyPlotSvg(rows));
    WriteText(root / "timings.svg", TimingPlotSvg(data.outcomes));
  }
}

}  // namespace rectmatch
