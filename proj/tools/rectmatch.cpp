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

// rectmatch command line: evaluate manifests, render synthetic pairs and
// regenerate reports.

#include <cstdio>
#include <map>
#include <memory>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rectmatch/dataset.hpp"
#include "rectmatch/error.hpp"
#include "rectmatch/method_config.hpp"
#include "rectmatch/pipeline.hpp"
#include "rectmatch/report.hpp"
#include "rectmatch/synthetic.hpp"

namespace fs = std::filesystem;
using rectmatch::ErrorCode;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitManifest = 2;
constexpr int kExitStage = 3;

nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) rectmatch::Fail(ErrorCode::kIoError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    rectmatch::Fail(ErrorCode::kFormatError, path + ": " + e.what());
  }
}

void WriteJsonFile(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) rectmatch::Fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

struct RunArgs {
  std::string manifest;
  std::string method;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string dump_warps;
  bool dump_covering = false;
  int jobs = 1;
};

int Run(const RunArgs& args) {
  rectmatch::MethodConfig config;
  if (!args.config.empty()) config = rectmatch::MethodConfigFromJson(ReadJsonFile(args.config));
  if (!args.method.empty()) config.method = rectmatch::ParseMethod(args.method);
  if (args.seed) config.ransac.seed = *args.seed;
  config.Validate();

  const rectmatch::Manifest manifest = rectmatch::LoadManifest(args.manifest);
  fs::create_directories(args.out);

  rectmatch::DatasetOptions options;
  options.jobs = args.jobs;
  const fs::path covering_dir = fs::path(args.out) / "covering";
  if (args.dump_covering) fs::create_directories(covering_dir);
  if (!args.dump_warps.empty()) fs::create_directories(args.dump_warps);
  if (args.dump_covering || !args.dump_warps.empty()) {
    options.hooks_for_pair = [&](const std::string& pair_id) {
      rectmatch::PipelineHooks hooks;
      if (!args.dump_warps.empty()) {
        hooks.on_warp = [dir = fs::path(args.dump_warps), pair_id](
                            char side, std::size_t index, const rectmatch::WarpResult& warp) {
          const std::string stem = pair_id + "_" + side + "_" + std::to_string(index);
          rectmatch::WritePng((dir / (stem + ".png")).string(), warp.image, warp.valid);
          WriteJsonFile(dir / (stem + ".json"), rectmatch::WarpRecordToJson(warp.record));
        };
      }
      if (args.dump_covering) {
        // One file per pair and side; appended in call order.
        auto entries = std::make_shared<std::map<char, nlohmann::json>>();
        hooks.on_covering = [dir = covering_dir, pair_id, entries](char side,
                                                                   const nlohmann::json& c) {
          auto& list = (*entries)[side];
          if (list.is_null()) list = nlohmann::json::array();
          list.push_back(c);
          WriteJsonFile(dir / (pair_id + "_" + side + ".json"), list);
        };
      }
      return hooks;
    };
  }

  rectmatch::ReportData data;
  data.outcomes = rectmatch::EvaluateDataset(manifest, config, options);
  data.mae_thresholds = config.mae_thresholds;
  data.config = rectmatch::MethodConfigToJson(config);
  rectmatch::WriteReport(args.out, data,
                         {rectmatch::ReportFormat::kCsv, rectmatch::ReportFormat::kJson,
                          rectmatch::ReportFormat::kPlot});

  int accurate = 0;
  int stage_errors = 0;
  for (const auto& o : data.outcomes) {
    accurate += o.evaluation.accurate ? 1 : 0;
    if (o.stage_error) {
      ++stage_errors;
      std::cerr << "pair " << o.evaluation.pair_id << ": " << *o.stage_error << '\n';
    }
  }
  std::cout << rectmatch::MethodName(config.method) << ": " << accurate << "/"
            << data.outcomes.size() << " pairs accurate, results in " << args.out << '\n';
  return stage_errors ? kExitStage : kExitOk;
}

struct SynthArgs {
  std::string scene = "single_plane";
  std::string out;
  std::uint64_t seed = 0;
  std::string spec;
  int count = 1;
};

int Synth(const SynthArgs& args) {
  rectmatch::SyntheticSpec base;
  if (!args.spec.empty()) base = rectmatch::SyntheticSpecFromJson(ReadJsonFile(args.spec));
  base.scene = rectmatch::ParseSceneType(args.scene);
  if (args.count < 1) rectmatch::Fail(ErrorCode::kInvalidParameter, "--count must be >= 1");

  nlohmann::json pairs = nlohmann::json::array();
  for (int i = 0; i < args.count; ++i) {
    rectmatch::SyntheticSpec spec = base;
    spec.texture_seed = args.seed + static_cast<std::uint64_t>(i);
    const rectmatch::SyntheticPair pair = rectmatch::GenerateSyntheticPair(spec);
    std::ostringstream id;
    id << rectmatch::SceneTypeName(spec.scene) << '_' << spec.texture_seed;
    pairs.push_back(rectmatch::WriteSyntheticPair(args.out, id.str(), pair));
  }
  WriteJsonFile(fs::path(args.out) / "manifest.json", {{"pairs", pairs}});
  std::cout << "wrote " << pairs.size() << " pair(s) to " << args.out << '\n';
  return kExitOk;
}

struct ReportArgs {
  std::string in;
  std::string out;
  std::vector<std::string> formats;
};

int Report(const ReportArgs& args) {
  const rectmatch::ReportData data = rectmatch::ReportDataFromJson(
      ReadJsonFile((fs::path(args.in) / "evaluations.json").string()));
  std::set<rectmatch::ReportFormat> formats;
  for (const auto& f : args.formats) formats.insert(rectmatch::ParseReportFormat(f));
  if (formats.empty()) {
    formats = {rectmatch::ReportFormat::kCsv, rectmatch::ReportFormat::kJson,
               rectmatch::ReportFormat::kPlot};
  }
  rectmatch::WriteReport(args.out.empty() ? args.in : args.out, data, formats);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rectification-based two-view matching toolkit"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Evaluate every pair of a manifest");
  run_cmd->add_option("--manifest", run.manifest, "Manifest JSON")->required();
  run_cmd->add_option("--method", run.method, "unrectified, affnet_shapes, depth_map, "
                                              "dense_affnet or depth_affnet");
  run_cmd->add_option("--config", run.config, "Method configuration JSON");
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--seed", run.seed, "RANSAC seed override");
  run_cmd->add_option("--dump-warps", run.dump_warps, "Directory for warped images");
  run_cmd->add_flag("--dump-covering", run.dump_covering, "Write coverings to OUT/covering");
  run_cmd->add_option("--jobs", run.jobs, "Pairs evaluated concurrently")
      ->check(CLI::PositiveNumber);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Render synthetic pairs and a manifest");
  synth_cmd->add_option("--scene", synth.scene, "single_plane, two_planes or cube_corner");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Texture seed of the first pair");
  synth_cmd->add_option("--spec", synth.spec, "JSON overriding the scene parameters");
  synth_cmd->add_option("--count", synth.count, "Number of pairs (consecutive seeds)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Regenerate outputs from evaluations.json");
  report_cmd->add_option("--in", report.in, "Directory written by `run`")->required();
  report_cmd->add_option("--out", report.out, "Output directory (default: --in)");
  report_cmd->add_option("--format", report.formats, "csv, json or plot (repeatable)")
      ->check(CLI::IsMember({"csv", "json", "plot"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return Run(run);
    if (*synth_cmd) return Synth(synth);
    return Report(report);
  } catch (const rectmatch::Error& e) {
    std::cerr << "rectmatch: " << e.what() << '\n';
    if (e.code() == ErrorCode::kManifestError) return kExitManifest;
    if (e.code() == ErrorCode::kInvalidParameter || e.code() == ErrorCode::kIoError ||
        e.code() == ErrorCode::kFormatError) {
      return kExitUsage;
    }
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "rectmatch: " << e.what() << '\n';
    return kExitStage;
  }
}
