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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. `rectmatch_acceptance 4 8` runs a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "rectmatch/covering.hpp"
#include "rectmatch/dataset.hpp"
#include "rectmatch/depth_planes.hpp"
#include "rectmatch/error.hpp"
#include "rectmatch/estimation.hpp"
#include "rectmatch/geometry.hpp"
#include "rectmatch/pipeline.hpp"
#include "rectmatch/report.hpp"
#include "rectmatch/synthetic.hpp"
#include "rectmatch/warping.hpp"
#include "test_support.hpp"

namespace rectmatch {
namespace {

namespace fs = std::filesystem;
constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

Outcome SemiMetric() {
  std::mt19937_64 rng(1);
  double worst_symmetry = 0.0;
  double worst_oracle = 0.0;
  int self_nonzero = 0;
  int pi_nonzero = 0;
  for (int i = 0; i < 10000; ++i) {
    const TiltPoint a = testing::RandomTiltPoint(rng, std::log(8.0));
    const TiltPoint b = testing::RandomTiltPoint(rng, std::log(8.0));
    const double ab = TiltDistance(a, b);
    worst_symmetry = std::max(worst_symmetry, std::abs(ab - TiltDistance(b, a)));
    worst_oracle =
        std::max(worst_oracle, std::abs(TransitionTilt(a, b) - testing::TransitionTiltSvd(a, b)) /
                                   testing::TransitionTiltSvd(a, b));
    self_nonzero += TiltDistance(a, a) != 0.0;
    pi_nonzero += TiltDistance(a, TiltPoint(a.log_tilt(), a.phi() + kPi)) != 0.0;
  }
  return {worst_symmetry <= 1e-9 && self_nonzero == 0 && pi_nonzero == 0 && worst_oracle <= 1e-9,
          Fmt("max |d(a,b)-d(b,a)| = %.2e, d(a,a)!=0: %.0f, d(phi+pi)!=0: %.0f, "
              "max rel. error vs SVD = %.2e",
              worst_symmetry, self_nonzero, pi_nonzero, worst_oracle)};
}

Outcome DecompositionRoundTrip() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double worst = 0.0;
  int tested = 0;
  while (tested < 10000) {
    Eigen::Matrix2d m;
    m << u(rng), u(rng), u(rng), u(rng);
    if (!(m.determinant() > 0.0)) continue;
    worst = std::max(worst, (DecomposeLinear(m).Recompose() - m).norm() / m.norm());
    ++tested;
  }
  return {worst <= 1e-9, Fmt("max relative recomposition error %.2e over 10^4 matrices", worst)};
}

Outcome CoveringOracle() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(3, 12);
  std::uniform_real_distribution<double> spread(0.3, 1.6);
  const double radius = kDefaultCoveringRadius;
  int instances = 0;
  int reach_failures = 0;
  int ratio_failures = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    ShapeSet set;
    const double s = spread(rng);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) set.points.push_back(testing::RandomTiltPoint(rng, s));
    for (double min_ratio : {0.95, 1.0}) {
      const auto optimal = testing::ExhaustiveMinimumCover(set.points, radius, min_ratio);
      const Covering greedy = GreedyCover(set, radius, min_ratio);
      ++instances;
      if (!optimal) continue;
      if (greedy.covered_ratio < min_ratio) ++reach_failures;
      const double ratio = static_cast<double>(greedy.balls.size()) / *optimal;
      worst_ratio = std::max(worst_ratio, ratio);
      if (ratio > 2.0) ++ratio_failures;
    }
  }
  return {instances >= 50 && reach_failures == 0 && ratio_failures == 0,
          Fmt("%.0f instances, %.0f missed min_ratio, worst greedy/optimal ball ratio %.2f",
              instances, reach_failures, worst_ratio)};
}

Outcome AsiftCompleteness() {
  const double max_log_tilt = std::log(4.0 * std::sqrt(2.0));
  const double radius = kDefaultCoveringRadius;
  const auto centers = AsiftCoveringCenters(max_log_tilt, radius);
  std::vector<TiltParts> parts;
  for (const auto& c : centers) parts.emplace_back(c);
  const double max_tilt = std::exp(radius);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int samples = 100000;
  int covered = 0;
  for (int i = 0; i < samples; ++i) {
    const TiltParts p(TiltPoint(max_log_tilt * std::sqrt(u(rng)), kPi * u(rng)));
    for (const auto& c : parts) {
      if (TransitionTilt(c, p) <= max_tilt) {
        ++covered;
        break;
      }
    }
  }
  const double fraction = static_cast<double>(covered) / samples;
  return {fraction >= 0.999, Fmt("%.0f centers, covered fraction %.5f of 10^5 samples",
                                 static_cast<double>(centers.size()), fraction)};
}

Outcome WarpRoundTrip() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> px(0.0, 160.0);
  const Image image(160, 160, 0.5f);
  const SegmentMask mask = SegmentMask::Full(160, 160);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const bool affine = trial % 2 == 0;
    WarpOptions options;
    options.blur_constant = 0.0;
    WarpResult w;
    if (affine) {
      Eigen::Matrix2d l;
      l << 1.0 + 0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng), 1.0 + 0.5 * u(rng);
      if (l.determinant() < 0.3) l = Eigen::Matrix2d::Identity() * 1.2;
      w = WarpMasked(image, mask, AffineMap(l, Eigen::Vector2d(10 * u(rng), 10 * u(rng))), options);
    } else {
      Eigen::Matrix3d h;
      h << 1.0 + 0.2 * u(rng), 0.2 * u(rng), 5 * u(rng), 0.2 * u(rng), 1.0 + 0.2 * u(rng),
          5 * u(rng), 5e-4 * u(rng), 5e-4 * u(rng), 1.0;
      w = WarpMasked(image, mask, h, options);
    }
    std::vector<Eigen::Vector2d> src;
    std::vector<Eigen::Vector2d> warped;
    for (int i = 0; i < 500; ++i) {
      src.emplace_back(px(rng), px(rng));
      warped.push_back(w.record.Forward(src.back()));
    }
    const auto back = BackprojectPoints(warped, w.record);
    for (std::size_t i = 0; i < src.size(); ++i) worst = std::max(worst, (back[i] - src[i]).norm());
  }
  return {worst < 1e-6, Fmt("max round-trip error %.2e px over 10^4 points", worst)};
}

Outcome DepthPlaneRecovery() {
  SyntheticSpec spec;
  spec.scene = SceneType::kCubeCorner;
  spec.texture_seed = 6;
  spec.width = 256;
  spec.height = 256;
  spec.texture_size = 512;
  const SyntheticPair pair = GenerateSyntheticPair(spec);
  const NormalMap normals = NormalsFromDepth(pair.a.depth, pair.intrinsics);
  const auto buckets = SphereBuckets(500);
  const auto valid = normals.ValidCount();
  const int min_votes = std::max(1, static_cast<int>(std::ceil(0.01 * static_cast<double>(valid))));
  const auto clusters = ClusterNormals(normals, buckets, min_votes, ClusterRefinement::kMean);

  double worst_normal = 0.0;
  std::vector<int> plane_of(clusters.size(), -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    double best = 180.0;
    for (std::size_t p = 0; p < pair.planes.size(); ++p) {
      const double deg = std::acos(std::clamp(clusters[c].mean_normal.dot(pair.planes[p].normal),
                                              -1.0, 1.0)) * 180.0 / kPi;
      if (deg < best) {
        best = deg;
        plane_of[c] = static_cast<int>(p);
      }
    }
    worst_normal = std::max(worst_normal, best);
  }
  std::set<int> distinct(plane_of.begin(), plane_of.end());

  const auto seg = SegmentClusters(normals, clusters,
                                   static_cast<std::size_t>(std::ceil(0.01 * 256 * 256)),
                                   BucketAssignmentRadius(buckets.size()));
  std::vector<int> predicted(256 * 256, -1);
  for (const auto& s : seg.segments) {
    for (int y = 0; y < 256; ++y) {
      for (int x = 0; x < 256; ++x) {
        if (s.Test(x, y)) predicted[static_cast<std::size_t>(y) * 256 + x] =
            plane_of[static_cast<std::size_t>(*s.cluster_id)];
      }
    }
  }
  int labelled = 0;
  int agree = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (pair.a.plane_labels[i] < 0) continue;
    ++labelled;
    agree += predicted[i] == pair.a.plane_labels[i];
  }
  const double agreement = labelled ? static_cast<double>(agree) / labelled : 0.0;

  const auto ortho = OrthogonalizeClusters(clusters);
  double worst_ortho = 0.0;
  for (std::size_t i = 0; i < ortho.size(); ++i) {
    for (std::size_t j = i + 1; j < ortho.size(); ++j) {
      const double deg =
          std::acos(std::clamp(ortho[i].mean_normal.dot(ortho[j].mean_normal), -1.0, 1.0)) *
          180.0 / kPi;
      worst_ortho = std::max(worst_ortho, std::abs(deg - 90.0));
    }
  }
  const bool pass = clusters.size() == 3 && distinct.size() == 3 && worst_normal <= 2.0 &&
                    agreement >= 0.95 && ortho.size() == 3 && worst_ortho <= 1e-6;
  return {pass, Fmt("%.0f clusters, worst normal error %.3f deg, label agreement %.4f, "
                    "orthogonalized deviation %.1e deg",
                    static_cast<double>(clusters.size()), worst_normal, agreement, worst_ortho)};
}

Outcome PoseEstimation() {
  int good = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = testing::MakePoseScene(1000 + static_cast<std::uint64_t>(trial), 100, 0.5, 0.3);
    RansacConfig cfg;
    cfg.threshold_px = 0.5;
    cfg.confidence = 1.0 - 1e-4;
    cfg.max_iterations = 100000;
    cfg.seed = static_cast<std::uint64_t>(trial);
    double err = 180.0;
    try {
      err = RotationErrorDeg(EstimateEssential(s.pts_a, s.pts_b, s.k, s.k, cfg).rotation,
                             s.rotation);
    } catch (const Error&) {
    }
    worst = std::max(worst, err);
    good += err < 1.0;
  }
  return {good >= 95, Fmt("%.0f of 100 trials within 1 deg, worst %.3f deg", good, worst)};
}

ImageInputs Inputs(const SyntheticPair& pair, const SyntheticView& v) {
  return {v.image, pair.intrinsics, v.depth, v.shapes};
}

Outcome RectificationBenefit() {
  const Method methods[] = {Method::kUnrectified, Method::kAffnetShapes, Method::kDenseAffnet};
  int below[3] = {0, 0, 0};
  const int pairs = 20;
  for (int i = 0; i < pairs; ++i) {
    SyntheticSpec spec;
    spec.texture_seed = static_cast<std::uint64_t>(100 + i);
    spec.focal_px = 1200.0;
    spec.tilt = i % 2 == 0 ? 3.0 : 4.0;
    spec.roll_deg = 37.0 * i;
    const SyntheticPair pair = GenerateSyntheticPair(spec);
    GroundTruth truth;
    truth.homography = *pair.homography;
    for (int m = 0; m < 3; ++m) {
      MethodConfig config;
      config.method = methods[m];
      config.ransac.seed = 7;
      const PairEvaluation e = RunPair("p" + std::to_string(i), Inputs(pair, pair.a),
                                       Inputs(pair, pair.b), truth, config);
      below[m] += e.mae_px && *e.mae_px < 2.0;
    }
  }
  const bool pass = below[0] <= 0.3 * pairs && below[1] >= 0.8 * pairs && below[2] >= 0.8 * pairs;
  return {pass, Fmt("MAE < 2 px on %.0f/20 unrectified, %.0f/20 affnet_shapes, %.0f/20 dense_affnet",
                    below[0], below[1], below[2])};
}

Outcome MethodCollapse() {
  int compared = 0;
  int identical = 0;
  for (int i = 0; i < 3; ++i) {
    SyntheticSpec spec;
    spec.texture_seed = static_cast<std::uint64_t>(200 + i);
    spec.tilt = 1.3 + 0.2 * i;
    spec.roll_deg = 15.0 * i;
    const SyntheticPair pair = GenerateSyntheticPair(spec);
    GroundTruth truth;
    truth.homography = *pair.homography;
    ImageInputs a{pair.a.image, pair.intrinsics, DepthMap(spec.width, spec.height, 2.0f),
                  DenseShapeField::Identity(spec.width, spec.height)};
    ImageInputs b{pair.b.image, pair.intrinsics, DepthMap(spec.width, spec.height, 2.0f),
                  DenseShapeField::Identity(spec.width, spec.height)};
    std::vector<PairEvaluation> evals;
    for (Method m : kAllMethods) {
      MethodConfig config;
      config.method = m;
      config.ransac.seed = 11;
      evals.push_back(RunPair("c" + std::to_string(i), a, b, truth, config));
    }
    for (std::size_t k = 1; k < evals.size(); ++k) {
      ++compared;
      identical += evals[k].SameResult(evals[0]) && evals[k].estimate == evals[0].estimate;
    }
  }
  return {identical == compared,
          Fmt("%.0f of %.0f method pairs identical to unrectified", identical, compared)};
}

Outcome StatsAudit() {
  int audited = 0;
  int mismatches = 0;
  auto audit = [&](const SyntheticPair& pair, Method method) {
    GroundTruth truth;
    if (pair.homography) {
      truth.homography = *pair.homography;
    } else {
      truth.rotation = pair.rotation;
      truth.translation = pair.translation;
    }
    MethodConfig config;
    config.method = method;
    PairArtifacts art;
    const PairEvaluation e =
        RunPair("audit", Inputs(pair, pair.a), Inputs(pair, pair.b), truth, config, nullptr, &art);
    double area = 0.0;
    std::size_t records = 0;
    std::size_t components = 0;
    std::size_t keypoints = 0;
    for (const ImageRectification* r : {&art.a, &art.b}) {
      for (const WarpRecord& w : r->records) {
        area += static_cast<double>(w.warped_width) * static_cast<double>(w.warped_height);
      }
      records += r->records.size();
      components += std::set<int>(r->record_component.begin(), r->record_component.end()).size();
      keypoints += r->features.keypoints.size();
    }
    ++audited;
    const double per_component = static_cast<double>(records) / static_cast<double>(components);
    mismatches += !(e.stats.total_warp_area_px == area && e.stats.component_count == components &&
                    e.stats.rectifications_per_component == per_component &&
                    e.stats.keypoint_count == keypoints);
  };
  SyntheticSpec plane;
  plane.texture_seed = 300;
  plane.tilt = 3.0;
  plane.roll_deg = 40.0;
  const SyntheticPair plane_pair = GenerateSyntheticPair(plane);
  SyntheticSpec cube;
  cube.scene = SceneType::kCubeCorner;
  cube.texture_seed = 301;
  cube.texture_size = 1024;
  const SyntheticPair cube_pair = GenerateSyntheticPair(cube);
  for (Method m : kAllMethods) {
    audit(plane_pair, m);
    audit(cube_pair, m);
  }
  return {mismatches == 0, Fmt("%.0f runs audited, %.0f mismatches", audited, mismatches)};
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ReportDeterminism() {
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("rectmatch_accept_" + std::to_string(rd()));
  fs::create_directories(dir);
  nlohmann::json pairs = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    SyntheticSpec spec;
    spec.texture_seed = static_cast<std::uint64_t>(400 + i);
    spec.tilt = 1.5 + i;
    spec.roll_deg = 20.0 * i;
    pairs.push_back(WriteSyntheticPair(dir.string(), "r" + std::to_string(i),
                                       GenerateSyntheticPair(spec)));
  }
  std::ofstream(dir / "manifest.json") << nlohmann::json{{"pairs", pairs}}.dump(2);
  const Manifest manifest = LoadManifest((dir / "manifest.json").string());
  MethodConfig config;
  config.method = Method::kDenseAffnet;
  config.ransac.seed = 5;
  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    DatasetOptions options;
    options.jobs = run + 1;
    ReportData data{EvaluateDataset(manifest, config, options), config.mae_thresholds,
                    MethodConfigToJson(config)};
    const fs::path out = dir / ("report" + std::to_string(run));
    WriteReport(out.string(), data, {ReportFormat::kCsv});
    csv[run] = ReadFile(out / "pairs.csv");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  const bool pass = !csv[0].empty() && csv[0] == csv[1];
  return {pass, Fmt("pairs.csv %.0f bytes, identical across runs: %.0f",
                    static_cast<double>(csv[0].size()), csv[0] == csv[1])};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace rectmatch

int main(int argc, char** argv) {
  using namespace rectmatch;
  const std::vector<Criterion> criteria = {
      {1, "semi-metric suite", SemiMetric},
      {2, "decomposition round trip", DecompositionRoundTrip},
      {3, "covering oracle equivalence", CoveringOracle},
      {4, "ASIFT covering completeness", AsiftCompleteness},
      {5, "warp/backprojection round trip", WarpRoundTrip},
      {6, "depth-plane recovery", DepthPlaneRecovery},
      {7, "pose estimation", PoseEstimation},
      {8, "rectification benefit", RectificationBenefit},
      {9, "method collapse", MethodCollapse},
      {10, "run statistics audit", StatsAudit},
      {11, "report determinism", ReportDeterminism},
  };
  // Runtime budgets in seconds, where one applies.
  const std::map<int, double> budget = {{1, 1.0}, {3, 10.0}, {7, 60.0}, {8, 300.0}};

  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("raised: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (auto it = budget.find(c.id); it != budget.end() && seconds >= it->second) {
      o.pass = false;
      o.detail += " (over the " + std::to_string(static_cast<int>(it->second)) + " s budget)";
    }
    std::printf("%s criterion %2d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), seconds);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
