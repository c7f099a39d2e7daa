/*
 * Copyright 2026 The WLSLAM Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "wlslam/pipeline.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <utility>

#include "json.hpp"
#include "wlslam/errors.h"
#include "wlslam/sim.h"

namespace wlslam {
namespace {

using Json = nlohmann::ordered_json;

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>* timing) : timing_(timing) {}

  void Lap(const char* name) {
    const auto now = std::chrono::steady_clock::now();
    timing_->push_back(
        {name, std::chrono::duration<double, std::milli>(now - start_).count()});
    start_ = now;
  }

 private:
  std::vector<StageTiming>* timing_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Exclusive advisory lock on a directory, held for the object's lifetime.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& directory) {
    const std::string path = (directory / ".wlslam.lock").string();
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
      if (fd_ >= 0) ::close(fd_);
      throw Error(ErrorCode::kIo, "cannot lock output directory " +
                                      directory.string());
    }
  }
  ~DirectoryLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

std::vector<TimedPose> Timed(const FingerprintTrack& track,
                             const std::vector<Pose2D>& poses) {
  std::vector<TimedPose> timed;
  timed.reserve(poses.size());
  for (int n = 0; n < track.size(); ++n) {
    timed.push_back({track.timestamp(n), poses[n]});
  }
  return timed;
}

PassSummary Summarize(const OptimizationResult& result) {
  PassSummary summary;
  summary.iterations = result.iterations;
  summary.converged = result.converged;
  if (!result.chi2_history.empty()) {
    summary.initial_chi2 = result.chi2_history.front();
    summary.final_chi2 = result.chi2_history.back();
  }
  return summary;
}

Json PassJson(const PassSummary& pass) {
  Json j;
  j["iterations"] = pass.iterations;
  j["converged"] = pass.converged;
  j["initial_chi2"] = pass.initial_chi2;
  j["final_chi2"] = pass.final_chi2;
  return j;
}

Json MetricsEntry(const TrajectoryMetrics& metrics) {
  Json j;
  j["associated_poses"] = metrics.associated_poses;
  j["position_rmse_m"] = metrics.position_rmse;
  j["orientation_rmse_rad"] = metrics.orientation_rmse;
  j["raw_position_rmse_m"] = metrics.raw_position_rmse;
  j["raw_orientation_rmse_rad"] = metrics.raw_orientation_rmse;
  j["alignment"] = {{"dx", metrics.alignment.dx()},
                    {"dy", metrics.alignment.dy()},
                    {"dtheta", metrics.alignment.dtheta()}};
  return j;
}

Json MetricsEntry(const std::optional<TrajectoryMetrics>& metrics) {
  if (!metrics) return nullptr;
  return MetricsEntry(*metrics);
}

Json ReportJson(const ScanConstraintReport& report, std::size_t accepted) {
  Json j;
  j["candidate_pairs"] = report.candidates;
  j["icp_attempted"] = report.attempted;
  j["icp_no_match"] = report.no_match;
  j["icp_rejected"] = report.rejected;
  j["closures_accepted"] = accepted;
  return j;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

// Scan of a furnished 12 x 9 m room with `rays` beams over 270 degrees.
LaserScan BenchmarkRoomScan(const Pose2D& pose, int rays) {
  WorldSpec world;
  const auto box = [&](double x0, double y0, double x1, double y1) {
    world.walls.push_back({{x0, y0}, {x1, y0}});
    world.walls.push_back({{x1, y0}, {x1, y1}});
    world.walls.push_back({{x1, y1}, {x0, y1}});
    world.walls.push_back({{x0, y1}, {x0, y0}});
  };
  box(0., 0., 12., 9.);
  box(2., 6., 3.5, 7.);
  box(8., 1.5, 9., 4.);
  box(9.5, 6.5, 10., 7.);
  SensorNoiseSpec noise;
  noise.lidar_range_noise = 0.;
  LidarSpec lidar;
  lidar.angle_increment = lidar.field_of_view / (rays - 1);
  return ToLaserScan(SampleLidar(pose, 0., world, noise, lidar, 0));
}

}  // namespace

void ValidatePipelineConfig(const PipelineConfig& config) {
  ValidateSimilarityParams(config.similarity);
  ValidateSequenceMatchParams(config.sequence);
  ValidateIcpParams(config.icp);
  const OptimizerConfig& o = config.optimizer;
  if (o.max_iterations <= 0 || !(o.convergence_delta > 0.) ||
      !(o.initial_lambda > 0.) || !(o.lambda_factor > 1.)) {
    throw Error(ErrorCode::kInvalidInput, "optimizer settings must be positive");
  }
  if (!(config.map.resolution > 0.)) {
    throw Error(ErrorCode::kInvalidInput, "map resolution must be positive");
  }
  if (!(config.burst_window > 0.) || !(config.max_timestamp_gap > 0.) ||
      !(config.scan_tolerance > 0.)) {
    throw Error(ErrorCode::kInvalidInput, "time tolerances must be positive");
  }
  if (!config.enable_wifi && !config.enable_close_scans &&
      config.icp.extra_pose_fraction == 0.) {
    throw Error(ErrorCode::kInvalidInput,
                "at least one constraint source must be enabled");
  }
}

void SetDataDirectory(const std::filesystem::path& directory,
                      PipelineConfig* config) {
  config->odometry_path = directory / "odometry.csv";
  config->wifi_path = directory / "wifi.csv";
  config->scans_path = directory / "scans.jsonl";
  const std::filesystem::path truth = directory / "ground_truth.tum";
  config->ground_truth_path =
      std::filesystem::exists(truth) ? truth : std::filesystem::path();
}

SlamInputs LoadInputs(const PipelineConfig& config) {
  if (config.odometry_path.empty() || config.wifi_path.empty()) {
    throw Error(ErrorCode::kInvalidInput,
                "odometry and WiFi log paths are required");
  }
  SlamInputs inputs;
  inputs.odometry = ReadOdometryCsv(config.odometry_path);
  inputs.fingerprints = ReadWifiLog(config.wifi_path, config.burst_window);
  if (!config.scans_path.empty()) {
    inputs.scans = ReadScanLog(config.scans_path);
  }
  if (!config.ground_truth_path.empty()) {
    inputs.ground_truth = ReadTum(config.ground_truth_path);
  }
  return inputs;
}

SlamResult RunSlam(const SlamInputs& inputs, const PipelineConfig& config) {
  ValidatePipelineConfig(config);
  SlamResult result;
  Stopwatch stopwatch(&result.timing);

  std::vector<Fingerprint> fingerprints;
  for (const Fingerprint& f : inputs.fingerprints) {
    if (!f.empty()) fingerprints.push_back(f);
  }
  const FingerprintTrack track = FingerprintTrack::FromOdometry(
      inputs.odometry, fingerprints, config.max_timestamp_gap);
  if (track.size() < 2) {
    throw Error(ErrorCode::kInsufficientConstraints,
                "fewer than two fingerprints overlap the odometry");
  }
  const bool scan_matching =
      config.enable_close_scans || config.icp.extra_pose_fraction > 0.;
  if (scan_matching && inputs.scans.empty()) {
    throw Error(ErrorCode::kInvalidInput,
                "scan matching is enabled but no scans were provided");
  }
  std::vector<LaserScan> full_scans;
  std::vector<LaserScan> icp_scans;
  full_scans.reserve(inputs.scans.size());
  icp_scans.reserve(inputs.scans.size());
  for (const RangeScan& scan : inputs.scans) {
    full_scans.push_back(ToLaserScan(scan));
    icp_scans.push_back(VoxelDownsample(
        ToLaserScan(scan, config.icp.fill_gap, config.icp.voxel_size),
        config.icp.voxel_size));
  }
  const std::vector<double> node_times = track.timestamps();
  const std::vector<int> association =
      AssociateScans(node_times, full_scans, config.scan_tolerance);
  NodeScans node_scans(track.size(), nullptr);
  for (int n = 0; n < track.size(); ++n) {
    if (association[n] < 0) continue;
    ++result.nodes_with_scan;
    const LaserScan& scan = icp_scans[association[n]];
    if (scan.points.size() >= 10) node_scans[n] = &scan;
  }
  result.odometry = Timed(track, track.poses());
  stopwatch.Lap("ingest");

  if (config.enable_wifi) {
    const SimilarityTable table(track, config.similarity);
    LoopDetectionResult detection = DetectWifiLoopClosures(
        track, table, config.sequence, config.similarity);
    result.wifi_closures = std::move(detection.closures);
    result.wifi_diagnostics = detection.diagnostics;
  }
  stopwatch.Lap("wifi_loop_closures");

  const OptimizationResult first = Optimize(
      BuildGraph(track, result.wifi_closures, config.information),
      config.optimizer);
  const std::vector<Pose2D> first_poses = first.graph.poses();
  result.first_pass = Timed(track, first_poses);
  result.first_optimization = Summarize(first);
  stopwatch.Lap("first_optimization");

  if (config.enable_close_scans) {
    result.proximity_report =
        ProximityConstraints(track, node_scans, config.icp);
    result.proximity_closures = std::move(result.proximity_report.closures);
    result.proximity_report.closures.clear();
  }
  stopwatch.Lap("proximity_icp");

  if (config.icp.extra_pose_fraction > 0.) {
    result.loop_report =
        LoopConstraints(track, first_poses, node_scans, config.icp,
                        config.sequence.min_loop_distance, config.seed);
    result.loop_closures = std::move(result.loop_report.closures);
    result.loop_report.closures.clear();
  }
  stopwatch.Lap("loop_icp");

  const std::size_t scan_closures =
      result.proximity_closures.size() + result.loop_closures.size();
  if (result.wifi_closures.empty() && scan_closures == 0) {
    throw Error(ErrorCode::kInsufficientConstraints,
                "no loop-closure or scan-matching constraints were found");
  }
  if (scan_closures > 0) {
    std::vector<LoopClosure> all = result.wifi_closures;
    all.insert(all.end(), result.proximity_closures.begin(),
               result.proximity_closures.end());
    all.insert(all.end(), result.loop_closures.begin(),
               result.loop_closures.end());
    PoseGraph graph = BuildGraph(track, all, config.information);
    for (int n = 0; n < track.size(); ++n) graph.SetPose(n, first_poses[n]);
    const OptimizationResult second = Optimize(graph, config.optimizer);
    result.final_trajectory = Timed(track, second.graph.poses());
    result.second_optimization = Summarize(second);
  } else {
    result.final_trajectory = result.first_pass;
    result.second_optimization.initial_chi2 = result.first_optimization.final_chi2;
    result.second_optimization.final_chi2 = result.first_optimization.final_chi2;
    result.second_optimization.converged = true;
  }
  stopwatch.Lap("second_optimization");

  if (config.render_map) {
    std::vector<Pose2D> poses;
    std::vector<LaserScan> scans;
    for (int n = 0; n < track.size(); ++n) {
      if (association[n] < 0) continue;
      poses.push_back(result.final_trajectory[n].pose);
      scans.push_back(full_scans[association[n]]);
    }
    if (poses.empty()) {
      poses = {result.final_trajectory.front().pose};
    }
    result.map = Render(poses, scans, config.map);
  }
  stopwatch.Lap("render_map");

  if (!inputs.ground_truth.empty()) {
    result.odometry_metrics = Evaluate(result.odometry, inputs.ground_truth);
    result.first_pass_metrics = Evaluate(result.first_pass, inputs.ground_truth);
    result.final_metrics =
        Evaluate(result.final_trajectory, inputs.ground_truth);
  }
  stopwatch.Lap("evaluate");
  return result;
}

std::string MetricsJson(const SlamResult& result) {
  Json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["nodes"] = result.final_trajectory.size();
  j["constraints"] = {
      {"odometry", result.final_trajectory.empty()
                       ? 0
                       : result.final_trajectory.size() - 1},
      {"wifi_loop", result.wifi_closures.size()},
      {"icp_proximity", result.proximity_closures.size()},
      {"icp_loop", result.loop_closures.size()}};
  j["optimization"] = {{"first_pass", PassJson(result.first_optimization)},
                       {"second_pass", PassJson(result.second_optimization)}};
  j["evaluation"] = {{"odometry", MetricsEntry(result.odometry_metrics)},
                     {"wifi_first_pass", MetricsEntry(result.first_pass_metrics)},
                     {"final", MetricsEntry(result.final_metrics)}};
  return j.dump(2) + "\n";
}

std::string EvaluationJson(const TrajectoryMetrics& metrics) {
  Json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["evaluation"] = MetricsEntry(metrics);
  return j.dump(2) + "\n";
}

std::string ErrorsCsv(const TrajectoryMetrics* metrics) {
  std::string csv =
      "timestamp_s,position_error_m,orientation_error_rad,raw_position_error_m\n";
  if (metrics == nullptr) return csv;
  char line[128];
  for (const PoseError& e : metrics->errors) {
    std::snprintf(line, sizeof(line), "%.3f,%.6f,%.6f,%.6f\n", e.timestamp,
                  e.position, e.orientation, e.raw_position);
    csv += line;
  }
  return csv;
}

std::string DiagnosticsJson(const SlamResult& result) {
  const LoopDetectionDiagnostics& d = result.wifi_diagnostics;
  Json wifi;
  wifi["pairs_considered"] = d.pairs_considered;
  wifi["pairs_passing_similarity"] = d.pairs_similarity_gate;
  wifi["pairs_pruned"] = d.pairs_pruned;
  wifi["alignments_failed"] = d.alignments_failed;
  wifi["closures_rejected"] = d.closures_rejected;
  wifi["closures_accepted"] = d.closures_accepted;
  wifi["residual_histogram"] = {
      {"bin_width_m", LoopDetectionDiagnostics::kHistogramBinWidth},
      {"counts", d.residual_histogram}};
  Json j;
  j["nodes"] = result.final_trajectory.size();
  j["nodes_with_scan"] = result.nodes_with_scan;
  j["wifi"] = wifi;
  j["proximity_icp"] =
      ReportJson(result.proximity_report, result.proximity_closures.size());
  j["loop_icp"] = ReportJson(result.loop_report, result.loop_closures.size());
  return j.dump(2) + "\n";
}

std::string TimingJson(const SlamResult& result) {
  Json stages = Json::array();
  double total = 0.;
  for (const StageTiming& s : result.timing) {
    stages.push_back({{"stage", s.name}, {"ms", s.milliseconds}});
    total += s.milliseconds;
  }
  Json j;
  j["stages"] = stages;
  j["total_ms"] = total;
  return j.dump(2) + "\n";
}

void WriteOutputs(const SlamResult& result, const PipelineConfig& config,
                  const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  DirectoryLock lock(directory);
  WriteTum(result.final_trajectory, directory / "trajectory.tum");
  if (result.map) ExportPgm(*result.map, directory / "map.pgm", config.map);
  WriteText(directory / "metrics.json", MetricsJson(result));
  WriteText(directory / "diagnostics.json", DiagnosticsJson(result));
  WriteText(directory / "timing.json", TimingJson(result));
  WriteText(directory / "errors.csv",
            ErrorsCsv(result.final_metrics ? &*result.final_metrics : nullptr));
}

OccupancyGrid RenderFromLogs(std::span<const TimedPose> trajectory,
                             std::span<const RangeScan> scans,
                             const PipelineConfig& config) {
  if (trajectory.empty()) {
    throw Error(ErrorCode::kInvalidInput, "cannot render an empty trajectory");
  }
  std::vector<double> times;
  times.reserve(trajectory.size());
  for (const TimedPose& p : trajectory) times.push_back(p.timestamp);
  std::vector<Pose2D> poses;
  std::vector<LaserScan> laser;
  for (const RangeScan& scan : scans) {
    const auto n = NearestTimestamp(times, scan.timestamp, config.scan_tolerance);
    if (!n) continue;
    poses.push_back(trajectory[*n].pose);
    laser.push_back(ToLaserScan(scan));
  }
  if (poses.empty()) {
    const Pose2D only = trajectory.front().pose;
    return Render(std::span<const Pose2D>(&only, 1), {}, config.map);
  }
  return Render(poses, laser, config.map);
}

SlamResult RunSlamFromConfig(const PipelineConfig& config) {
  if (config.output_dir.empty()) {
    throw Error(ErrorCode::kInvalidInput, "an output directory is required");
  }
  ValidatePipelineConfig(config);
  const SlamResult result = RunSlam(LoadInputs(config), config);
  WriteOutputs(result, config, config.output_dir);
  return result;
}

void RunMicrobenchmarks(ProfileReport* report) {
  using Clock = std::chrono::steady_clock;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rss(-90., -40.);
  constexpr int kAps = 44;
  std::vector<ApReading> a, b;
  for (int n = 0; n < kAps; ++n) {
    a.push_back({ApId(n), rss(rng)});
    b.push_back({ApId(n), rss(rng)});
  }
  const Fingerprint fa(0., a), fb(2., b);
  const SimilarityParams params;
  constexpr int kSimilarityCalls = 20000;
  volatile double sink = 0.;
  auto start = Clock::now();
  for (int n = 0; n < kSimilarityCalls; ++n) sink = sink + Similarity(fa, fb, params);
  report->similarity_aps = kAps;
  report->similarity_milliseconds =
      std::chrono::duration<double, std::milli>(Clock::now() - start).count() /
      kSimilarityCalls;

  const LaserScan target = BenchmarkRoomScan(Pose2D(5., 4., 0.3), 600);
  const LaserScan source = BenchmarkRoomScan(Pose2D(5.25, 3.85, 0.38), 600);
  const IcpParams icp;
  constexpr int kIcpCalls = 20;
  start = Clock::now();
  for (int n = 0; n < kIcpCalls; ++n) {
    sink = sink + Icp(source, target, Transform2D(), icp).fitness;
  }
  report->icp_points = static_cast<int>(
      (source.points.size() + target.points.size()) / 2);
  report->icp_milliseconds =
      std::chrono::duration<double, std::milli>(Clock::now() - start).count() /
      kIcpCalls;
}

ProfileReport Profile(const SlamInputs& inputs, const PipelineConfig& config) {
  ProfileReport report;
  const SlamResult result = RunSlam(inputs, config);
  report.stages = result.timing;
  for (const StageTiming& s : report.stages) {
    report.total_milliseconds += s.milliseconds;
  }
  RunMicrobenchmarks(&report);
  return report;
}

std::string ProfileJson(const ProfileReport& report) {
  Json stages = Json::array();
  for (const StageTiming& s : report.stages) {
    stages.push_back({{"stage", s.name}, {"ms", s.milliseconds}});
  }
  Json j;
  j["stages"] = stages;
  j["total_ms"] = report.total_milliseconds;
  j["similarity"] = {{"aps", report.similarity_aps},
                     {"ms_per_call", report.similarity_milliseconds}};
  j["icp"] = {{"points", report.icp_points},
              {"ms_per_call", report.icp_milliseconds}};
  return j.dump(2) + "\n";
}

}  // namespace wlslam
