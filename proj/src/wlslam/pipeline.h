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

#ifndef WLSLAM_PIPELINE_H_
#define WLSLAM_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlslam/evaluation.h"
#include "wlslam/fingerprint.h"
#include "wlslam/grid_map.h"
#include "wlslam/pose_graph.h"
#include "wlslam/scan_match.h"
#include "wlslam/sequence_loop.h"
#include "wlslam/trajectory.h"

namespace wlslam {

inline constexpr int kMetricsSchemaVersion = 1;

struct PipelineConfig {
  SimilarityParams similarity;
  SequenceMatchParams sequence;
  IcpParams icp;
  OptimizerConfig optimizer;
  InformationDefaults information;
  GridMapParams map;

  bool enable_wifi = true;
  bool enable_close_scans = true;
  bool render_map = true;
  std::uint64_t seed = 0;

  double burst_window = 2.;        // s, WiFi records per fingerprint
  double max_timestamp_gap = 5.;   // s, fingerprint to odometry
  double scan_tolerance = 0.5;     // s, scan to node association

  std::filesystem::path odometry_path;
  std::filesystem::path wifi_path;
  std::filesystem::path scans_path;
  std::filesystem::path ground_truth_path;  // optional
  std::filesystem::path output_dir;
};

// Throws kInvalidInput when a parameter is out of range or no constraint
// source is enabled.
void ValidatePipelineConfig(const PipelineConfig& config);

// Points `*_path` at the standard file names inside `directory`; the
// ground truth is only set when the file exists.
void SetDataDirectory(const std::filesystem::path& directory,
                      PipelineConfig* config);

struct SlamInputs {
  std::vector<TimedPose> odometry;
  std::vector<Fingerprint> fingerprints;
  std::vector<RangeScan> scans;
  std::vector<TimedPose> ground_truth;  // empty when unavailable
};

SlamInputs LoadInputs(const PipelineConfig& config);

struct StageTiming {
  std::string name;
  double milliseconds = 0.;
};

struct PassSummary {
  int iterations = 0;
  bool converged = false;
  double initial_chi2 = 0.;
  double final_chi2 = 0.;
};

struct SlamResult {
  // All trajectories are sampled at the graph node (fingerprint) times.
  std::vector<TimedPose> odometry;
  std::vector<TimedPose> first_pass;
  std::vector<TimedPose> final_trajectory;

  std::vector<LoopClosure> wifi_closures;
  std::vector<LoopClosure> proximity_closures;
  std::vector<LoopClosure> loop_closures;
  LoopDetectionDiagnostics wifi_diagnostics;
  ScanConstraintReport proximity_report;  // closures moved out
  ScanConstraintReport loop_report;       // closures moved out
  int nodes_with_scan = 0;

  PassSummary first_optimization;
  PassSummary second_optimization;

  std::optional<OccupancyGrid> map;

  std::optional<TrajectoryMetrics> odometry_metrics;
  std::optional<TrajectoryMetrics> first_pass_metrics;
  std::optional<TrajectoryMetrics> final_metrics;

  std::vector<StageTiming> timing;
};

// Runs the batch pipeline: WiFi loop closures, first optimization,
// close-proximity and loop ICP on the first-pass trajectory, second
// optimization and map rendering.
SlamResult RunSlam(const SlamInputs& inputs, const PipelineConfig& config);

std::string MetricsJson(const SlamResult& result);
std::string EvaluationJson(const TrajectoryMetrics& metrics);
// Per-pose error series with a header line; header only when null.
std::string ErrorsCsv(const TrajectoryMetrics* metrics);
std::string DiagnosticsJson(const SlamResult& result);
std::string TimingJson(const SlamResult& result);

// Writes trajectory.tum, map.pgm/.yaml, metrics.json, diagnostics.json,
// timing.json and errors.csv into `directory` while holding an exclusive
// lock on it.
void WriteOutputs(const SlamResult& result, const PipelineConfig& config,
                  const std::filesystem::path& directory);

// Renders scans at the trajectory pose nearest in time (within
// scan_tolerance); scans without a pose are skipped.
OccupancyGrid RenderFromLogs(std::span<const TimedPose> trajectory,
                             std::span<const RangeScan> scans,
                             const PipelineConfig& config);

// Load, run and write, as the `slam` command does.
SlamResult RunSlamFromConfig(const PipelineConfig& config);

struct ProfileReport {
  std::vector<StageTiming> stages;
  double total_milliseconds = 0.;
  int similarity_aps = 0;
  double similarity_milliseconds = 0.;
  int icp_points = 0;
  double icp_milliseconds = 0.;
};

// Per-call timings of one similarity comparison between two 44-AP
// fingerprints and one ICP between ~600-point scans.
void RunMicrobenchmarks(ProfileReport* report);

ProfileReport Profile(const SlamInputs& inputs, const PipelineConfig& config);

std::string ProfileJson(const ProfileReport& report);

}  // namespace wlslam

#endif  // WLSLAM_PIPELINE_H_
