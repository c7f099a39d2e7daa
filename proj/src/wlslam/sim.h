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

#ifndef WLSLAM_SIM_H_
#define WLSLAM_SIM_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "wlslam/fingerprint.h"
#include "wlslam/geometry.h"
#include "wlslam/scan_match.h"
#include "wlslam/trajectory.h"

namespace wlslam {

struct Segment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
};

struct WorldSpec {
  std::vector<Segment> walls;
  std::vector<Eigen::Vector2d> ap_positions;
  Eigen::Vector2d extent{30., 200.};
  std::uint64_t seed = 0;
};

struct SensorNoiseSpec {
  double odom_trans_noise = 0.02;   // std-dev as a fraction of step length
  double odom_rot_noise = 0.05;     // rad per rad turned
  double odom_drift_bias = 0.002;   // rad per meter travelled
  double rss_noise_sigma = 6.;      // dBm
  double lidar_range_noise = 0.01;  // m
  double path_loss_exponent = 2.5;
  double tx_power_at_1m = -40.;     // dBm
  double detection_floor = -95.;    // dBm
};

void ValidateNoise(const SensorNoiseSpec& noise);

struct LidarSpec {
  double field_of_view = 1.5 * kPi;
  double angle_increment = 0.25 * kPi / 180.;
  double range_max = 20.;
};

// Deterministic 64-bit mixing used to derive independent per-stream seeds.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index = 0);

// MAC-like identifier of the access point with the given index.
std::string ApId(int index);

// Rectangular carpark of the given extent: outer walls, a central island
// 8 m in from each side, cars parked along both sides of every lane and
// `num_aps` uniformly placed access points.
WorldSpec MakeCarparkWorld(const Eigen::Vector2d& extent, int num_aps,
                           std::uint64_t seed);

// Constant-speed traversal of the polyline, sampled every `dt` seconds
// from t = 0. Headings follow the chord between points `heading_smoothing`
// meters ahead of and behind the current arc position.
std::vector<TimedPose> GenerateTrajectory(
    const WorldSpec& world, std::span<const Eigen::Vector2d> waypoints,
    double speed, double dt, double heading_smoothing = 0.5);

// Integrates the ground-truth step motions with multiplicative Gaussian
// noise and a heading bias proportional to the distance travelled.
std::vector<TimedPose> CorruptOdometry(std::span<const TimedPose> truth,
                                       const SensorNoiseSpec& noise,
                                       std::uint64_t seed);

double ExpectedRss(double distance, const SensorNoiseSpec& noise);

Fingerprint SampleWifi(const Pose2D& pose, double timestamp,
                       const WorldSpec& world, const SensorNoiseSpec& noise,
                       std::uint64_t seed);

// Range to the nearest wall along the ray, +infinity when nothing is hit
// within `range_max`.
double CastRay(std::span<const Segment> walls, const Eigen::Vector2d& origin,
               double angle, double range_max);

RangeScan SampleLidar(const Pose2D& pose, double timestamp,
                      const WorldSpec& world, const SensorNoiseSpec& noise,
                      const LidarSpec& lidar, std::uint64_t seed);

struct ScenarioConfig {
  Eigen::Vector2d extent{30., 200.};
  int num_aps = 100;
  double lane_offset = 4.;  // distance of the driven loop from the outer walls
  double laps = 2.5;
  double speed = 0.4;
  double dt = 0.1;
  double sensor_period = 2.;  // WiFi and LiDAR sampling period
  SensorNoiseSpec noise;
  LidarSpec lidar;
};

struct Scenario {
  WorldSpec world;
  std::vector<TimedPose> ground_truth;
  std::vector<TimedPose> odometry;
  std::vector<Fingerprint> fingerprints;
  std::vector<RangeScan> scans;
};

// Loop waypoints around the island, `laps` times (fractional laps end
// part-way), starting and ending at the south-west corner.
std::vector<Eigen::Vector2d> LoopWaypoints(const ScenarioConfig& config);

Scenario GenerateScenario(const ScenarioConfig& config, std::uint64_t seed);

// Writes odometry.csv, wifi.csv, scans.jsonl and ground_truth.tum.
void WriteScenario(const Scenario& scenario,
                   const std::filesystem::path& directory);

}  // namespace wlslam

#endif  // WLSLAM_SIM_H_
