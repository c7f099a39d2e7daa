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

#include "wlslam/sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "wlslam/errors.h"

namespace wlslam {
namespace {

constexpr std::uint64_t kWorldStream = 1;
constexpr std::uint64_t kOdometryStream = 2;
constexpr std::uint64_t kWifiStream = 3;
constexpr std::uint64_t kLidarStream = 4;

double Cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double DistanceToSegment(const Eigen::Vector2d& p, const Segment& s) {
  const Eigen::Vector2d e = s.b - s.a;
  const double length_sq = e.squaredNorm();
  double u = length_sq > 0. ? (p - s.a).dot(e) / length_sq : 0.;
  u = std::clamp(u, 0., 1.);
  return (s.a + u * e - p).norm();
}

void AddBox(double x0, double y0, double x1, double y1,
            std::vector<Segment>* walls) {
  const Eigen::Vector2d c0(x0, y0), c1(x1, y0), c2(x1, y1), c3(x0, y1);
  walls->push_back({c0, c1});
  walls->push_back({c1, c2});
  walls->push_back({c2, c3});
  walls->push_back({c3, c0});
}

// Parallel-parked cars along a wall running in `axis` direction from `from`
// to `to`; `wall` is the wall coordinate on the other axis and `side` (+1 or
// -1) points into the lane. A structural column stands against the wall at
// every other slot boundary.
void ParkCars(int axis, double from, double to, double wall, int side,
              std::mt19937_64* rng, std::vector<Segment>* walls) {
  constexpr double kSlot = 6.;
  constexpr double kCarLength = 4.5;
  constexpr double kCarWidth = 1.8;
  constexpr double kWallGap = 0.3;
  constexpr double kColumn = 0.5;
  constexpr double kColumnJitter = 1.5;
  constexpr double kClearance = 0.35;
  const auto add = [&](double a0, double a1, double b0, double b1) {
    if (axis == 0) {
      AddBox(a0, std::min(b0, b1), a1, std::max(b0, b1), walls);
    } else {
      AddBox(std::min(b0, b1), a0, std::max(b0, b1), a1, walls);
    }
  };
  std::uniform_real_distribution<double> unit(0., 1.);
  for (double start = from + 0.5; start + kSlot <= to; start += kSlot) {
    // Jittered columns keep empty stretches from being translation invariant.
    const double column = start + (unit(*rng) - 0.5) * kColumnJitter;
    add(column - 0.5 * kColumn, column + 0.5 * kColumn, wall,
        wall + side * kColumn);
    const double occupied = unit(*rng);
    const double length = kCarLength + (unit(*rng) - 0.5);
    const double shift = unit(*rng) * (kSlot - 2. * kClearance - length);
    const double depth = kWallGap + 0.4 * unit(*rng);
    if (occupied > 0.65) continue;
    const double a0 = start + kClearance + shift;
    const double b0 = wall + side * depth;
    add(a0, a0 + length, b0, b0 + side * kCarWidth);
  }
}

Eigen::Vector2d PointAtArc(std::span<const Eigen::Vector2d> waypoints,
                           std::span<const double> arc, double s) {
  s = std::clamp(s, 0., arc.back());
  const auto it = std::upper_bound(arc.begin(), arc.end(), s);
  std::size_t k = it == arc.begin() ? 0 : (it - arc.begin()) - 1;
  if (k + 1 >= waypoints.size()) return waypoints.back();
  const double length = arc[k + 1] - arc[k];
  const double u = length > 0. ? (s - arc[k]) / length : 0.;
  return waypoints[k] + u * (waypoints[k + 1] - waypoints[k]);
}

}  // namespace

void ValidateNoise(const SensorNoiseSpec& n) {
  if (n.odom_trans_noise < 0. || n.odom_rot_noise < 0. ||
      n.odom_drift_bias < 0. || n.rss_noise_sigma < 0. ||
      n.lidar_range_noise < 0.) {
    throw Error(ErrorCode::kInvalidInput, "noise parameters must be >= 0");
  }
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index) {
  // SplitMix64 finalizer over a combination of the three inputs.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1) +
                    0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string ApId(int index) {
  const std::uint64_t h = DeriveSeed(static_cast<std::uint64_t>(index), 0x4150);
  char buffer[18];
  std::snprintf(buffer, sizeof(buffer), "02:%02x:%02x:%02x:%02x:%02x",
                static_cast<unsigned>((h >> 8) & 0xff),
                static_cast<unsigned>((h >> 16) & 0xff),
                static_cast<unsigned>((h >> 24) & 0xff),
                static_cast<unsigned>((index >> 8) & 0xff),
                static_cast<unsigned>(index & 0xff));
  return buffer;
}

WorldSpec MakeCarparkWorld(const Eigen::Vector2d& extent, int num_aps,
                           std::uint64_t seed) {
  if (!(extent.x() > 0.) || !(extent.y() > 0.) || num_aps < 0) {
    throw Error(ErrorCode::kInvalidInput, "invalid carpark extent");
  }
  constexpr double kLane = 8.;
  WorldSpec world;
  world.extent = extent;
  world.seed = seed;
  std::mt19937_64 rng(DeriveSeed(seed, kWorldStream));
  const double ex = extent.x();
  const double ey = extent.y();
  AddBox(0., 0., ex, ey, &world.walls);
  if (ex > 2. * kLane + 2. && ey > 2. * kLane + 2.) {
    const double ix1 = ex - kLane;
    const double iy1 = ey - kLane;
    AddBox(kLane, kLane, ix1, iy1, &world.walls);
    ParkCars(1, kLane, iy1, 0., +1, &rng, &world.walls);    // west lane
    ParkCars(1, kLane, iy1, kLane, -1, &rng, &world.walls);
    ParkCars(1, kLane, iy1, ex, -1, &rng, &world.walls);    // east lane
    ParkCars(1, kLane, iy1, ix1, +1, &rng, &world.walls);
    ParkCars(0, kLane, ix1, 0., +1, &rng, &world.walls);    // south lane
    ParkCars(0, kLane, ix1, kLane, -1, &rng, &world.walls);
    ParkCars(0, kLane, ix1, ey, -1, &rng, &world.walls);    // north lane
    ParkCars(0, kLane, ix1, iy1, +1, &rng, &world.walls);
  }
  std::uniform_real_distribution<double> ux(0., ex);
  std::uniform_real_distribution<double> uy(0., ey);
  for (int n = 0; n < num_aps; ++n) {
    const double x = ux(rng);
    world.ap_positions.emplace_back(x, uy(rng));
  }
  return world;
}

std::vector<TimedPose> GenerateTrajectory(
    const WorldSpec& world, std::span<const Eigen::Vector2d> waypoints,
    double speed, double dt, double heading_smoothing) {
  if (waypoints.empty()) {
    throw Error(ErrorCode::kInvalidInput, "at least one waypoint is required");
  }
  if (!(speed > 0.) || !(dt > 0.)) {
    throw Error(ErrorCode::kInvalidInput, "speed and dt must be positive");
  }
  for (const Eigen::Vector2d& w : waypoints) {
    if (!(w.x() >= 0. && w.y() >= 0. && w.x() <= world.extent.x() &&
          w.y() <= world.extent.y())) {
      char buffer[128];
      std::snprintf(buffer, sizeof(buffer),
                    "waypoint (%.3f, %.3f) outside the %.1f x %.1f world",
                    w.x(), w.y(), world.extent.x(), world.extent.y());
      throw Error(ErrorCode::kInvalidInput, buffer);
    }
  }
  std::vector<double> arc(waypoints.size(), 0.);
  for (std::size_t k = 1; k < waypoints.size(); ++k) {
    arc[k] = arc[k - 1] + (waypoints[k] - waypoints[k - 1]).norm();
  }
  const double total = arc.back();
  const double step = speed * dt;
  const long count = static_cast<long>(std::floor(total / step + 1e-9)) + 1;

  // Initial heading for degenerate paths is along +x.
  double last_heading = 0.;
  std::vector<TimedPose> poses;
  poses.reserve(count);
  for (long k = 0; k < count; ++k) {
    const double s = std::min(k * step, total);
    const Eigen::Vector2d position = PointAtArc(waypoints, arc, s);
    const Eigen::Vector2d chord =
        PointAtArc(waypoints, arc, s + heading_smoothing) -
        PointAtArc(waypoints, arc, s - heading_smoothing);
    if (chord.norm() > 1e-9) last_heading = std::atan2(chord.y(), chord.x());
    poses.push_back({k * dt, Pose2D(position, last_heading)});
  }
  return poses;
}

std::vector<TimedPose> CorruptOdometry(std::span<const TimedPose> truth,
                                       const SensorNoiseSpec& noise,
                                       std::uint64_t seed) {
  ValidateNoise(noise);
  std::vector<TimedPose> odometry(truth.begin(), truth.end());
  if (truth.empty() || (noise.odom_trans_noise == 0. &&
                        noise.odom_rot_noise == 0. &&
                        noise.odom_drift_bias == 0.)) {
    return odometry;
  }
  std::mt19937_64 rng(DeriveSeed(seed, kOdometryStream));
  std::normal_distribution<double> gauss(0., 1.);
  Pose2D pose = truth.front().pose;
  for (std::size_t k = 1; k < truth.size(); ++k) {
    const Transform2D step = Relative(truth[k - 1].pose, truth[k].pose);
    const double distance = step.translation().norm();
    const double trans_sigma = noise.odom_trans_noise * distance;
    const double rot_sigma = noise.odom_rot_noise * std::abs(step.dtheta());
    const double dx = step.dx() + trans_sigma * gauss(rng);
    const double dy = step.dy() + trans_sigma * gauss(rng);
    const double dtheta = step.dtheta() + rot_sigma * gauss(rng) +
                          noise.odom_drift_bias * distance;
    pose = Compose(pose, Transform2D(dx, dy, dtheta));
    odometry[k].pose = pose;
  }
  return odometry;
}

double ExpectedRss(double distance, const SensorNoiseSpec& noise) {
  return noise.tx_power_at_1m -
         10. * noise.path_loss_exponent * std::log10(std::max(distance, 1.));
}

Fingerprint SampleWifi(const Pose2D& pose, double timestamp,
                       const WorldSpec& world, const SensorNoiseSpec& noise,
                       std::uint64_t seed) {
  std::mt19937_64 rng(DeriveSeed(seed, kWifiStream));
  std::normal_distribution<double> gauss(0., 1.);
  std::vector<ApReading> readings;
  for (std::size_t n = 0; n < world.ap_positions.size(); ++n) {
    const double distance = (world.ap_positions[n] - pose.translation()).norm();
    // Always draw so that the noise of one AP does not depend on others.
    const double rss =
        ExpectedRss(distance, noise) + noise.rss_noise_sigma * gauss(rng);
    if (rss < noise.detection_floor) continue;
    readings.push_back({ApId(static_cast<int>(n)), rss});
  }
  return Fingerprint(timestamp, readings);
}

double CastRay(std::span<const Segment> walls, const Eigen::Vector2d& origin,
               double angle, double range_max) {
  const Eigen::Vector2d d(std::cos(angle), std::sin(angle));
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : walls) {
    const Eigen::Vector2d e = s.b - s.a;
    const double denominator = Cross(d, e);
    if (std::abs(denominator) < 1e-12) continue;
    const Eigen::Vector2d w = s.a - origin;
    const double t = Cross(w, e) / denominator;
    const double u = Cross(w, d) / denominator;
    if (t > 1e-9 && u >= 0. && u <= 1. && t < best) best = t;
  }
  return best <= range_max ? best : std::numeric_limits<double>::infinity();
}

RangeScan SampleLidar(const Pose2D& pose, double timestamp,
                      const WorldSpec& world, const SensorNoiseSpec& noise,
                      const LidarSpec& lidar, std::uint64_t seed) {
  std::vector<Segment> nearby;
  for (const Segment& s : world.walls) {
    if (DistanceToSegment(pose.translation(), s) <= lidar.range_max) {
      nearby.push_back(s);
    }
  }
  RangeScan scan;
  scan.timestamp = timestamp;
  scan.angle_min = -0.5 * lidar.field_of_view;
  scan.angle_increment = lidar.angle_increment;
  scan.range_max = lidar.range_max;
  const int rays =
      static_cast<int>(std::llround(lidar.field_of_view / lidar.angle_increment)) + 1;
  std::mt19937_64 rng(DeriveSeed(seed, kLidarStream));
  std::normal_distribution<double> gauss(0., 1.);
  scan.ranges.reserve(rays);
  for (int r = 0; r < rays; ++r) {
    const double bearing = scan.angle_min + r * scan.angle_increment;
    double range = CastRay(nearby, pose.translation(), pose.theta() + bearing,
                           lidar.range_max);
    const double perturbation = noise.lidar_range_noise * gauss(rng);
    if (std::isfinite(range)) {
      range = std::max(range + perturbation, 0.);
      if (range >= lidar.range_max) {
        range = std::numeric_limits<double>::infinity();
      }
    }
    scan.ranges.push_back(range);
  }
  return scan;
}

std::vector<Eigen::Vector2d> LoopWaypoints(const ScenarioConfig& config) {
  const double o = config.lane_offset;
  const Eigen::Vector2d corners[4] = {
      {o, o},
      {config.extent.x() - o, o},
      {config.extent.x() - o, config.extent.y() - o},
      {o, config.extent.y() - o}};
  std::vector<Eigen::Vector2d> waypoints = {corners[0]};
  double remaining = std::max(config.laps, 0.) * 4.;
  int corner = 0;
  while (remaining > 1e-9) {
    const Eigen::Vector2d& from = corners[corner % 4];
    const Eigen::Vector2d& to = corners[(corner + 1) % 4];
    const double u = std::min(remaining, 1.);
    waypoints.push_back(from + u * (to - from));
    remaining -= u;
    ++corner;
  }
  return waypoints;
}

Scenario GenerateScenario(const ScenarioConfig& config, std::uint64_t seed) {
  ValidateNoise(config.noise);
  if (!(config.sensor_period > 0.)) {
    throw Error(ErrorCode::kInvalidInput, "sensor_period must be positive");
  }
  Scenario scenario;
  scenario.world = MakeCarparkWorld(config.extent, config.num_aps, seed);
  const std::vector<Eigen::Vector2d> waypoints = LoopWaypoints(config);
  scenario.ground_truth = GenerateTrajectory(scenario.world, waypoints,
                                             config.speed, config.dt);
  scenario.odometry =
      CorruptOdometry(scenario.ground_truth, config.noise, seed);
  const double end = scenario.ground_truth.back().timestamp;
  for (long k = 0;; ++k) {
    const double t = k * config.sensor_period;
    if (t > end + 1e-9) break;
    const Pose2D pose = InterpolatePose(scenario.ground_truth, t);
    scenario.fingerprints.push_back(
        SampleWifi(pose, t, scenario.world, config.noise,
                   DeriveSeed(seed, kWifiStream, k)));
    scenario.scans.push_back(SampleLidar(pose, t, scenario.world,
                                         config.noise, config.lidar,
                                         DeriveSeed(seed, kLidarStream, k)));
  }
  return scenario;
}

void WriteScenario(const Scenario& scenario,
                   const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const auto open = [&](const char* name) {
    std::ofstream out(directory / name);
    if (!out) {
      throw Error(ErrorCode::kIo, "cannot write " + (directory / name).string());
    }
    return out;
  };
  {
    std::ofstream out = open("odometry.csv");
    WriteOdometryCsv(scenario.odometry, out);
  }
  {
    std::ofstream out = open("wifi.csv");
    WriteWifiLog(scenario.fingerprints, out);
  }
  {
    std::ofstream out = open("scans.jsonl");
    WriteScanLog(scenario.scans, out);
  }
  WriteTum(scenario.ground_truth, directory / "ground_truth.tum");
}

}  // namespace wlslam
