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

#ifndef WLSLAM_SCAN_MATCH_H_
#define WLSLAM_SCAN_MATCH_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "wlslam/geometry.h"
#include "wlslam/sequence_loop.h"

namespace wlslam {

// Raw planar range scan as logged. Non-finite ranges mean no return.
struct RangeScan {
  double timestamp = 0.;
  double angle_min = 0.;
  double angle_increment = 0.;
  double range_max = 0.;
  std::vector<double> ranges;
};

// Scan as a point set in the sensor frame. Beams without a return (non-finite
// or at/over range_max) keep only their bearing.
struct LaserScan {
  double timestamp = 0.;
  std::vector<Eigen::Vector2d> points;
  std::vector<double> no_return_bearings;
  double max_range = 0.;
};

// Converts ranges to sensor-frame points; non-finite or >= range_max ranges
// become no-return bearings. With fill_gap > 0, returns of adjacent beams
// closer than fill_gap are joined by points every fill_spacing, so that
// surfaces are sampled evenly regardless of incidence angle.
LaserScan ToLaserScan(const RangeScan& scan, double fill_gap = 0.,
                      double fill_spacing = 0.05);

// Replaces the points falling in each `voxel` x `voxel` cell by their
// centroid. Output order follows the first point seen in each cell.
LaserScan VoxelDownsample(const LaserScan& scan, double voxel);

struct IcpParams {
  int max_iterations = 50;
  double correspondence_radius = 1.;
  double convergence_epsilon = 1e-4;
  double proximity_trigger = 1.;
  double loop_radius = 5.;
  double extra_pose_fraction = 0.1;
  double voxel_size = 0.05;
  // Cauchy scale (m) weighting correspondences inside the radius; 0 gives
  // plain least squares.
  double robust_scale = 0.2;
  // Largest gap (m) between adjacent returns that is filled in before
  // downsampling; 0 keeps the raw beam endpoints.
  double fill_gap = 0.5;
  // Once nearest-point matching settles, target points closer than this (m)
  // are joined by segments and each source point is paired with its closest
  // point on them until convergence. This escapes the sampling-alias minima
  // of pure vertex matching, which otherwise stall a few centimetres from
  // the solution on evenly spaced scans. 0 pairs with the nearest target
  // point only.
  double link_radius = 0.1;
};

void ValidateIcpParams(const IcpParams& params);

struct IcpResult {
  // Maps source-frame points into the target frame.
  Transform2D transform;
  // Mean squared distance of the final correspondences.
  double fitness = 0.;
  // Distinct target points paired within correspondence_radius at the final
  // transform.
  int matched_points = 0;
  bool converged = false;
  int iterations = 0;
  // Mean over all source points of rho(min(d², r²)), with d the distance to
  // the closest target point or link segment and rho the Cauchy
  // loss c² log(1 + e / c²) (identity when robust_scale is 0), evaluated
  // before every update and once at the final transform. Non-increasing.
  std::vector<double> objective_history;
};

// Point-to-point ICP: closest-point correspondences within
// correspondence_radius (k-d tree, then the link segments), rigid
// update by weighted centroid + SVD with Cauchy weights (a
// majorize-minimize step on the robust loss, so correspondences from
// partially overlapping regions do not bias the estimate), stop when the
// update is below convergence_epsilon or after max_iterations. Throws
// kInvalidInput for scans under 10 points and kNoMatch when fewer than 3
// correspondences remain.
IcpResult Icp(const LaserScan& source, const LaserScan& target,
              const Transform2D& initial_guess, const IcpParams& params);

// Matching points must reach half of the average point count of the scans.
bool AcceptMatch(const IcpResult& result, const LaserScan& source,
                 const LaserScan& target);

struct ScanConstraintReport {
  std::vector<LoopClosure> closures;  // sorted by (node_i, node_j)
  long candidates = 0;
  long attempted = 0;
  long no_match = 0;
  long rejected = 0;
};

// Per-node scan lookup; nullptr where a node has no scan.
using NodeScans = std::vector<const LaserScan*>;

// Scan index nearest to each node time within `tolerance`, or -1.
std::vector<int> AssociateScans(std::span<const double> node_times,
                                std::span<const LaserScan> scans,
                                double tolerance = 0.5);

// ICP between node pairs whose odometric path distance is at most
// proximity_trigger, seeded with the odometry relative pose.
ScanConstraintReport ProximityConstraints(const FingerprintTrack& track,
                                          const NodeScans& scans,
                                          const IcpParams& params);

// ICP between non-consecutive nodes j < i whose optimized positions lie within
// loop_radius and whose path distance is at least `min_loop_distance`. Only a
// seeded uniform subset (extra_pose_fraction) of the source nodes that have
// candidates is evaluated; the optimized relative pose seeds ICP.
ScanConstraintReport LoopConstraints(const FingerprintTrack& track,
                                     std::span<const Pose2D> optimized_poses,
                                     const NodeScans& scans,
                                     const IcpParams& params,
                                     double min_loop_distance,
                                     std::uint64_t seed);

// Scan log: one JSON object per line with timestamp_s, angle_min_rad,
// angle_increment_rad, range_max_m and ranges_m (null for no return).
std::vector<RangeScan> ParseScanLog(std::istream& in, const std::string& name);
std::vector<RangeScan> ReadScanLog(const std::filesystem::path& path);
void WriteScanLog(std::span<const RangeScan> scans, std::ostream& out);

}  // namespace wlslam

#endif  // WLSLAM_SCAN_MATCH_H_
