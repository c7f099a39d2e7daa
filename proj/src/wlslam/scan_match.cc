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

#include "wlslam/scan_match.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <tuple>

#include "json.hpp"
#include "wlslam/errors.h"
#include "wlslam/kd_tree.h"
#include "wlslam/rigid_alignment.h"

namespace wlslam {
namespace {

constexpr int kMinScanPoints = 10;

struct Correspondences {
  std::vector<Eigen::Vector2d> source;
  std::vector<Eigen::Vector2d> target;
  std::vector<int> target_indices;
  std::vector<double> weights;
  double sum_squared = 0.;
  double truncated_objective = 0.;
  // Per source point, the nearest target point of the previous pass (or -1);
  // its distance bounds the next search without changing the result.
  std::vector<int> hints;
};

// Cauchy loss of a squared distance and its derivative (the IRLS weight).
double RobustLoss(double squared, double scale) {
  if (scale <= 0.) return squared;
  const double c2 = scale * scale;
  return c2 * std::log1p(squared / c2);
}

double RobustWeight(double squared, double scale) {
  if (scale <= 0.) return 1.;
  return 1. / (1. + squared / (scale * scale));
}

// Target points with their short links (segments to other target points
// within link_radius, stored at the lower index) and, per point, the points
// within twice that radius.
struct TargetSurface {
  const LaserScan& scan;
  const KdTree2D& tree;
  std::vector<std::vector<int>> links;
  std::vector<std::vector<int>> nearby;
  double link_radius = 0.;
  mutable std::vector<int> buffer;
};

TargetSurface BuildSurface(const LaserScan& target, const KdTree2D& tree,
                           double link_radius) {
  const std::size_t n_points = target.points.size();
  TargetSurface surface{target, tree, {}, {}, link_radius, {}};
  if (link_radius <= 0.) return surface;
  surface.links.resize(n_points);
  surface.nearby.resize(n_points);
  const double link_squared = link_radius * link_radius;
  for (std::size_t n = 0; n < n_points; ++n) {
    tree.Within(target.points[n], 4. * link_squared, &surface.nearby[n]);
    for (int m : surface.nearby[n]) {
      if (static_cast<std::size_t>(m) > n && target.points[m] != target.points[n] &&
          (target.points[m] - target.points[n]).squaredNorm() <= link_squared) {
        surface.links[n].push_back(m);
      }
    }
  }
  return surface;
}

Eigen::Vector2d ClosestOnSegment(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                 const Eigen::Vector2d& query) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp((query - a).dot(ab) / ab.squaredNorm(), 0., 1.);
  return a + t * ab;
}

// Closest surface point to `query` within `radius`, and the nearest target
// point index, or -1. Both endpoints of a segment whose closest point is at
// distance s < d (the nearest-point distance) lie within d + link_radius of
// the query, hence within 2d + link_radius of the nearest point, so both
// searches below are exact.
int ClosestSurfacePoint(const TargetSurface& surface, const Eigen::Vector2d& query,
                        double radius, int* hint, Eigen::Vector2d* closest,
                        double* squared) {
  const double reach = radius + 0.5 * surface.link_radius;
  double bound = reach * reach;
  if (*hint >= 0) {
    bound = std::min(bound, (surface.scan.points[*hint] - query).squaredNorm());
  }
  double nearest_squared = 0.;
  const int nearest = surface.tree.Nearest(query, bound, &nearest_squared);
  *hint = nearest;
  if (nearest < 0) return -1;
  *closest = surface.scan.points[nearest];
  *squared = nearest_squared;
  if (surface.link_radius > 0.) {
    const double nearest_distance = std::sqrt(nearest_squared);
    const std::vector<int>* candidates = &surface.nearby[nearest];
    if (nearest_distance > 0.5 * surface.link_radius) {
      const double search = nearest_distance + surface.link_radius;
      surface.tree.Within(query, search * search, &surface.buffer);
      candidates = &surface.buffer;
    }
    for (int a : *candidates) {
      for (int b : surface.links[a]) {
        const Eigen::Vector2d p =
            ClosestOnSegment(surface.scan.points[a], surface.scan.points[b], query);
        const double d = (p - query).squaredNorm();
        if (d < *squared) {
          *squared = d;
          *closest = p;
        }
      }
    }
  }
  return *squared <= radius * radius ? nearest : -1;
}

void FindCorrespondences(const LaserScan& source, const TargetSurface& surface,
                         const Transform2D& transform, double radius,
                         double robust_scale, Correspondences* out) {
  const double radius_squared = radius * radius;
  const double truncated_loss = RobustLoss(radius_squared, robust_scale);
  out->source.clear();
  out->target.clear();
  out->target_indices.clear();
  out->weights.clear();
  out->sum_squared = 0.;
  double truncated = 0.;
  const Eigen::Matrix2d rotation = transform.rotation();
  const Eigen::Vector2d translation = transform.translation();
  out->hints.resize(source.points.size(), -1);
  for (std::size_t n = 0; n < source.points.size(); ++n) {
    const Eigen::Vector2d& p = source.points[n];
    Eigen::Vector2d closest;
    double squared = 0.;
    const int nearest = ClosestSurfacePoint(surface, rotation * p + translation, radius,
                                            &out->hints[n], &closest, &squared);
    if (nearest < 0) {
      truncated += truncated_loss;
      continue;
    }
    out->source.push_back(p);
    out->target.push_back(closest);
    out->target_indices.push_back(nearest);
    out->weights.push_back(RobustWeight(squared, robust_scale));
    out->sum_squared += squared;
    truncated += RobustLoss(squared, robust_scale);
  }
  out->truncated_objective = truncated / static_cast<double>(source.points.size());
}

// Uniform index in [0, n) from raw engine output, stable across standard
// library implementations.
std::size_t UniformIndex(std::mt19937_64& engine, std::size_t n) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t value;
  do {
    value = engine();
  } while (value >= limit);
  return static_cast<std::size_t>(value % n);
}

void SortClosures(std::vector<LoopClosure>* closures) {
  std::sort(closures->begin(), closures->end(),
            [](const LoopClosure& a, const LoopClosure& b) {
              return std::tie(a.node_i, a.node_j) < std::tie(b.node_i, b.node_j);
            });
}

void MatchPair(int i, int j, const Transform2D& guess, const NodeScans& scans,
               const IcpParams& params, ClosureSource source,
               ScanConstraintReport* report) {
  ++report->attempted;
  IcpResult result;
  try {
    result = Icp(*scans[i], *scans[j], guess, params);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoMatch) throw;
    ++report->no_match;
    return;
  }
  if (!AcceptMatch(result, *scans[i], *scans[j])) {
    ++report->rejected;
    return;
  }
  report->closures.push_back(
      {i, j, result.transform, std::sqrt(result.fitness), source});
}

}  // namespace

LaserScan ToLaserScan(const RangeScan& scan, double fill_gap,
                      double fill_spacing) {
  LaserScan result;
  result.timestamp = scan.timestamp;
  result.max_range = scan.range_max;
  const bool fill = fill_gap > 0. && fill_spacing > 0.;
  bool have_previous = false;
  Eigen::Vector2d previous;
  for (std::size_t n = 0; n < scan.ranges.size(); ++n) {
    const double bearing = scan.angle_min + n * scan.angle_increment;
    const double range = scan.ranges[n];
    if (!std::isfinite(range) || range >= scan.range_max) {
      result.no_return_bearings.push_back(bearing);
      have_previous = false;
      continue;
    }
    if (range <= 0.) {
      have_previous = false;
      continue;
    }
    const Eigen::Vector2d point(range * std::cos(bearing),
                                range * std::sin(bearing));
    if (fill && have_previous) {
      const double gap = (point - previous).norm();
      if (gap <= fill_gap) {
        const int steps = static_cast<int>(gap / fill_spacing);
        for (int k = 1; k <= steps; ++k) {
          const double u = k * fill_spacing / gap;
          if (u >= 1.) break;
          result.points.push_back(previous + u * (point - previous));
        }
      }
    }
    result.points.push_back(point);
    previous = point;
    have_previous = true;
  }
  return result;
}

LaserScan VoxelDownsample(const LaserScan& scan, double voxel) {
  if (!(voxel > 0.)) return scan;
  std::map<std::pair<long, long>, int> cell_of;
  std::vector<Eigen::Vector2d> sums;
  std::vector<int> counts;
  for (const Eigen::Vector2d& p : scan.points) {
    const std::pair<long, long> key{static_cast<long>(std::floor(p.x() / voxel)),
                                    static_cast<long>(std::floor(p.y() / voxel))};
    const auto [it, inserted] = cell_of.emplace(key, static_cast<int>(sums.size()));
    if (inserted) {
      sums.push_back(p);
      counts.push_back(1);
    } else {
      sums[it->second] += p;
      ++counts[it->second];
    }
  }
  LaserScan result = scan;
  result.points.clear();
  for (std::size_t n = 0; n < sums.size(); ++n) {
    result.points.push_back(sums[n] / counts[n]);
  }
  return result;
}

void ValidateIcpParams(const IcpParams& params) {
  if (params.max_iterations <= 0 || !(params.correspondence_radius > 0.) ||
      !(params.convergence_epsilon > 0.) || !(params.proximity_trigger > 0.) ||
      !(params.loop_radius > 0.) || !(params.extra_pose_fraction >= 0.) ||
      !(params.extra_pose_fraction <= 1.) || params.voxel_size < 0. ||
      params.robust_scale < 0. || params.fill_gap < 0. || params.link_radius < 0.) {
    throw Error(ErrorCode::kInvalidInput, "invalid ICP parameters");
  }
}

IcpResult Icp(const LaserScan& source, const LaserScan& target,
              const Transform2D& initial_guess, const IcpParams& params) {
  ValidateIcpParams(params);
  if (source.points.size() < kMinScanPoints ||
      target.points.size() < kMinScanPoints) {
    throw Error(ErrorCode::kInvalidInput, "ICP needs at least 10 points per scan");
  }
  const KdTree2D tree(target.points);
  // Plain nearest-point matching until it settles, then refinement on the
  // linked surface. Surface distances never exceed vertex distances, so the
  // objective stays non-increasing across the switch.
  const TargetSurface vertices = BuildSurface(target, tree, 0.);
  std::optional<TargetSurface> linked;
  const TargetSurface* surface = &vertices;
  IcpResult result;
  result.transform = initial_guess;
  Correspondences pairs;
  Correspondences trial;
  const auto find = [&](const Transform2D& transform, Correspondences* out) {
    FindCorrespondences(source, *surface, transform, params.correspondence_radius,
                        params.robust_scale, out);
  };
  find(result.transform, &pairs);
  result.objective_history.push_back(pairs.truncated_objective);
  std::optional<Eigen::Vector3d> previous_step;
  while (result.iterations < params.max_iterations) {
    if (pairs.source.size() < 3) {
      throw Error(ErrorCode::kNoMatch, "fewer than 3 correspondences");
    }
    const Transform2D updated = AlignRigid(pairs.source, pairs.target, pairs.weights);
    const Eigen::Vector3d delta(updated.dx() - result.transform.dx(),
                                updated.dy() - result.transform.dy(),
                                NormalizeAngle(updated.dtheta() - result.transform.dtheta()));
    ++result.iterations;
    bool settled = delta.norm() < params.convergence_epsilon;
    // Successive updates along a steady direction with shrinking length are
    // extrapolated by the remaining geometric series. The jump is kept only
    // if it does not raise the objective, so the history stays monotone.
    if (!settled && previous_step &&
        delta.dot(*previous_step) > 0.99 * delta.norm() * previous_step->norm()) {
      const double ratio = delta.norm() / previous_step->norm();
      if (ratio < 1.) {
        const double gain = std::min(ratio / (1. - ratio), 25.);
        const Transform2D jump(updated.dx() + gain * delta.x(), updated.dy() + gain * delta.y(),
                               updated.dtheta() + gain * delta.z());
        trial.hints = pairs.hints;
        find(jump, &trial);
        if (trial.source.size() >= 3 && trial.truncated_objective <= pairs.truncated_objective) {
          result.transform = jump;
          std::swap(pairs, trial);
          result.objective_history.push_back(pairs.truncated_objective);
          previous_step.reset();
          continue;
        }
      }
    }
    trial.hints = pairs.hints;
    find(updated, &trial);
    if (trial.truncated_objective <= pairs.truncated_objective) {
      result.transform = updated;
      std::swap(pairs, trial);
      result.objective_history.push_back(pairs.truncated_objective);
    } else {
      // The update minimizes a majorizer of the objective, so only rounding
      // at the optimum can raise it: stay put and treat as settled.
      settled = true;
    }
    previous_step = delta;
    if (settled) {
      if (params.link_radius > 0. && !linked) {
        linked.emplace(BuildSurface(target, tree, params.link_radius));
        surface = &*linked;
        find(result.transform, &pairs);
        result.objective_history.push_back(pairs.truncated_objective);
        previous_step.reset();
        continue;
      }
      result.converged = true;
      break;
    }
  }
  if (pairs.source.size() < 3) {
    throw Error(ErrorCode::kNoMatch, "fewer than 3 correspondences");
  }
  result.fitness = pairs.sum_squared / static_cast<double>(pairs.source.size());
  std::vector<char> used(target.points.size(), 0);
  for (int index : pairs.target_indices) {
    if (!used[index]) {
      used[index] = 1;
      ++result.matched_points;
    }
  }
  return result;
}

bool AcceptMatch(const IcpResult& result, const LaserScan& source,
                 const LaserScan& target) {
  // matched >= (|s| + |t|) / 4, kept in integers.
  return 4L * result.matched_points >=
         static_cast<long>(source.points.size() + target.points.size());
}

std::vector<int> AssociateScans(std::span<const double> node_times,
                                std::span<const LaserScan> scans,
                                double tolerance) {
  std::vector<double> scan_times;
  scan_times.reserve(scans.size());
  for (const LaserScan& scan : scans) scan_times.push_back(scan.timestamp);
  std::vector<int> result;
  result.reserve(node_times.size());
  for (double t : node_times) {
    const auto nearest = NearestTimestamp(scan_times, t, tolerance);
    result.push_back(nearest ? static_cast<int>(*nearest) : -1);
  }
  return result;
}

ScanConstraintReport ProximityConstraints(const FingerprintTrack& track,
                                          const NodeScans& scans,
                                          const IcpParams& params) {
  ValidateIcpParams(params);
  if (scans.size() != static_cast<std::size_t>(track.size())) {
    throw Error(ErrorCode::kInvalidInput, "one scan slot per node is required");
  }
  ScanConstraintReport report;
  for (int i = 1; i < track.size(); ++i) {
    for (int j = i - 1; j >= 0; --j) {
      if (track.AccumulatedDistance(i, j) > params.proximity_trigger) break;
      if (scans[i] == nullptr || scans[j] == nullptr) continue;
      ++report.candidates;
      MatchPair(i, j, Relative(track[j].pose, track[i].pose), scans, params,
                ClosureSource::kIcpProximity, &report);
    }
  }
  SortClosures(&report.closures);
  return report;
}

ScanConstraintReport LoopConstraints(const FingerprintTrack& track,
                                     std::span<const Pose2D> optimized_poses,
                                     const NodeScans& scans,
                                     const IcpParams& params,
                                     double min_loop_distance,
                                     std::uint64_t seed) {
  ValidateIcpParams(params);
  if (optimized_poses.size() != static_cast<std::size_t>(track.size()) ||
      scans.size() != optimized_poses.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "optimized poses and scans must match the track");
  }
  ScanConstraintReport report;
  const double radius_squared = params.loop_radius * params.loop_radius;
  std::vector<std::vector<int>> candidates(track.size());
  std::vector<int> sources;
  for (int i = 0; i < track.size(); ++i) {
    if (scans[i] == nullptr) continue;
    for (int j = 0; j + 1 < i; ++j) {
      if (scans[j] == nullptr) continue;
      if (track.AccumulatedDistance(i, j) < min_loop_distance) continue;
      if ((optimized_poses[i].translation() - optimized_poses[j].translation())
              .squaredNorm() > radius_squared) {
        continue;
      }
      candidates[i].push_back(j);
    }
    if (!candidates[i].empty()) sources.push_back(i);
  }

  const auto selected_count = static_cast<std::size_t>(
      std::llround(params.extra_pose_fraction * sources.size()));
  std::mt19937_64 engine(seed);
  // Partial Fisher-Yates: the first selected_count slots are a uniform sample.
  for (std::size_t n = 0; n < selected_count; ++n) {
    std::swap(sources[n], sources[n + UniformIndex(engine, sources.size() - n)]);
  }
  sources.resize(selected_count);
  std::sort(sources.begin(), sources.end());

  for (int i : sources) {
    for (int j : candidates[i]) {
      ++report.candidates;
      MatchPair(i, j, Relative(optimized_poses[j], optimized_poses[i]), scans,
                params, ClosureSource::kIcpLoop, &report);
    }
  }
  SortClosures(&report.closures);
  return report;
}

std::vector<RangeScan> ParseScanLog(std::istream& in, const std::string& name) {
  std::vector<RangeScan> scans;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string context = name + ":" + std::to_string(line_number);
    RangeScan scan;
    try {
      const auto json = nlohmann::json::parse(line);
      scan.timestamp = json.at("timestamp_s").get<double>();
      scan.angle_min = json.at("angle_min_rad").get<double>();
      scan.angle_increment = json.at("angle_increment_rad").get<double>();
      scan.range_max = json.at("range_max_m").get<double>();
      for (const auto& value : json.at("ranges_m")) {
        scan.ranges.push_back(value.is_number()
                                  ? value.get<double>()
                                  : std::numeric_limits<double>::quiet_NaN());
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, context + ": " + e.what());
    }
    if (!scans.empty() && scan.timestamp <= scans.back().timestamp) {
      throw Error(ErrorCode::kParse, context + ": timestamps must increase");
    }
    scans.push_back(std::move(scan));
  }
  return scans;
}

std::vector<RangeScan> ReadScanLog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scan log " + path.string());
  return ParseScanLog(in, path.string());
}

void WriteScanLog(std::span<const RangeScan> scans, std::ostream& out) {
  char buffer[64];
  for (const RangeScan& scan : scans) {
    std::snprintf(buffer, sizeof(buffer), "{\"timestamp_s\":%.3f,", scan.timestamp);
    out << buffer;
    std::snprintf(buffer, sizeof(buffer), "\"angle_min_rad\":%.9f,", scan.angle_min);
    out << buffer;
    std::snprintf(buffer, sizeof(buffer), "\"angle_increment_rad\":%.9f,",
                  scan.angle_increment);
    out << buffer;
    std::snprintf(buffer, sizeof(buffer), "\"range_max_m\":%.3f,\"ranges_m\":[",
                  scan.range_max);
    out << buffer;
    for (std::size_t n = 0; n < scan.ranges.size(); ++n) {
      if (n > 0) out << ',';
      if (std::isfinite(scan.ranges[n])) {
        std::snprintf(buffer, sizeof(buffer), "%.4f", scan.ranges[n]);
        out << buffer;
      } else {
        out << "null";
      }
    }
    out << "]}\n";
  }
}

}  // namespace wlslam
