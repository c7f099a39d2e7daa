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

#include "wlslam/evaluation.h"

#include <cmath>

#include "wlslam/errors.h"
#include "wlslam/rigid_alignment.h"

namespace wlslam {

TrajectoryMetrics Evaluate(std::span<const TimedPose> estimate,
                           std::span<const TimedPose> ground_truth,
                           double tolerance) {
  std::vector<double> truth_times;
  truth_times.reserve(ground_truth.size());
  for (const TimedPose& p : ground_truth) truth_times.push_back(p.timestamp);

  std::vector<std::pair<const TimedPose*, const TimedPose*>> pairs;
  for (const TimedPose& e : estimate) {
    const auto match = NearestTimestamp(truth_times, e.timestamp, tolerance);
    if (match) pairs.emplace_back(&e, &ground_truth[*match]);
  }
  if (pairs.size() < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "fewer than two estimate poses associate with ground truth");
  }

  std::vector<Eigen::Vector2d> source, target;
  source.reserve(pairs.size());
  target.reserve(pairs.size());
  for (const auto& [e, t] : pairs) {
    source.push_back(e->pose.translation());
    target.push_back(t->pose.translation());
  }

  TrajectoryMetrics metrics;
  metrics.associated_poses = static_cast<int>(pairs.size());
  metrics.alignment = AlignRigid(source, target);
  double sum_pos = 0., sum_rot = 0., sum_raw_pos = 0., sum_raw_rot = 0.;
  for (const auto& [e, t] : pairs) {
    const Eigen::Vector2d aligned = Apply(metrics.alignment, e->pose.translation());
    PoseError error;
    error.timestamp = e->timestamp;
    error.position = (aligned - t->pose.translation()).norm();
    error.orientation = std::abs(NormalizeAngle(
        e->pose.theta() + metrics.alignment.dtheta() - t->pose.theta()));
    error.raw_position = (e->pose.translation() - t->pose.translation()).norm();
    const double raw_orientation =
        NormalizeAngle(e->pose.theta() - t->pose.theta());
    sum_pos += error.position * error.position;
    sum_rot += error.orientation * error.orientation;
    sum_raw_pos += error.raw_position * error.raw_position;
    sum_raw_rot += raw_orientation * raw_orientation;
    metrics.errors.push_back(error);
  }
  const double n = static_cast<double>(pairs.size());
  metrics.position_rmse = std::sqrt(sum_pos / n);
  metrics.orientation_rmse = std::sqrt(sum_rot / n);
  metrics.raw_position_rmse = std::sqrt(sum_raw_pos / n);
  metrics.raw_orientation_rmse = std::sqrt(sum_raw_rot / n);
  return metrics;
}

}  // namespace wlslam
