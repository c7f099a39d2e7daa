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

#ifndef WLSLAM_EVALUATION_H_
#define WLSLAM_EVALUATION_H_

#include <span>
#include <vector>

#include "wlslam/geometry.h"
#include "wlslam/trajectory.h"

namespace wlslam {

struct PoseError {
  double timestamp = 0.;
  double position = 0.;      // after rigid alignment, m
  double orientation = 0.;   // after rigid alignment, rad
  double raw_position = 0.;  // without alignment, m
};

struct TrajectoryMetrics {
  int associated_poses = 0;
  // Maps estimate coordinates into the ground-truth frame.
  Transform2D alignment;
  double position_rmse = 0.;
  double orientation_rmse = 0.;
  double raw_position_rmse = 0.;
  double raw_orientation_rmse = 0.;
  std::vector<PoseError> errors;
};

// Associates every estimate pose with the ground-truth pose nearest in time
// (within `tolerance` seconds), rigidly aligns the estimate and reports
// aligned and raw errors. Throws kInvalidInput below two associations.
TrajectoryMetrics Evaluate(std::span<const TimedPose> estimate,
                           std::span<const TimedPose> ground_truth,
                           double tolerance = 0.5);

}  // namespace wlslam

#endif  // WLSLAM_EVALUATION_H_
