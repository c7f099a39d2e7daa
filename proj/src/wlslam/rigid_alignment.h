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

#ifndef WLSLAM_RIGID_ALIGNMENT_H_
#define WLSLAM_RIGID_ALIGNMENT_H_

#include <span>

#include "Eigen/Core"
#include "wlslam/geometry.h"

namespace wlslam {

// Least-squares rigid transform T (rotation + translation, no scale) with
// T(source[n]) ≈ target[n]. Centroids are subtracted and the rotation is read
// off the SVD of the 2x2 cross-covariance, with the sign of the last singular
// direction flipped when needed so that det(R) = +1. With a degenerate
// (zero) cross-covariance the rotation is the identity.
Transform2D AlignRigid(std::span<const Eigen::Vector2d> source,
                       std::span<const Eigen::Vector2d> target);

// Weighted variant: minimizes sum w_n |T(source[n]) - target[n]|^2. An
// empty weight span means unit weights.
Transform2D AlignRigid(std::span<const Eigen::Vector2d> source,
                       std::span<const Eigen::Vector2d> target,
                       std::span<const double> weights);

// Proper rotation R maximizing trace(R * covariance), where covariance is
// sum (s - s_mean)(t - t_mean)^T.

Eigen::Matrix2d RigidRotationFromCovariance(const Eigen::Matrix2d& covariance);

// Mean Euclidean distance |T(source[n]) - target[n]|.
double MeanAlignmentDistance(const Transform2D& transform,
                             std::span<const Eigen::Vector2d> source,
                             std::span<const Eigen::Vector2d> target);

}  // namespace wlslam

#endif  // WLSLAM_RIGID_ALIGNMENT_H_
