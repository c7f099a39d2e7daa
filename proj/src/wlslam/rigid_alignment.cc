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

#include "wlslam/rigid_alignment.h"

#include <cmath>

#include "Eigen/LU"
#include "Eigen/SVD"
#include "wlslam/errors.h"

namespace wlslam {

Eigen::Matrix2d RigidRotationFromCovariance(const Eigen::Matrix2d& covariance) {
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(
      covariance, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d correction = Eigen::Matrix2d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.) {
    correction(1, 1) = -1.;
  }
  return svd.matrixV() * correction * svd.matrixU().transpose();
}

Transform2D AlignRigid(std::span<const Eigen::Vector2d> source,
                       std::span<const Eigen::Vector2d> target) {
  return AlignRigid(source, target, {});
}

Transform2D AlignRigid(std::span<const Eigen::Vector2d> source,
                       std::span<const Eigen::Vector2d> target,
                       std::span<const double> weights) {
  if (source.size() != target.size() || source.empty() ||
      (!weights.empty() && weights.size() != source.size())) {
    throw Error(ErrorCode::kInvalidInput,
                "rigid alignment needs equally sized, non-empty point sets");
  }
  const auto weight = [&](std::size_t i) {
    return weights.empty() ? 1. : weights[i];
  };
  double total = 0.;
  Eigen::Vector2d source_mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d target_mean = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    total += weight(i);
    source_mean += weight(i) * source[i];
    target_mean += weight(i) * target[i];
  }
  if (!(total > 0.)) {
    throw Error(ErrorCode::kInvalidInput, "alignment weights sum to zero");
  }
  source_mean /= total;
  target_mean /= total;

  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    covariance += weight(i) * (source[i] - source_mean) *
                  (target[i] - target_mean).transpose();
  }
  const Eigen::Matrix2d rotation = RigidRotationFromCovariance(covariance);
  const Transform2D rotation_only(0., 0., std::atan2(rotation(1, 0), rotation(0, 0)));
  return Transform2D(target_mean - rotation_only.rotation() * source_mean,
                     rotation_only.dtheta());
}

double MeanAlignmentDistance(const Transform2D& transform,
                             std::span<const Eigen::Vector2d> source,
                             std::span<const Eigen::Vector2d> target) {
  if (source.empty()) return 0.;
  double sum = 0.;
  for (std::size_t i = 0; i < source.size(); ++i) {
    sum += (Apply(transform, source[i]) - target[i]).norm();
  }
  return sum / static_cast<double>(source.size());
}

}  // namespace wlslam
