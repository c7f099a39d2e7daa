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

#include "wlslam/geometry.h"

#include <cmath>

#include "wlslam/errors.h"

namespace wlslam {
namespace {

Eigen::Matrix2d RotationMatrix(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

}  // namespace

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kNoEstimate: return "no-estimate";
    case ErrorCode::kInsufficientCorrespondences:
      return "insufficient-correspondences";
    case ErrorCode::kNoMatch: return "no-match";
    case ErrorCode::kDuplicateEdge: return "duplicate-edge";
    case ErrorCode::kNotPositiveDefinite: return "not-positive-definite";
    case ErrorCode::kDisconnectedGraph: return "disconnected-graph";
    case ErrorCode::kNumericalFailure: return "numerical-failure";
    case ErrorCode::kInsufficientConstraints:
      return "insufficient-constraints";
    case ErrorCode::kTimestampMisalignment: return "timestamp-misalignment";
  }
  return "unknown";
}

double NormalizeAngle(double angle) {
  double wrapped = std::remainder(angle, 2. * kPi);
  // remainder() yields [-pi, pi]; fold the lower boundary onto +pi.
  if (wrapped <= -kPi) wrapped += 2. * kPi;
  return wrapped;
}

Transform2D::Transform2D(double dx, double dy, double dtheta)
    : dx_(dx), dy_(dy), dtheta_(NormalizeAngle(dtheta)) {}

Eigen::Matrix2d Transform2D::rotation() const { return RotationMatrix(dtheta_); }

Transform2D Transform2D::inverse() const {
  const Eigen::Vector2d t = -(rotation().transpose() * translation());
  return Transform2D(t, -dtheta_);
}

Pose2D::Pose2D(double x, double y, double theta)
    : x_(x), y_(y), theta_(NormalizeAngle(theta)) {}

Eigen::Matrix2d Pose2D::rotation() const { return RotationMatrix(theta_); }

Pose2D Compose(const Pose2D& a, const Transform2D& b) {
  return Pose2D(a.translation() + a.rotation() * b.translation(),
                a.theta() + b.dtheta());
}

Transform2D Compose(const Transform2D& a, const Transform2D& b) {
  return Transform2D(a.translation() + a.rotation() * b.translation(),
                     a.dtheta() + b.dtheta());
}

Transform2D Relative(const Pose2D& a, const Pose2D& b) {
  return Transform2D(a.rotation().transpose() *
                         (b.translation() - a.translation()),
                     b.theta() - a.theta());
}

Eigen::Vector2d Apply(const Transform2D& t, const Eigen::Vector2d& p) {
  return t.rotation() * p + t.translation();
}

std::ostream& operator<<(std::ostream& os, const Pose2D& pose) {
  return os << "(" << pose.x() << ", " << pose.y() << ", " << pose.theta()
            << ")";
}

std::ostream& operator<<(std::ostream& os, const Transform2D& transform) {
  return os << "[" << transform.dx() << ", " << transform.dy() << ", "
            << transform.dtheta() << "]";
}

}  // namespace wlslam
