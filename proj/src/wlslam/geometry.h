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

#ifndef WLSLAM_GEOMETRY_H_
#define WLSLAM_GEOMETRY_H_

#include <numbers>
#include <ostream>

#include "Eigen/Core"

namespace wlslam {

constexpr double kPi = std::numbers::pi;

// Wraps an angle into (-pi, pi].
double NormalizeAngle(double angle);

// Rigid motion in the plane. The angle is kept normalized.
class Transform2D {
 public:
  Transform2D() = default;
  Transform2D(double dx, double dy, double dtheta);
  Transform2D(const Eigen::Vector2d& translation, double dtheta)
      : Transform2D(translation.x(), translation.y(), dtheta) {}

  static Transform2D Identity() { return Transform2D(); }

  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double dtheta() const { return dtheta_; }
  Eigen::Vector2d translation() const { return {dx_, dy_}; }
  Eigen::Matrix2d rotation() const;

  Transform2D inverse() const;

 private:
  double dx_ = 0.;
  double dy_ = 0.;
  double dtheta_ = 0.;
};

// Robot pose in the world frame: x east, y north, theta counterclockwise
// from the x axis.
class Pose2D {
 public:
  Pose2D() = default;
  Pose2D(double x, double y, double theta);
  Pose2D(const Eigen::Vector2d& translation, double theta)
      : Pose2D(translation.x(), translation.y(), theta) {}

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }
  Eigen::Vector2d translation() const { return {x_, y_}; }
  Eigen::Matrix2d rotation() const;

  // The same motion read as a transform from the world origin.
  Transform2D AsTransform() const { return Transform2D(x_, y_, theta_); }

 private:
  double x_ = 0.;
  double y_ = 0.;
  double theta_ = 0.;
};

// a ⊕ b, with b expressed in the frame of a.
Pose2D Compose(const Pose2D& a, const Transform2D& b);
Transform2D Compose(const Transform2D& a, const Transform2D& b);

// a⁻¹ b: the pose of b seen from a, so that Compose(a, Relative(a, b)) == b.
Transform2D Relative(const Pose2D& a, const Pose2D& b);

// Rotates p by t.dtheta, then translates by (t.dx, t.dy).
Eigen::Vector2d Apply(const Transform2D& t, const Eigen::Vector2d& p);

std::ostream& operator<<(std::ostream& os, const Pose2D& pose);
std::ostream& operator<<(std::ostream& os, const Transform2D& transform);

}  // namespace wlslam

#endif  // WLSLAM_GEOMETRY_H_
