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
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "wlslam/errors.h"

namespace wlslam {
namespace {

std::vector<TimedPose> Square() {
  return {{0., Pose2D(0., 0., 0.)},
          {1., Pose2D(4., 0., kPi / 2.)},
          {2., Pose2D(4., 4., kPi)},
          {3., Pose2D(0., 4., -kPi / 2.)}};
}

TEST(EvaluateTest, IdenticalTrajectoriesHaveNoError) {
  const auto metrics = Evaluate(Square(), Square());
  EXPECT_EQ(metrics.associated_poses, 4);
  EXPECT_NEAR(metrics.position_rmse, 0., 1e-12);
  EXPECT_NEAR(metrics.orientation_rmse, 0., 1e-12);
  EXPECT_EQ(metrics.raw_position_rmse, 0.);
  EXPECT_EQ(metrics.errors.size(), 4u);
}

TEST(EvaluateTest, OffsetIsRemovedByAlignment) {
  std::vector<TimedPose> shifted = Square();
  for (TimedPose& p : shifted) p.pose = Pose2D(p.pose.translation() + Eigen::Vector2d(1., 0.), p.pose.theta());
  const auto metrics = Evaluate(shifted, Square());
  EXPECT_NEAR(metrics.raw_position_rmse, 1., 1e-12);
  EXPECT_NEAR(metrics.position_rmse, 0., 1e-12);
  EXPECT_NEAR(metrics.alignment.dx(), -1., 1e-12);
}

TEST(EvaluateTest, RigidMotionOfTheEstimateIsRemoved) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0., 0.1);
  std::vector<TimedPose> truth;
  for (int k = 0; k < 60; ++k) truth.push_back({k * 1., Pose2D(k * 0.5, std::sin(k * 0.2) * 3., 0.1 * k)});
  std::vector<TimedPose> estimate = truth;
  for (TimedPose& p : estimate) {
    p.pose = Pose2D(p.pose.translation() + Eigen::Vector2d(noise(rng), noise(rng)), p.pose.theta());
  }
  const double reference = Evaluate(estimate, truth).position_rmse;
  const Transform2D motion(7., -3., 1.2);
  for (TimedPose& p : estimate) {
    p.pose = Pose2D(Apply(motion, p.pose.translation()), p.pose.theta() + motion.dtheta());
  }
  EXPECT_NEAR(Evaluate(estimate, truth).position_rmse, reference, 1e-9);
}

TEST(EvaluateTest, OrientationErrorWraps) {
  std::vector<TimedPose> estimate = Square();
  std::vector<TimedPose> truth = Square();
  for (TimedPose& p : estimate) p.pose = Pose2D(p.pose.translation(), 3.1);
  for (TimedPose& p : truth) p.pose = Pose2D(p.pose.translation(), -3.1);
  const auto metrics = Evaluate(estimate, truth);
  EXPECT_NEAR(metrics.orientation_rmse, 2. * kPi - 6.2, 1e-9);
  EXPECT_NEAR(metrics.raw_orientation_rmse, 2. * kPi - 6.2, 1e-9);
}

TEST(EvaluateTest, AssociatesByNearestTime) {
  std::vector<TimedPose> estimate = Square();
  for (TimedPose& p : estimate) p.timestamp += 0.3;
  estimate.push_back({10., Pose2D(100., 100., 0.)});
  const auto metrics = Evaluate(estimate, Square(), 0.5);
  EXPECT_EQ(metrics.associated_poses, 4);
  EXPECT_NEAR(metrics.position_rmse, 0., 1e-12);
}

TEST(EvaluateTest, NeedsTwoAssociations) {
  const std::vector<TimedPose> one = {{0., Pose2D()}};
  EXPECT_THROW(Evaluate(one, Square()), Error);
  std::vector<TimedPose> late = Square();
  for (TimedPose& p : late) p.timestamp += 100.;
  try {
    Evaluate(late, Square());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

}  // namespace
}  // namespace wlslam
