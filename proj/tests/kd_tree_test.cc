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


#include "wlslam/kd_tree.h"

#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"

namespace wlslam {
namespace {

TEST(KdTreeTest, AgreesWithLinearScan) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coordinate(-10., 10.);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::Vector2d> points(1 + trial * 37);
    for (Eigen::Vector2d& p : points) p = {coordinate(rng), coordinate(rng)};
    const KdTree2D tree(points);
    ASSERT_EQ(tree.size(), points.size());
    for (int q = 0; q < 200; ++q) {
      const Eigen::Vector2d query(coordinate(rng), coordinate(rng));
      const double max_sq = q % 2 == 0 ? 4. : 1e9;
      double squared = -1.;
      const int found = tree.Nearest(query, max_sq, &squared);
      const int expected = oracle::BruteForceNearest(points, query, max_sq);
      if (expected < 0) {
        EXPECT_EQ(found, -1);
        continue;
      }
      ASSERT_GE(found, 0);
      // Ties may resolve to either point; the distance must be the minimum.
      EXPECT_EQ(squared, (points[expected] - query).squaredNorm());
      EXPECT_EQ(squared, (points[found] - query).squaredNorm());
    }
  }
}

TEST(KdTreeTest, HandlesDuplicatesAndCollinearPoints) {
  std::vector<Eigen::Vector2d> points;
  for (int n = 0; n < 50; ++n) points.push_back({n % 5 * 0.5, 0.});
  const KdTree2D tree(points);
  double squared = 0.;
  const int found = tree.Nearest({1.1, 0.2}, 1., &squared);
  ASSERT_GE(found, 0);
  EXPECT_EQ(points[found], Eigen::Vector2d(1., 0.));
  EXPECT_NEAR(squared, 0.05, 1e-15);
}

TEST(KdTreeTest, EmptyTreeFindsNothing) {
  const KdTree2D tree(std::vector<Eigen::Vector2d>{});
  double squared = 0.;
  EXPECT_EQ(tree.Nearest({0., 0.}, 1e9, &squared), -1);
}

TEST(KdTreeTest, RadiusIsInclusive) {
  const std::vector<Eigen::Vector2d> points = {{1., 0.}};
  const KdTree2D tree(points);
  double squared = 0.;
  EXPECT_EQ(tree.Nearest({0., 0.}, 1., &squared), 0);
  EXPECT_EQ(tree.Nearest({0., 0.}, 0.99, &squared), -1);
}

TEST(KdTreeTest, WithinAgreesWithLinearScan) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> coordinate(-5., 5.);
  std::vector<Eigen::Vector2d> points(400);
  for (Eigen::Vector2d& p : points) p = {coordinate(rng), coordinate(rng)};
  // Duplicates and shared coordinates exercise ties at split planes.
  for (int n = 0; n < 40; ++n) points.push_back({points[n].x(), points[n + 1].y()});
  for (int n = 0; n < 20; ++n) points.push_back(points[n]);
  const KdTree2D tree(points);
  for (int q = 0; q < 200; ++q) {
    const Eigen::Vector2d query =
        q % 4 == 0 ? points[q] : Eigen::Vector2d(coordinate(rng), coordinate(rng));
    const double max_sq = 0.01 * (q % 50);
    std::vector<int> expected;
    for (std::size_t n = 0; n < points.size(); ++n) {
      if ((points[n] - query).squaredNorm() <= max_sq) expected.push_back(static_cast<int>(n));
    }
    EXPECT_EQ(tree.Within(query, max_sq), expected) << q;
  }
  EXPECT_EQ(KdTree2D(std::vector<Eigen::Vector2d>{}).Within({0., 0.}, 1.), std::vector<int>{});
}

}  // namespace
}  // namespace wlslam
