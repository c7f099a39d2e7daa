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

#ifndef WLSLAM_KD_TREE_H_
#define WLSLAM_KD_TREE_H_

#include <span>
#include <vector>

#include "Eigen/Core"

namespace wlslam {

// Static 2D k-d tree for nearest-neighbour queries.
class KdTree2D {
 public:
  explicit KdTree2D(std::span<const Eigen::Vector2d> points);

  // Index (into the constructor's span) of the nearest point whose squared
  // distance to `query` is at most `max_squared_distance`, or -1.
  int Nearest(const Eigen::Vector2d& query, double max_squared_distance,
              double* squared_distance) const;

  // Indices of all points within `max_squared_distance` of `query`
  // (inclusive), in ascending order.
  std::vector<int> Within(const Eigen::Vector2d& query,
                          double max_squared_distance) const;

  // As above into a reused buffer, in traversal order.
  void Within(const Eigen::Vector2d& query, double max_squared_distance,
              std::vector<int>* out) const;

  std::size_t size() const { return points_.size(); }

 private:
  void Build(int begin, int end, int depth);
  void Search(int begin, int end, int depth, const Eigen::Vector2d& query,
              double* best_squared, int* best) const;
  void Collect(int begin, int end, int depth, const Eigen::Vector2d& query,
               double max_squared, std::vector<int>* out) const;

  std::vector<Eigen::Vector2d> points_;
  std::vector<int> indices_;
};

}  // namespace wlslam

#endif  // WLSLAM_KD_TREE_H_
