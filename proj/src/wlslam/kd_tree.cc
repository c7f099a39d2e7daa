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

#include <algorithm>
#include <numeric>

namespace wlslam {

KdTree2D::KdTree2D(std::span<const Eigen::Vector2d> points)
    : points_(points.begin(), points.end()), indices_(points.size()) {
  std::iota(indices_.begin(), indices_.end(), 0);
  Build(0, static_cast<int>(points_.size()), 0);
}

// The median of [begin, end) sits at the middle slot; the halves on either
// side are the subtrees.
void KdTree2D::Build(int begin, int end, int depth) {
  if (end - begin <= 1) return;
  const int axis = depth % 2;
  const int middle = begin + (end - begin) / 2;
  std::vector<int> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  std::nth_element(order.begin(), order.begin() + (middle - begin), order.end(),
                   [&](int a, int b) {
                     if (points_[a][axis] != points_[b][axis]) {
                       return points_[a][axis] < points_[b][axis];
                     }
                     return indices_[a] < indices_[b];
                   });
  std::vector<Eigen::Vector2d> points(order.size());
  std::vector<int> indices(order.size());
  for (std::size_t n = 0; n < order.size(); ++n) {
    points[n] = points_[order[n]];
    indices[n] = indices_[order[n]];
  }
  std::copy(points.begin(), points.end(), points_.begin() + begin);
  std::copy(indices.begin(), indices.end(), indices_.begin() + begin);
  Build(begin, middle, depth + 1);
  Build(middle + 1, end, depth + 1);
}

void KdTree2D::Search(int begin, int end, int depth,
                      const Eigen::Vector2d& query, double* best_squared,
                      int* best) const {
  if (begin >= end) return;
  const int axis = depth % 2;
  const int middle = begin + (end - begin) / 2;
  const Eigen::Vector2d& point = points_[middle];
  const double squared = (point - query).squaredNorm();
  if (squared < *best_squared ||
      (squared == *best_squared && (*best < 0 || indices_[middle] < *best))) {
    *best_squared = squared;
    *best = indices_[middle];
  }
  const double offset = query[axis] - point[axis];
  const bool left_first = offset < 0.;
  if (left_first) {
    Search(begin, middle, depth + 1, query, best_squared, best);
  } else {
    Search(middle + 1, end, depth + 1, query, best_squared, best);
  }
  if (offset * offset <= *best_squared) {
    if (left_first) {
      Search(middle + 1, end, depth + 1, query, best_squared, best);
    } else {
      Search(begin, middle, depth + 1, query, best_squared, best);
    }
  }
}

int KdTree2D::Nearest(const Eigen::Vector2d& query, double max_squared_distance,
                      double* squared_distance) const {
  double best_squared = max_squared_distance;
  int best = -1;
  Search(0, static_cast<int>(points_.size()), 0, query, &best_squared, &best);
  if (best >= 0 && squared_distance != nullptr) *squared_distance = best_squared;
  return best;
}

void KdTree2D::Collect(int begin, int end, int depth,
                       const Eigen::Vector2d& query, double max_squared,
                       std::vector<int>* out) const {
  if (begin >= end) return;
  const int axis = depth % 2;
  const int middle = begin + (end - begin) / 2;
  const Eigen::Vector2d& point = points_[middle];
  if ((point - query).squaredNorm() <= max_squared) out->push_back(indices_[middle]);
  const double offset = query[axis] - point[axis];
  if (offset <= 0. || offset * offset <= max_squared) {
    Collect(begin, middle, depth + 1, query, max_squared, out);
  }
  if (offset >= 0. || offset * offset <= max_squared) {
    Collect(middle + 1, end, depth + 1, query, max_squared, out);
  }
}

std::vector<int> KdTree2D::Within(const Eigen::Vector2d& query,
                                  double max_squared_distance) const {
  std::vector<int> out;
  Within(query, max_squared_distance, &out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree2D::Within(const Eigen::Vector2d& query, double max_squared_distance,
                      std::vector<int>* out) const {
  out->clear();
  Collect(0, static_cast<int>(points_.size()), 0, query, max_squared_distance, out);
}

}  // namespace wlslam
