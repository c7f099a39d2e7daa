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

#ifndef WLSLAM_GRID_MAP_H_
#define WLSLAM_GRID_MAP_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "Eigen/Core"
#include "wlslam/geometry.h"
#include "wlslam/scan_match.h"

namespace wlslam {

struct GridMapParams {
  double resolution = 0.05;
  double hit_log_odds = 0.85;
  double miss_log_odds = -0.4;
  double clamp_log_odds = 10.;
  double occupied_threshold = 0.65;
  double free_threshold = 0.35;
};

enum class CellClass : std::uint8_t { kUnknown, kFree, kOccupied };

// Axis-aligned log-odds grid; cell (0, 0) has its lower-left corner at
// `origin`, x grows with the column index and y with the row index.
class OccupancyGrid {
 public:
  OccupancyGrid(double resolution, const Eigen::Vector2d& origin, int width,
                int height);

  double resolution() const { return resolution_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const float> cells() const { return cells_; }

  bool Contains(const Eigen::Vector2i& cell) const {
    return cell.x() >= 0 && cell.y() >= 0 && cell.x() < width_ &&
           cell.y() < height_;
  }
  Eigen::Vector2i CellOf(const Eigen::Vector2d& point) const;
  double LogOdds(const Eigen::Vector2i& cell) const {
    return cells_[Index(cell)];
  }
  double Probability(const Eigen::Vector2i& cell) const;
  CellClass Classify(const Eigen::Vector2i& cell,
                     const GridMapParams& params) const;

  // Adds `delta`, clamped to [-clamp, clamp].
  void Update(const Eigen::Vector2i& cell, double delta, double clamp);

  std::size_t Index(const Eigen::Vector2i& cell) const {
    return static_cast<std::size_t>(cell.y()) * width_ + cell.x();
  }

 private:
  double resolution_;
  Eigen::Vector2d origin_;
  int width_;
  int height_;
  std::vector<float> cells_;
};

// Cells visited by the integer line from `from` to `to`, both included.
std::vector<Eigen::Vector2i> TraceLine(const Eigen::Vector2i& from,
                                       const Eigen::Vector2i& to);

// Inserts every scan at its pose. Along each beam the cells after the sensor
// cell and before the end cell get a miss; the end cell of a return gets a
// hit, the end cell of a no-return beam (traced to max_range) a miss. Within
// one scan each cell is updated at most once and hits win over misses. The
// grid spans the trajectory bounding box plus the largest max_range.
// Throws kInvalidInput for an empty trajectory or mismatched sizes.
OccupancyGrid Render(std::span<const Pose2D> trajectory,
                     std::span<const LaserScan> scans,
                     const GridMapParams& params = {});

// Binary PGM (P5, maxval 255): occupied 0, free 254, unknown 205; rows are
// written from the top (largest y). A YAML sidecar with the same stem holds
// resolution and origin.
void ExportPgm(const OccupancyGrid& grid, const std::filesystem::path& path,
               const GridMapParams& params = {});

struct ClassMap {
  int width = 0;
  int height = 0;
  // Row-major with row 0 at the bottom, like OccupancyGrid.
  std::vector<CellClass> cells;
};

ClassMap Classify(const OccupancyGrid& grid, const GridMapParams& params = {});
ClassMap ImportPgm(const std::filesystem::path& path);

}  // namespace wlslam

#endif  // WLSLAM_GRID_MAP_H_
