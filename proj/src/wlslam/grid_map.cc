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

#include "wlslam/grid_map.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "wlslam/errors.h"

namespace wlslam {
namespace {

constexpr std::uint8_t kOccupiedPixel = 0;
constexpr std::uint8_t kFreePixel = 254;
constexpr std::uint8_t kUnknownPixel = 205;

std::uint8_t PixelFor(CellClass c) {
  switch (c) {
    case CellClass::kOccupied: return kOccupiedPixel;
    case CellClass::kFree: return kFreePixel;
    case CellClass::kUnknown: return kUnknownPixel;
  }
  return kUnknownPixel;
}

}  // namespace

OccupancyGrid::OccupancyGrid(double resolution, const Eigen::Vector2d& origin,
                             int width, int height)
    : resolution_(resolution),
      origin_(origin),
      width_(width),
      height_(height),
      cells_(static_cast<std::size_t>(width) * height, 0.f) {
  if (!(resolution > 0.) || width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidInput, "invalid grid geometry");
  }
}

Eigen::Vector2i OccupancyGrid::CellOf(const Eigen::Vector2d& point) const {
  return {static_cast<int>(std::floor((point.x() - origin_.x()) / resolution_)),
          static_cast<int>(std::floor((point.y() - origin_.y()) / resolution_))};
}

double OccupancyGrid::Probability(const Eigen::Vector2i& cell) const {
  return 1. / (1. + std::exp(-LogOdds(cell)));
}

CellClass OccupancyGrid::Classify(const Eigen::Vector2i& cell,
                                  const GridMapParams& params) const {
  const double p = Probability(cell);
  if (p > params.occupied_threshold) return CellClass::kOccupied;
  if (p < params.free_threshold) return CellClass::kFree;
  return CellClass::kUnknown;
}

void OccupancyGrid::Update(const Eigen::Vector2i& cell, double delta,
                           double clamp) {
  float& value = cells_[Index(cell)];
  value = static_cast<float>(std::clamp(value + delta, -clamp, clamp));
}

std::vector<Eigen::Vector2i> TraceLine(const Eigen::Vector2i& from,
                                       const Eigen::Vector2i& to) {
  std::vector<Eigen::Vector2i> cells;
  const int dx = std::abs(to.x() - from.x());
  const int dy = -std::abs(to.y() - from.y());
  const int sx = from.x() < to.x() ? 1 : -1;
  const int sy = from.y() < to.y() ? 1 : -1;
  int error = dx + dy;
  Eigen::Vector2i cell = from;
  cells.reserve(std::max(dx, -dy) + 1);
  while (true) {
    cells.push_back(cell);
    if (cell == to) break;
    const int doubled = 2 * error;
    if (doubled >= dy) {
      error += dy;
      cell.x() += sx;
    }
    if (doubled <= dx) {
      error += dx;
      cell.y() += sy;
    }
  }
  return cells;
}

OccupancyGrid Render(std::span<const Pose2D> trajectory,
                     std::span<const LaserScan> scans,
                     const GridMapParams& params) {
  if (trajectory.empty()) {
    throw Error(ErrorCode::kInvalidInput, "cannot render an empty trajectory");
  }
  if (!scans.empty() && scans.size() != trajectory.size()) {
    throw Error(ErrorCode::kInvalidInput, "one scan per pose is required");
  }
  double margin = 0.;
  for (const LaserScan& scan : scans) margin = std::max(margin, scan.max_range);
  Eigen::Vector2d low = trajectory.front().translation();
  Eigen::Vector2d high = low;
  for (const Pose2D& pose : trajectory) {
    low = low.cwiseMin(pose.translation());
    high = high.cwiseMax(pose.translation());
  }
  const double r = params.resolution;
  // Snap the origin to the resolution lattice so that shifting all poses by
  // whole cells shifts the map by whole cells.
  const Eigen::Vector2d origin((std::floor((low.x() - margin) / r) - 1.) * r,
                               (std::floor((low.y() - margin) / r) - 1.) * r);
  const int width = static_cast<int>(std::ceil((high.x() + margin - origin.x()) / r)) + 2;
  const int height = static_cast<int>(std::ceil((high.y() + margin - origin.y()) / r)) + 2;
  OccupancyGrid grid(r, origin, width, height);
  if (scans.empty()) return grid;

  // Per-scan stamps: a cell is touched once per scan, hits first.
  std::vector<std::uint32_t> stamp(static_cast<std::size_t>(width) * height, 0);
  std::uint32_t next_stamp = 0;
  for (std::size_t n = 0; n < scans.size(); ++n) {
    const Pose2D& pose = trajectory[n];
    const LaserScan& scan = scans[n];
    const std::uint32_t hit_stamp = ++next_stamp;
    const std::uint32_t miss_stamp = ++next_stamp;
    const Eigen::Vector2i sensor = grid.CellOf(pose.translation());
    const Eigen::Matrix2d rotation = pose.rotation();

    std::vector<Eigen::Vector2i> ends;
    ends.reserve(scan.points.size());
    for (const Eigen::Vector2d& p : scan.points) {
      const Eigen::Vector2i end =
          grid.CellOf(rotation * p + pose.translation());
      ends.push_back(end);
      if (!grid.Contains(end)) continue;
      std::uint32_t& s = stamp[grid.Index(end)];
      if (s != hit_stamp) {
        s = hit_stamp;
        grid.Update(end, params.hit_log_odds, params.clamp_log_odds);
      }
    }
    const auto miss = [&](const Eigen::Vector2i& cell) {
      if (!grid.Contains(cell)) return;
      std::uint32_t& s = stamp[grid.Index(cell)];
      if (s == hit_stamp || s == miss_stamp) return;
      s = miss_stamp;
      grid.Update(cell, params.miss_log_odds, params.clamp_log_odds);
    };
    for (const Eigen::Vector2i& end : ends) {
      const auto cells = TraceLine(sensor, end);
      for (std::size_t c = 1; c + 1 < cells.size(); ++c) miss(cells[c]);
    }
    for (double bearing : scan.no_return_bearings) {
      const double angle = pose.theta() + bearing;
      const Eigen::Vector2d far =
          pose.translation() +
          scan.max_range * Eigen::Vector2d(std::cos(angle), std::sin(angle));
      const auto cells = TraceLine(sensor, grid.CellOf(far));
      for (std::size_t c = 1; c < cells.size(); ++c) miss(cells[c]);
    }
  }
  return grid;
}

ClassMap Classify(const OccupancyGrid& grid, const GridMapParams& params) {
  ClassMap map{grid.width(), grid.height(), {}};
  map.cells.reserve(static_cast<std::size_t>(grid.width()) * grid.height());
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      map.cells.push_back(grid.Classify({x, y}, params));
    }
  }
  return map;
}

void ExportPgm(const OccupancyGrid& grid, const std::filesystem::path& path,
               const GridMapParams& params) {
  const ClassMap classes = Classify(grid, params);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << "P5\n" << grid.width() << " " << grid.height() << "\n255\n";
    std::vector<char> row(grid.width());
    for (int y = grid.height() - 1; y >= 0; --y) {
      for (int x = 0; x < grid.width(); ++x) {
        row[x] = static_cast<char>(
            PixelFor(classes.cells[static_cast<std::size_t>(y) * grid.width() + x]));
      }
      out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
  }
  std::filesystem::path yaml_path = path;
  yaml_path.replace_extension(".yaml");
  std::ofstream yaml(yaml_path);
  if (!yaml) throw Error(ErrorCode::kIo, "cannot write " + yaml_path.string());
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer),
                "image: %s\nresolution: %.6f\norigin: [%.6f, %.6f, 0.0]\n"
                "negate: 0\noccupied_thresh: %.2f\nfree_thresh: %.2f\n",
                path.filename().string().c_str(), grid.resolution(),
                grid.origin().x(), grid.origin().y(),
                params.occupied_threshold, params.free_threshold);
  yaml << buffer;
  if (!yaml) throw Error(ErrorCode::kIo, "failed writing " + yaml_path.string());
}

ClassMap ImportPgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P5" || width <= 0 || height <= 0 || maxval != 255) {
    throw Error(ErrorCode::kParse, path.string() + ": not an 8-bit P5 image");
  }
  in.get();  // single whitespace before the payload
  ClassMap map{width, height,
               std::vector<CellClass>(static_cast<std::size_t>(width) * height)};
  std::vector<char> row(width);
  for (int y = height - 1; y >= 0; --y) {
    if (!in.read(row.data(), width)) {
      throw Error(ErrorCode::kParse, path.string() + ": truncated payload");
    }
    for (int x = 0; x < width; ++x) {
      const auto pixel = static_cast<std::uint8_t>(row[x]);
      map.cells[static_cast<std::size_t>(y) * width + x] =
          pixel == kOccupiedPixel ? CellClass::kOccupied
          : pixel == kFreePixel   ? CellClass::kFree
                                  : CellClass::kUnknown;
    }
  }
  return map;
}

}  // namespace wlslam
