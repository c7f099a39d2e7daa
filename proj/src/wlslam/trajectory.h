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

#ifndef WLSLAM_TRAJECTORY_H_
#define WLSLAM_TRAJECTORY_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlslam/geometry.h"

namespace wlslam {

struct TimedPose {
  double timestamp = 0.;
  Pose2D pose;
};

// Pose at `timestamp` by linear interpolation of position and shortest-arc
// interpolation of heading. `trajectory` must be sorted by time. Outside the
// covered interval the nearest end pose is returned.
Pose2D InterpolatePose(std::span<const TimedPose> trajectory, double timestamp);

// Odometric path length travelled up to `timestamp`, interpolated inside the
// segment that contains it.
double PathLengthAt(std::span<const TimedPose> trajectory, double timestamp);

// Index of the sample nearest in time to `timestamp` if it is within
// `tolerance` seconds. `timestamps` must be sorted.
std::optional<std::size_t> NearestTimestamp(std::span<const double> timestamps,
                                            double timestamp, double tolerance);

// Odometry log: `timestamp_s, x, y, theta` per line, '#' comments.
std::vector<TimedPose> ParseOdometryCsv(std::istream& in,
                                        const std::string& name);
std::vector<TimedPose> ReadOdometryCsv(const std::filesystem::path& path);
void WriteOdometryCsv(std::span<const TimedPose> trajectory, std::ostream& out);

// TUM trajectory: `timestamp x y z qx qy qz qw`; planar poses use z = 0 and a
// rotation about the z axis.
std::vector<TimedPose> ParseTum(std::istream& in, const std::string& name);
std::vector<TimedPose> ReadTum(const std::filesystem::path& path);
void WriteTum(std::span<const TimedPose> trajectory, std::ostream& out);
void WriteTum(std::span<const TimedPose> trajectory,
              const std::filesystem::path& path);

}  // namespace wlslam

#endif  // WLSLAM_TRAJECTORY_H_
