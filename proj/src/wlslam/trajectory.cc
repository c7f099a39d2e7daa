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

#include "wlslam/trajectory.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wlslam/errors.h"

namespace wlslam {
namespace {

// Splits on commas and/or whitespace after stripping '#' comments.
std::vector<std::string> Tokenize(std::string line) {
  const auto hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  std::replace(line.begin(), line.end(), ',', ' ');
  std::vector<std::string> tokens;
  std::stringstream ss(line);
  std::string token;
  while (ss >> token) tokens.push_back(token);
  return tokens;
}

std::vector<double> ParseNumbers(const std::vector<std::string>& tokens,
                                 const std::string& name, int line) {
  std::vector<double> values;
  for (const std::string& token : tokens) {
    std::size_t used = 0;
    double value = 0.;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(value)) {
      throw Error(ErrorCode::kParse, name + ":" + std::to_string(line) +
                                         ": malformed number '" + token + "'");
    }
    values.push_back(value);
  }
  return values;
}

template <typename RowFn>
std::vector<TimedPose> ParseRows(std::istream& in, const std::string& name,
                                 std::size_t columns, RowFn row_fn) {
  std::vector<TimedPose> trajectory;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto tokens = Tokenize(line);
    if (tokens.empty()) continue;
    if (tokens.size() != columns) {
      throw Error(ErrorCode::kParse,
                  name + ":" + std::to_string(line_number) + ": expected " +
                      std::to_string(columns) + " columns");
    }
    const auto values = ParseNumbers(tokens, name, line_number);
    if (!trajectory.empty() && values[0] <= trajectory.back().timestamp) {
      throw Error(ErrorCode::kParse, name + ":" + std::to_string(line_number) +
                                         ": timestamps must increase");
    }
    trajectory.push_back(row_fn(values));
  }
  return trajectory;
}

std::size_t UpperIndex(std::span<const TimedPose> trajectory, double t) {
  return static_cast<std::size_t>(
      std::upper_bound(trajectory.begin(), trajectory.end(), t,
                       [](double value, const TimedPose& p) {
                         return value < p.timestamp;
                       }) -
      trajectory.begin());
}

}  // namespace

Pose2D InterpolatePose(std::span<const TimedPose> trajectory,
                       double timestamp) {
  if (trajectory.empty()) {
    throw Error(ErrorCode::kInvalidInput, "cannot interpolate empty trajectory");
  }
  const std::size_t upper = UpperIndex(trajectory, timestamp);
  if (upper == 0) return trajectory.front().pose;
  if (upper == trajectory.size()) return trajectory.back().pose;
  const TimedPose& a = trajectory[upper - 1];
  const TimedPose& b = trajectory[upper];
  const double alpha = (timestamp - a.timestamp) / (b.timestamp - a.timestamp);
  const double dtheta = NormalizeAngle(b.pose.theta() - a.pose.theta());
  return Pose2D(a.pose.translation() +
                    alpha * (b.pose.translation() - a.pose.translation()),
                a.pose.theta() + alpha * dtheta);
}

double PathLengthAt(std::span<const TimedPose> trajectory, double timestamp) {
  double length = 0.;
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const TimedPose& a = trajectory[i - 1];
    const TimedPose& b = trajectory[i];
    if (b.timestamp <= timestamp) {
      length += (b.pose.translation() - a.pose.translation()).norm();
      continue;
    }
    if (a.timestamp < timestamp) {
      const double alpha =
          (timestamp - a.timestamp) / (b.timestamp - a.timestamp);
      length += alpha * (b.pose.translation() - a.pose.translation()).norm();
    }
    break;
  }
  return length;
}

std::optional<std::size_t> NearestTimestamp(std::span<const double> timestamps,
                                            double timestamp,
                                            double tolerance) {
  if (timestamps.empty()) return std::nullopt;
  const auto it =
      std::lower_bound(timestamps.begin(), timestamps.end(), timestamp);
  std::size_t best = static_cast<std::size_t>(it - timestamps.begin());
  if (best == timestamps.size()) {
    best = timestamps.size() - 1;
  } else if (best > 0 && std::abs(timestamps[best - 1] - timestamp) <=
                             std::abs(timestamps[best] - timestamp)) {
    --best;
  }
  if (std::abs(timestamps[best] - timestamp) > tolerance) return std::nullopt;
  return best;
}

std::vector<TimedPose> ParseOdometryCsv(std::istream& in,
                                        const std::string& name) {
  return ParseRows(in, name, 4, [](const std::vector<double>& v) {
    return TimedPose{v[0], Pose2D(v[1], v[2], v[3])};
  });
}

std::vector<TimedPose> ReadOdometryCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open odometry log " + path.string());
  return ParseOdometryCsv(in, path.string());
}

void WriteOdometryCsv(std::span<const TimedPose> trajectory,
                      std::ostream& out) {
  out << "# timestamp_s, x, y, theta\n";
  char buffer[160];
  for (const TimedPose& p : trajectory) {
    std::snprintf(buffer, sizeof(buffer), "%.3f, %.6f, %.6f, %.9f\n",
                  p.timestamp, p.pose.x(), p.pose.y(), p.pose.theta());
    out << buffer;
  }
}

std::vector<TimedPose> ParseTum(std::istream& in, const std::string& name) {
  return ParseRows(in, name, 8, [](const std::vector<double>& v) {
    // Yaw of a general quaternion; for planar poses qx = qy = 0.
    const double qx = v[4], qy = v[5], qz = v[6], qw = v[7];
    const double yaw = std::atan2(2. * (qw * qz + qx * qy),
                                  1. - 2. * (qy * qy + qz * qz));
    return TimedPose{v[0], Pose2D(v[1], v[2], yaw)};
  });
}

std::vector<TimedPose> ReadTum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open trajectory " + path.string());
  return ParseTum(in, path.string());
}

void WriteTum(std::span<const TimedPose> trajectory, std::ostream& out) {
  char buffer[200];
  for (const TimedPose& p : trajectory) {
    const double half = 0.5 * p.pose.theta();
    std::snprintf(buffer, sizeof(buffer),
                  "%.6f %.6f %.6f 0 0 0 %.9f %.9f\n", p.timestamp, p.pose.x(),
                  p.pose.y(), std::sin(half), std::cos(half));
    out << buffer;
  }
}

void WriteTum(std::span<const TimedPose> trajectory,
              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  WriteTum(trajectory, out);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace wlslam
