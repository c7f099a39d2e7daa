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

#include "wlslam/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "wlslam/errors.h"

namespace wlslam {
namespace {

struct Setting {
  const char* key;
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

[[noreturn]] void BadValue(const std::string& value, const char* expected) {
  throw Error(ErrorCode::kInvalidInput,
              "'" + value + "' is not " + expected);
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
void ParseNumber(const std::string& value, T* out, const char* expected) {
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, *out);
  if (ec != std::errc() || ptr != end) BadValue(value, expected);
}

void Parse(const std::string& v, int* out) { ParseNumber(v, out, "an integer"); }
void Parse(const std::string& v, std::uint64_t* out) {
  ParseNumber(v, out, "an unsigned integer");
}
void Parse(const std::string& v, double* out) {
  ParseNumber(v, out, "a number");
  if (!std::isfinite(*out)) BadValue(v, "a finite number");
}
void Parse(const std::string& v, bool* out) {
  if (v == "true" || v == "1" || v == "on") {
    *out = true;
  } else if (v == "false" || v == "0" || v == "off") {
    *out = false;
  } else {
    BadValue(v, "a boolean");
  }
}
void Parse(const std::string& v, std::filesystem::path* out) { *out = v; }
void Parse(const std::string& v, SimilarityMode* out) {
  if (v == "literal") {
    *out = SimilarityMode::kLiteral;
  } else if (v == "geometric_mean") {
    *out = SimilarityMode::kGeometricMean;
  } else {
    BadValue(v, "'literal' or 'geometric_mean'");
  }
}
// Three values give a diagonal, six the upper triangle row by row.
void Parse(const std::string& v, Eigen::Matrix3d* out) {
  std::istringstream in(v);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    double x;
    Parse(token, &x);
    values.push_back(x);
  }
  if (values.size() == 3) {
    *out = Eigen::Vector3d(values[0], values[1], values[2]).asDiagonal();
  } else if (values.size() == 6) {
    *out << values[0], values[1], values[2], values[1], values[3], values[4],
        values[2], values[4], values[5];
  } else {
    BadValue(v, "3 diagonal or 6 upper-triangle values");
  }
}

std::string Format(int v) { return std::to_string(v); }
std::string Format(std::uint64_t v) { return std::to_string(v); }
std::string Format(double v) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, ptr);
}
std::string Format(bool v) { return v ? "true" : "false"; }
std::string Format(const std::filesystem::path& v) { return v.string(); }
std::string Format(SimilarityMode v) {
  return v == SimilarityMode::kLiteral ? "literal" : "geometric_mean";
}
std::string Format(const Eigen::Matrix3d& m) {
  std::string s;
  for (int r = 0; r < 3; ++r) {
    for (int c = r; c < 3; ++c) s += (s.empty() ? "" : " ") + Format(m(r, c));
  }
  return s;
}

template <typename Access>
Setting Field(const char* key, Access access) {
  return {key,
          [access](Config& c, const std::string& v) {
            auto value = access(c);
            Parse(v, &value);
            access(c) = value;
          },
          [access](const Config& c) {
            return Format(access(const_cast<Config&>(c)));
          }};
}

// Stored in radians, configured in degrees.
template <typename Access>
Setting Degrees(const char* key, Access access) {
  return {key,
          [access](Config& c, const std::string& v) {
            double degrees;
            Parse(v, &degrees);
            access(c) = degrees * kPi / 180.;
          },
          [access](const Config& c) {
            return Format(access(const_cast<Config&>(c)) * 180. / kPi);
          }};
}

const std::vector<Setting>& Settings() {
  static const std::vector<Setting>* settings = new std::vector<Setting>{
      Field("sim.extent_x", [](Config& c) -> auto& { return c.scenario.extent.x(); }),
      Field("sim.extent_y", [](Config& c) -> auto& { return c.scenario.extent.y(); }),
      Field("sim.num_aps", [](Config& c) -> auto& { return c.scenario.num_aps; }),
      Field("sim.lane_offset", [](Config& c) -> auto& { return c.scenario.lane_offset; }),
      Field("sim.laps", [](Config& c) -> auto& { return c.scenario.laps; }),
      Field("sim.speed", [](Config& c) -> auto& { return c.scenario.speed; }),
      Field("sim.dt", [](Config& c) -> auto& { return c.scenario.dt; }),
      Field("sim.sensor_period", [](Config& c) -> auto& { return c.scenario.sensor_period; }),
      Field("noise.odom_trans_noise", [](Config& c) -> auto& { return c.scenario.noise.odom_trans_noise; }),
      Field("noise.odom_rot_noise", [](Config& c) -> auto& { return c.scenario.noise.odom_rot_noise; }),
      Field("noise.odom_drift_bias", [](Config& c) -> auto& { return c.scenario.noise.odom_drift_bias; }),
      Field("noise.rss_noise_sigma", [](Config& c) -> auto& { return c.scenario.noise.rss_noise_sigma; }),
      Field("noise.lidar_range_noise", [](Config& c) -> auto& { return c.scenario.noise.lidar_range_noise; }),
      Field("noise.path_loss_exponent", [](Config& c) -> auto& { return c.scenario.noise.path_loss_exponent; }),
      Field("noise.tx_power_at_1m", [](Config& c) -> auto& { return c.scenario.noise.tx_power_at_1m; }),
      Field("noise.detection_floor", [](Config& c) -> auto& { return c.scenario.noise.detection_floor; }),
      Degrees("lidar.field_of_view_deg", [](Config& c) -> auto& { return c.scenario.lidar.field_of_view; }),
      Degrees("lidar.angle_increment_deg", [](Config& c) -> auto& { return c.scenario.lidar.angle_increment; }),
      Field("lidar.range_max", [](Config& c) -> auto& { return c.scenario.lidar.range_max; }),
      Field("similarity.sigma_squared", [](Config& c) -> auto& { return c.pipeline.similarity.sigma_squared; }),
      Field("similarity.min_similarity", [](Config& c) -> auto& { return c.pipeline.similarity.min_similarity; }),
      Field("similarity.mode", [](Config& c) -> auto& { return c.pipeline.similarity.mode; }),
      Field("sequence.window_w", [](Config& c) -> auto& { return c.pipeline.sequence.window_w; }),
      Field("sequence.k_neighbors", [](Config& c) -> auto& { return c.pipeline.sequence.k_neighbors; }),
      Field("sequence.residual_threshold", [](Config& c) -> auto& { return c.pipeline.sequence.residual_threshold; }),
      Field("sequence.min_loop_distance", [](Config& c) -> auto& { return c.pipeline.sequence.min_loop_distance; }),
      Field("sequence.wide_candidate_window", [](Config& c) -> auto& { return c.pipeline.sequence.wide_candidate_window; }),
      Field("icp.max_iterations", [](Config& c) -> auto& { return c.pipeline.icp.max_iterations; }),
      Field("icp.correspondence_radius", [](Config& c) -> auto& { return c.pipeline.icp.correspondence_radius; }),
      Field("icp.convergence_epsilon", [](Config& c) -> auto& { return c.pipeline.icp.convergence_epsilon; }),
      Field("icp.proximity_trigger", [](Config& c) -> auto& { return c.pipeline.icp.proximity_trigger; }),
      Field("icp.loop_radius", [](Config& c) -> auto& { return c.pipeline.icp.loop_radius; }),
      Field("icp.voxel_size", [](Config& c) -> auto& { return c.pipeline.icp.voxel_size; }),
      Field("icp.robust_scale", [](Config& c) -> auto& { return c.pipeline.icp.robust_scale; }),
      Field("icp.fill_gap", [](Config& c) -> auto& { return c.pipeline.icp.fill_gap; }),
      Field("icp.link_radius", [](Config& c) -> auto& { return c.pipeline.icp.link_radius; }),
      Field("optimizer.max_iterations", [](Config& c) -> auto& { return c.pipeline.optimizer.max_iterations; }),
      Field("optimizer.convergence_delta", [](Config& c) -> auto& { return c.pipeline.optimizer.convergence_delta; }),
      Field("optimizer.initial_lambda", [](Config& c) -> auto& { return c.pipeline.optimizer.initial_lambda; }),
      Field("optimizer.lambda_factor", [](Config& c) -> auto& { return c.pipeline.optimizer.lambda_factor; }),
      Field("information.odometry", [](Config& c) -> auto& { return c.pipeline.information.odometry; }),
      Field("information.wifi_loop", [](Config& c) -> auto& { return c.pipeline.information.wifi_loop; }),
      Field("information.icp", [](Config& c) -> auto& { return c.pipeline.information.icp; }),
      Field("map.resolution", [](Config& c) -> auto& { return c.pipeline.map.resolution; }),
      Field("map.hit_log_odds", [](Config& c) -> auto& { return c.pipeline.map.hit_log_odds; }),
      Field("map.miss_log_odds", [](Config& c) -> auto& { return c.pipeline.map.miss_log_odds; }),
      Field("map.clamp_log_odds", [](Config& c) -> auto& { return c.pipeline.map.clamp_log_odds; }),
      Field("map.occupied_threshold", [](Config& c) -> auto& { return c.pipeline.map.occupied_threshold; }),
      Field("map.free_threshold", [](Config& c) -> auto& { return c.pipeline.map.free_threshold; }),
      Field("pipeline.enable_wifi", [](Config& c) -> auto& { return c.pipeline.enable_wifi; }),
      Field("pipeline.enable_close_scans", [](Config& c) -> auto& { return c.pipeline.enable_close_scans; }),
      Field("pipeline.extra_pose_fraction", [](Config& c) -> auto& { return c.pipeline.icp.extra_pose_fraction; }),
      Field("pipeline.render_map", [](Config& c) -> auto& { return c.pipeline.render_map; }),
      Field("pipeline.seed", [](Config& c) -> auto& { return c.pipeline.seed; }),
      Field("pipeline.burst_window", [](Config& c) -> auto& { return c.pipeline.burst_window; }),
      Field("pipeline.max_timestamp_gap", [](Config& c) -> auto& { return c.pipeline.max_timestamp_gap; }),
      Field("pipeline.scan_tolerance", [](Config& c) -> auto& { return c.pipeline.scan_tolerance; }),
      Field("pipeline.odometry", [](Config& c) -> auto& { return c.pipeline.odometry_path; }),
      Field("pipeline.wifi", [](Config& c) -> auto& { return c.pipeline.wifi_path; }),
      Field("pipeline.scans", [](Config& c) -> auto& { return c.pipeline.scans_path; }),
      Field("pipeline.ground_truth", [](Config& c) -> auto& { return c.pipeline.ground_truth_path; }),
      Field("pipeline.output_dir", [](Config& c) -> auto& { return c.pipeline.output_dir; }),
  };
  return *settings;
}

const Setting& Find(const std::string& key) {
  for (const Setting& s : Settings()) {
    if (key == s.key) return s;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown setting '" + key + "'");
}

}  // namespace

void SetConfigValue(const std::string& key, const std::string& value,
                    Config* config) {
  const Setting& setting = Find(key);
  try {
    setting.set(*config, value);
  } catch (const Error& e) {
    throw Error(e.code(), key + ": " + e.what());
  }
}

void ApplyOverride(const std::string& assignment, Config* config) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw Error(ErrorCode::kInvalidInput,
                "expected key=value, got '" + assignment + "'");
  }
  SetConfigValue(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)),
                 config);
}

void ParseConfig(std::istream& in, const std::string& name, Config* config) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    try {
      ApplyOverride(line, config);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse,
                  name + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void LoadConfig(const std::filesystem::path& path, Config* config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  ParseConfig(in, path.string(), config);
}

std::string GetConfigValue(const Config& config, const std::string& key) {
  return Find(key).get(config);
}

std::vector<std::string> SettingKeys() {
  std::vector<std::string> keys;
  for (const Setting& s : Settings()) keys.emplace_back(s.key);
  return keys;
}

std::string DumpConfig(const Config& config) {
  std::string out;
  for (const Setting& s : Settings()) {
    out += std::string(s.key) + " = " + s.get(config) + "\n";
  }
  return out;
}

}  // namespace wlslam
