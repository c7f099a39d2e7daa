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

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "wlslam/config.h"
#include "wlslam/errors.h"
#include "wlslam/evaluation.h"
#include "wlslam/pipeline.h"
#include "wlslam/sim.h"
#include "wlslam/wlslam.h"

struct wlslam_config {
  wlslam::Config config;
};

struct wlslam_result {
  wlslam::SlamResult result;
  std::string metrics_json;
};

namespace {

thread_local std::string last_error;

wlslam_status StatusFor(wlslam::ErrorCode code) {
  using wlslam::ErrorCode;
  switch (code) {
    case ErrorCode::kNumericalFailure:
    case ErrorCode::kNotPositiveDefinite:
      return WLSLAM_NUMERICAL_FAILURE;
    case ErrorCode::kInsufficientConstraints:
    case ErrorCode::kInsufficientCorrespondences:
    case ErrorCode::kNoEstimate:
    case ErrorCode::kNoMatch:
      return WLSLAM_INSUFFICIENT_CONSTRAINTS;
    default:
      return WLSLAM_INPUT_ERROR;
  }
}

template <typename Body>
wlslam_status Guard(Body&& body) {
  try {
    body();
    last_error.clear();
    return WLSLAM_OK;
  } catch (const wlslam::Error& e) {
    last_error = std::string(wlslam::ErrorCodeName(e.code())) + ": " + e.what();
    return StatusFor(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return WLSLAM_ERROR;
}

void Require(const void* pointer, const char* what) {
  if (pointer == nullptr) {
    throw wlslam::Error(wlslam::ErrorCode::kInvalidInput,
                        std::string(what) + " must not be NULL");
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const wlslam::TrajectoryMetrics& MetricsFor(const wlslam_result* r,
                                           const std::string& trajectory) {
  const std::optional<wlslam::TrajectoryMetrics>* m = nullptr;
  if (trajectory == "odometry") m = &r->result.odometry_metrics;
  if (trajectory == "wifi") m = &r->result.first_pass_metrics;
  if (trajectory == "final") m = &r->result.final_metrics;
  if (m == nullptr) {
    throw wlslam::Error(wlslam::ErrorCode::kInvalidInput,
                        "unknown trajectory '" + trajectory + "'");
  }
  if (!m->has_value()) {
    throw wlslam::Error(wlslam::ErrorCode::kInvalidInput,
                        "no ground truth was available for evaluation");
  }
  return **m;
}

}  // namespace

extern "C" {

const char* wlslam_version(void) { return "0.1.0"; }

const char* wlslam_last_error(void) { return last_error.c_str(); }

void wlslam_string_free(char* s) { std::free(s); }

wlslam_status wlslam_config_create(wlslam_config** out) {
  return Guard([&] {
    Require(out, "out");
    *out = new wlslam_config();
  });
}

void wlslam_config_destroy(wlslam_config* config) { delete config; }

wlslam_status wlslam_config_load(wlslam_config* config, const char* path) {
  return Guard([&] {
    Require(config, "config");
    Require(path, "path");
    wlslam::LoadConfig(path, &config->config);
  });
}

wlslam_status wlslam_config_set(wlslam_config* config, const char* key,
                                const char* value) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    Require(value, "value");
    wlslam::SetConfigValue(key, value, &config->config);
  });
}

wlslam_status wlslam_config_apply(wlslam_config* config,
                                  const char* assignment) {
  return Guard([&] {
    Require(config, "config");
    Require(assignment, "assignment");
    wlslam::ApplyOverride(assignment, &config->config);
  });
}

wlslam_status wlslam_config_get(const wlslam_config* config, const char* key,
                                char** value) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    Require(value, "value");
    *value = CopyString(wlslam::GetConfigValue(config->config, key));
  });
}

wlslam_status wlslam_config_dump(const wlslam_config* config, char** text) {
  return Guard([&] {
    Require(config, "config");
    Require(text, "text");
    *text = CopyString(wlslam::DumpConfig(config->config));
  });
}

wlslam_status wlslam_config_set_data_dir(wlslam_config* config,
                                         const char* directory) {
  return Guard([&] {
    Require(config, "config");
    Require(directory, "directory");
    wlslam::SetDataDirectory(directory, &config->config.pipeline);
  });
}

wlslam_status wlslam_simulate(const wlslam_config* config, uint64_t seed,
                              const char* directory) {
  return Guard([&] {
    Require(config, "config");
    Require(directory, "directory");
    wlslam::WriteScenario(
        wlslam::GenerateScenario(config->config.scenario, seed), directory);
  });
}

wlslam_status wlslam_slam(const wlslam_config* config, const char* output_dir,
                          wlslam_result** out) {
  return Guard([&] {
    Require(config, "config");
    wlslam::PipelineConfig pipeline = config->config.pipeline;
    if (output_dir != nullptr) pipeline.output_dir = output_dir;
    auto result = std::make_unique<wlslam_result>();
    result->result = wlslam::RunSlamFromConfig(pipeline);
    result->metrics_json = wlslam::MetricsJson(result->result);
    if (out != nullptr) *out = result.release();
  });
}

size_t wlslam_result_num_poses(const wlslam_result* result) {
  return result == nullptr ? 0 : result->result.final_trajectory.size();
}

wlslam_status wlslam_result_pose(const wlslam_result* result, size_t index,
                                 double* timestamp, double* x, double* y,
                                 double* theta) {
  return Guard([&] {
    Require(result, "result");
    const auto& poses = result->result.final_trajectory;
    if (index >= poses.size()) {
      throw wlslam::Error(wlslam::ErrorCode::kInvalidInput,
                          "pose index out of range");
    }
    const wlslam::TimedPose& p = poses[index];
    if (timestamp != nullptr) *timestamp = p.timestamp;
    if (x != nullptr) *x = p.pose.x();
    if (y != nullptr) *y = p.pose.y();
    if (theta != nullptr) *theta = p.pose.theta();
  });
}

wlslam_status wlslam_result_metric(const wlslam_result* result,
                                   const char* name, double* value) {
  return Guard([&] {
    Require(result, "result");
    Require(name, "name");
    Require(value, "value");
    const std::string key = name;
    const wlslam::SlamResult& r = result->result;
    if (key == "nodes") {
      *value = static_cast<double>(r.final_trajectory.size());
      return;
    }
    if (key == "closures.wifi") {
      *value = static_cast<double>(r.wifi_closures.size());
      return;
    }
    if (key == "closures.icp_proximity") {
      *value = static_cast<double>(r.proximity_closures.size());
      return;
    }
    if (key == "closures.icp_loop") {
      *value = static_cast<double>(r.loop_closures.size());
      return;
    }
    const auto dot = key.find('.');
    if (dot != std::string::npos) {
      const wlslam::TrajectoryMetrics& m = MetricsFor(result, key.substr(0, dot));
      const std::string field = key.substr(dot + 1);
      if (field == "position_rmse") {
        *value = m.position_rmse;
        return;
      }
      if (field == "orientation_rmse") {
        *value = m.orientation_rmse;
        return;
      }
      if (field == "raw_position_rmse") {
        *value = m.raw_position_rmse;
        return;
      }
    }
    throw wlslam::Error(wlslam::ErrorCode::kInvalidInput,
                        "unknown metric '" + key + "'");
  });
}

const char* wlslam_result_metrics_json(const wlslam_result* result) {
  return result == nullptr ? "" : result->metrics_json.c_str();
}

void wlslam_result_destroy(wlslam_result* result) { delete result; }

wlslam_status wlslam_eval(const char* trajectory_path,
                          const char* ground_truth_path,
                          const char* output_dir, double* position_rmse,
                          double* orientation_rmse) {
  return Guard([&] {
    Require(trajectory_path, "trajectory_path");
    Require(ground_truth_path, "ground_truth_path");
    const wlslam::TrajectoryMetrics metrics = wlslam::Evaluate(
        wlslam::ReadTum(trajectory_path), wlslam::ReadTum(ground_truth_path));
    if (position_rmse != nullptr) *position_rmse = metrics.position_rmse;
    if (orientation_rmse != nullptr) *orientation_rmse = metrics.orientation_rmse;
    if (output_dir == nullptr) return;
    const std::filesystem::path dir = output_dir;
    std::filesystem::create_directories(dir);
    const auto write = [&](const char* name, const std::string& text) {
      std::ofstream out(dir / name, std::ios::binary);
      out << text;
      if (!out) {
        throw wlslam::Error(wlslam::ErrorCode::kIo,
                            "cannot write " + (dir / name).string());
      }
    };
    write("eval.json", wlslam::EvaluationJson(metrics));
    write("errors.csv", wlslam::ErrorsCsv(&metrics));
  });
}

wlslam_status wlslam_map(const wlslam_config* config,
                         const char* trajectory_path, const char* scans_path,
                         const char* pgm_path) {
  return Guard([&] {
    Require(config, "config");
    Require(trajectory_path, "trajectory_path");
    Require(scans_path, "scans_path");
    Require(pgm_path, "pgm_path");
    const wlslam::PipelineConfig& pipeline = config->config.pipeline;
    const wlslam::OccupancyGrid grid = wlslam::RenderFromLogs(
        wlslam::ReadTum(trajectory_path), wlslam::ReadScanLog(scans_path),
        pipeline);
    const std::filesystem::path path = pgm_path;
    if (path.has_parent_path()) {
      std::filesystem::create_directories(path.parent_path());
    }
    wlslam::ExportPgm(grid, path, pipeline.map);
  });
}

wlslam_status wlslam_profile(const wlslam_config* config, uint64_t seed,
                             char** json) {
  return Guard([&] {
    Require(config, "config");
    Require(json, "json");
    const wlslam::PipelineConfig& pipeline = config->config.pipeline;
    wlslam::SlamInputs inputs;
    if (!pipeline.odometry_path.empty()) {
      inputs = wlslam::LoadInputs(pipeline);
    } else {
      wlslam::Scenario scenario =
          wlslam::GenerateScenario(config->config.scenario, seed);
      inputs.odometry = std::move(scenario.odometry);
      inputs.fingerprints = std::move(scenario.fingerprints);
      inputs.scans = std::move(scenario.scans);
      inputs.ground_truth = std::move(scenario.ground_truth);
    }
    *json = CopyString(wlslam::ProfileJson(wlslam::Profile(inputs, pipeline)));
  });
}

}  // extern "C"
