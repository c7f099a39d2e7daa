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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wlslam/wlslam.h"

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

void AddCommonOptions(CLI::App* command, CommonOptions* options) {
  command->add_option("-c,--config", options->config_path,
                      "key = value settings file")
      ->check(CLI::ExistingFile);
  command->add_option("-s,--set", options->overrides,
                      "override one setting, key=value (repeatable)");
}

int Fail(wlslam_status status) {
  std::fprintf(stderr, "wlslam: %s\n", wlslam_last_error());
  return static_cast<int>(status);
}

class ConfigHandle {
 public:
  ConfigHandle() { wlslam_config_create(&config_); }
  ~ConfigHandle() { wlslam_config_destroy(config_); }
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;

  wlslam_config* get() { return config_; }

  wlslam_status Configure(const CommonOptions& options) {
    if (config_ == nullptr) return WLSLAM_ERROR;
    if (!options.config_path.empty()) {
      const wlslam_status s =
          wlslam_config_load(config_, options.config_path.c_str());
      if (s != WLSLAM_OK) return s;
    }
    for (const std::string& assignment : options.overrides) {
      const wlslam_status s = wlslam_config_apply(config_, assignment.c_str());
      if (s != WLSLAM_OK) return s;
    }
    return WLSLAM_OK;
  }

 private:
  wlslam_config* config_ = nullptr;
};

void PrintMetric(const wlslam_result* result, const char* label,
                 const char* name) {
  double value = 0.;
  if (wlslam_result_metric(result, name, &value) == WLSLAM_OK) {
    std::printf("  %-28s %.4f\n", label, value);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch WiFi + LiDAR pose-graph SLAM"};
  app.set_version_flag("--version", wlslam_version());
  app.require_subcommand(1);

  CommonOptions simulate_options;
  std::uint64_t simulate_seed = 0;
  std::string simulate_out;
  CLI::App* simulate =
      app.add_subcommand("simulate", "generate a synthetic carpark scenario");
  AddCommonOptions(simulate, &simulate_options);
  simulate->add_option("--seed", simulate_seed, "scenario seed")->required();
  simulate->add_option("-o,--out", simulate_out, "output directory")->required();

  CommonOptions slam_options;
  std::string slam_data, slam_out;
  CLI::App* slam = app.add_subcommand("slam", "run the SLAM pipeline");
  AddCommonOptions(slam, &slam_options);
  slam->add_option("-d,--data", slam_data,
                   "directory with odometry.csv, wifi.csv, scans.jsonl and "
                   "optionally ground_truth.tum")
      ->check(CLI::ExistingDirectory);
  slam->add_option("-o,--out", slam_out, "output directory");

  std::string eval_trajectory, eval_truth, eval_out;
  CLI::App* eval =
      app.add_subcommand("eval", "compare a trajectory with ground truth");
  eval->add_option("-t,--trajectory", eval_trajectory, "TUM trajectory")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("-g,--ground-truth", eval_truth, "TUM ground truth")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("-o,--out", eval_out,
                   "directory for eval.json and errors.csv");

  CommonOptions map_options;
  std::string map_trajectory, map_scans, map_out;
  CLI::App* map = app.add_subcommand("map", "render an occupancy grid");
  AddCommonOptions(map, &map_options);
  map->add_option("-t,--trajectory", map_trajectory, "TUM trajectory")
      ->required()
      ->check(CLI::ExistingFile);
  map->add_option("--scans", map_scans, "scans.jsonl")
      ->required()
      ->check(CLI::ExistingFile);
  map->add_option("-o,--out", map_out, "PGM path (YAML written alongside)")
      ->required();

  CommonOptions profile_options;
  std::string profile_data;
  std::uint64_t profile_seed = 1;
  CLI::App* profile =
      app.add_subcommand("profile", "time each stage and the inner kernels");
  AddCommonOptions(profile, &profile_options);
  profile->add_option("-d,--data", profile_data,
                      "logs to profile on (default: simulate)")
      ->check(CLI::ExistingDirectory);
  profile->add_option("--seed", profile_seed, "seed of the simulated scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(WLSLAM_INPUT_ERROR);
  }

  ConfigHandle config;
  wlslam_status status = WLSLAM_OK;
  if (simulate->parsed()) {
    if ((status = config.Configure(simulate_options)) != WLSLAM_OK) {
      return Fail(status);
    }
    status = wlslam_simulate(config.get(), simulate_seed, simulate_out.c_str());
    if (status != WLSLAM_OK) return Fail(status);
    std::printf("scenario written to %s\n", simulate_out.c_str());
    return 0;
  }

  if (slam->parsed()) {
    if ((status = config.Configure(slam_options)) != WLSLAM_OK) {
      return Fail(status);
    }
    if (!slam_data.empty() &&
        (status = wlslam_config_set_data_dir(config.get(), slam_data.c_str())) !=
            WLSLAM_OK) {
      return Fail(status);
    }
    wlslam_result* result = nullptr;
    status = wlslam_slam(config.get(),
                         slam_out.empty() ? nullptr : slam_out.c_str(), &result);
    if (status != WLSLAM_OK) return Fail(status);
    std::printf("optimized %zu poses\n", wlslam_result_num_poses(result));
    PrintMetric(result, "wifi loop closures", "closures.wifi");
    PrintMetric(result, "proximity ICP constraints", "closures.icp_proximity");
    PrintMetric(result, "loop ICP constraints", "closures.icp_loop");
    PrintMetric(result, "odometry RMSE [m]", "odometry.position_rmse");
    PrintMetric(result, "WiFi first pass RMSE [m]", "wifi.position_rmse");
    PrintMetric(result, "final RMSE [m]", "final.position_rmse");
    wlslam_result_destroy(result);
    return 0;
  }

  if (eval->parsed()) {
    double position = 0., orientation = 0.;
    status = wlslam_eval(eval_trajectory.c_str(), eval_truth.c_str(),
                         eval_out.empty() ? nullptr : eval_out.c_str(),
                         &position, &orientation);
    if (status != WLSLAM_OK) return Fail(status);
    std::printf("position RMSE %.4f m, orientation RMSE %.4f rad\n", position,
                orientation);
    return 0;
  }

  if (map->parsed()) {
    if ((status = config.Configure(map_options)) != WLSLAM_OK) {
      return Fail(status);
    }
    status = wlslam_map(config.get(), map_trajectory.c_str(), map_scans.c_str(),
                        map_out.c_str());
    if (status != WLSLAM_OK) return Fail(status);
    std::printf("map written to %s\n", map_out.c_str());
    return 0;
  }

  if ((status = config.Configure(profile_options)) != WLSLAM_OK) {
    return Fail(status);
  }
  if (!profile_data.empty() &&
      (status = wlslam_config_set_data_dir(config.get(), profile_data.c_str())) !=
          WLSLAM_OK) {
    return Fail(status);
  }
  char* json = nullptr;
  status = wlslam_profile(config.get(), profile_seed, &json);
  if (status != WLSLAM_OK) return Fail(status);
  std::fputs(json, stdout);
  wlslam_string_free(json);
  return 0;
}
