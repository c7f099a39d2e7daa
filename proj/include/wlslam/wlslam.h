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

/* C interface of the WiFi/LiDAR pose-graph SLAM library. Every handle is
 * opaque; every fallible call returns a wlslam_status and leaves a message
 * for wlslam_last_error() on failure. */

#ifndef WLSLAM_WLSLAM_H_
#define WLSLAM_WLSLAM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(WLSLAM_BUILDING_LIBRARY)
#define WLSLAM_API __attribute__((visibility("default")))
#else
#define WLSLAM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wlslam_status {
  WLSLAM_OK = 0,
  WLSLAM_ERROR = 1,
  WLSLAM_INPUT_ERROR = 2,
  WLSLAM_NUMERICAL_FAILURE = 3,
  WLSLAM_INSUFFICIENT_CONSTRAINTS = 4
} wlslam_status;

typedef struct wlslam_config wlslam_config;
typedef struct wlslam_result wlslam_result;

WLSLAM_API const char* wlslam_version(void);

/* Message of the last failed call on this thread; "" if none. */
WLSLAM_API const char* wlslam_last_error(void);

/* Strings returned through char** are owned by the caller. */
WLSLAM_API void wlslam_string_free(char* s);

WLSLAM_API wlslam_status wlslam_config_create(wlslam_config** out);
WLSLAM_API void wlslam_config_destroy(wlslam_config* config);
WLSLAM_API wlslam_status wlslam_config_load(wlslam_config* config,
                                            const char* path);
WLSLAM_API wlslam_status wlslam_config_set(wlslam_config* config,
                                           const char* key, const char* value);
/* "key=value" form, as accepted on the command line. */
WLSLAM_API wlslam_status wlslam_config_apply(wlslam_config* config,
                                             const char* assignment);
WLSLAM_API wlslam_status wlslam_config_get(const wlslam_config* config,
                                           const char* key, char** value);
WLSLAM_API wlslam_status wlslam_config_dump(const wlslam_config* config,
                                            char** text);
/* Uses odometry.csv, wifi.csv, scans.jsonl and, when present,
 * ground_truth.tum from `directory`. */
WLSLAM_API wlslam_status wlslam_config_set_data_dir(wlslam_config* config,
                                                    const char* directory);

/* Generates a synthetic scenario and writes its logs into `directory`. */
WLSLAM_API wlslam_status wlslam_simulate(const wlslam_config* config,
                                         uint64_t seed, const char* directory);

/* Runs the pipeline on the configured logs. Outputs are written to
 * `output_dir`, or the configured output directory when NULL. `out` may be
 * NULL when only the files are wanted. */
WLSLAM_API wlslam_status wlslam_slam(const wlslam_config* config,
                                     const char* output_dir,
                                     wlslam_result** out);

WLSLAM_API size_t wlslam_result_num_poses(const wlslam_result* result);
WLSLAM_API wlslam_status wlslam_result_pose(const wlslam_result* result,
                                            size_t index, double* timestamp,
                                            double* x, double* y,
                                            double* theta);
/* Names: "nodes", "closures.wifi", "closures.icp_proximity",
 * "closures.icp_loop", and "<trajectory>.position_rmse",
 * "<trajectory>.orientation_rmse", "<trajectory>.raw_position_rmse" with
 * <trajectory> one of odometry, wifi, final (ground truth required). */
WLSLAM_API wlslam_status wlslam_result_metric(const wlslam_result* result,
                                              const char* name, double* value);
WLSLAM_API const char* wlslam_result_metrics_json(const wlslam_result* result);
WLSLAM_API void wlslam_result_destroy(wlslam_result* result);

/* Compares a TUM trajectory with TUM ground truth. Writes eval.json and
 * errors.csv into `output_dir` unless it is NULL. */
WLSLAM_API wlslam_status wlslam_eval(const char* trajectory_path,
                                     const char* ground_truth_path,
                                     const char* output_dir,
                                     double* position_rmse,
                                     double* orientation_rmse);

/* Renders scans at a TUM trajectory and writes a PGM plus YAML sidecar. */
WLSLAM_API wlslam_status wlslam_map(const wlslam_config* config,
                                    const char* trajectory_path,
                                    const char* scans_path,
                                    const char* pgm_path);

/* Stage timings of one pipeline run plus per-call microbenchmarks, as JSON.
 * Runs on the configured logs, or on a scenario simulated with `seed` when
 * no odometry log is configured. */
WLSLAM_API wlslam_status wlslam_profile(const wlslam_config* config,
                                        uint64_t seed, char** json);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  /* WLSLAM_WLSLAM_H_ */
