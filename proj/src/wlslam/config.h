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

#ifndef WLSLAM_CONFIG_H_
#define WLSLAM_CONFIG_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wlslam/pipeline.h"
#include "wlslam/sim.h"

namespace wlslam {

struct Config {
  ScenarioConfig scenario;
  PipelineConfig pipeline;
};

// Settings are `key = value` lines; '#' starts a comment. Keys are dotted
// (`sequence.window_w`, `icp.loop_radius`, ...); see SettingKeys().
void ParseConfig(std::istream& in, const std::string& name, Config* config);
void LoadConfig(const std::filesystem::path& path, Config* config);

// Applies one setting; throws kInvalidInput for an unknown key or a value
// that does not parse.
void SetConfigValue(const std::string& key, const std::string& value,
                    Config* config);
// Accepts "key=value".
void ApplyOverride(const std::string& assignment, Config* config);

std::string GetConfigValue(const Config& config, const std::string& key);
std::vector<std::string> SettingKeys();

// Every setting in file syntax; parsing it reproduces `config`.
std::string DumpConfig(const Config& config);

}  // namespace wlslam

#endif  // WLSLAM_CONFIG_H_
