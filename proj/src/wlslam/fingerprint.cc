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

#include "wlslam/fingerprint.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wlslam/errors.h"

namespace wlslam {
namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void ThrowParse(const std::string& name, int line,
                             const std::string& what) {
  throw Error(ErrorCode::kParse,
              name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Fingerprint::Fingerprint(double timestamp,
                         const std::vector<ApReading>& readings)
    : timestamp_(timestamp) {
  std::map<std::string, double> latest;
  for (const ApReading& reading : readings) {
    latest[reading.ap_id] = reading.rss_dbm;
  }
  readings_.reserve(latest.size());
  for (const auto& [ap, rss] : latest) readings_.push_back({ap, rss});
}

Fingerprint::Fingerprint(double timestamp,
                         const std::map<std::string, double>& readings)
    : timestamp_(timestamp) {
  readings_.reserve(readings.size());
  for (const auto& [ap, rss] : readings) readings_.push_back({ap, rss});
}

void ValidateSimilarityParams(const SimilarityParams& params) {
  if (!(params.sigma_squared > 0.) || !(params.min_similarity >= 0.) ||
      !(params.min_similarity <= 1.)) {
    throw Error(ErrorCode::kInvalidInput,
                "similarity params need sigma_squared > 0 and "
                "min_similarity in [0, 1]");
  }
}

double SimilarityFromOverlap(int common, int size_i, int size_j,
                             double sum_sq_diff,
                             const SimilarityParams& params) {
  if (common == 0) return 0.;
  const double h = common;
  const double detection = h / (size_i + size_j - h);
  const double exponent = -sum_sq_diff / (2. * params.sigma_squared);
  switch (params.mode) {
    case SimilarityMode::kLiteral:
      return detection * std::exp(exponent) / h;
    case SimilarityMode::kGeometricMean:
      return detection * std::exp(exponent / h);
  }
  return 0.;
}

double Similarity(const Fingerprint& fi, const Fingerprint& fj,
                  const SimilarityParams& params) {
  if (fi.empty() || fj.empty()) {
    throw Error(ErrorCode::kInvalidInput,
                "similarity of an empty fingerprint is undefined");
  }
  const auto& a = fi.readings();
  const auto& b = fj.readings();
  int common = 0;
  double sum_sq_diff = 0.;
  std::size_t ia = 0;
  std::size_t ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const int order = a[ia].ap_id.compare(b[ib].ap_id);
    if (order < 0) {
      ++ia;
    } else if (order > 0) {
      ++ib;
    } else {
      const double d = a[ia].rss_dbm - b[ib].rss_dbm;
      sum_sq_diff += d * d;
      ++common;
      ++ia;
      ++ib;
    }
  }
  return SimilarityFromOverlap(common, static_cast<int>(a.size()),
                               static_cast<int>(b.size()), sum_sq_diff,
                               params);
}

std::vector<Fingerprint> ParseWifiLog(std::istream& in, const std::string& name,
                                      double burst_window) {
  if (!(burst_window > 0.)) {
    throw Error(ErrorCode::kInvalidInput, "burst window must be positive");
  }
  std::vector<Fingerprint> fingerprints;
  std::vector<ApReading> burst;
  double burst_start = 0.;
  double last_timestamp = -INFINITY;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(Trim(field));
    if (fields.size() != 3 || fields[1].empty()) {
      ThrowParse(name, line_number, "expected `timestamp_s, ap_id, rss_dbm`");
    }
    double timestamp = 0.;
    double rss = 0.;
    try {
      std::size_t used = 0;
      timestamp = std::stod(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("trailing");
      rss = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      ThrowParse(name, line_number, "malformed number");
    }
    if (!std::isfinite(timestamp) || !std::isfinite(rss)) {
      ThrowParse(name, line_number, "non-finite value");
    }
    if (timestamp < last_timestamp) {
      ThrowParse(name, line_number, "timestamps must be non-decreasing");
    }
    last_timestamp = timestamp;

    if (!burst.empty() && timestamp - burst_start >= burst_window) {
      fingerprints.emplace_back(burst_start, burst);
      burst.clear();
    }
    if (burst.empty()) burst_start = timestamp;
    burst.push_back({fields[1], rss});
  }
  if (!burst.empty()) fingerprints.emplace_back(burst_start, burst);
  return fingerprints;
}

std::vector<Fingerprint> ReadWifiLog(const std::filesystem::path& path,
                                     double burst_window) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open WiFi log " + path.string());
  }
  return ParseWifiLog(in, path.string(), burst_window);
}

void WriteWifiLog(const std::vector<Fingerprint>& fingerprints,
                  std::ostream& out) {
  out << "# timestamp_s, ap_id, rss_dbm\n";
  char buffer[128];
  for (const Fingerprint& fingerprint : fingerprints) {
    for (const ApReading& reading : fingerprint.readings()) {
      std::snprintf(buffer, sizeof(buffer), "%.3f, %s, %.2f\n",
                    fingerprint.timestamp(), reading.ap_id.c_str(),
                    reading.rss_dbm);
      out << buffer;
    }
  }
}

}  // namespace wlslam
