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

#ifndef WLSLAM_FINGERPRINT_H_
#define WLSLAM_FINGERPRINT_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace wlslam {

// One RSS observation of one access point.
struct ApReading {
  std::string ap_id;
  double rss_dbm = 0.;
};

// A WiFi scan: RSS per access point, sorted by AP id with unique ids.
class Fingerprint {
 public:
  Fingerprint() = default;
  // Later readings of the same AP replace earlier ones.
  Fingerprint(double timestamp, const std::vector<ApReading>& readings);
  Fingerprint(double timestamp, const std::map<std::string, double>& readings);

  double timestamp() const { return timestamp_; }
  const std::vector<ApReading>& readings() const { return readings_; }
  std::size_t size() const { return readings_.size(); }
  bool empty() const { return readings_.empty(); }

 private:
  double timestamp_ = 0.;
  std::vector<ApReading> readings_;
};

enum class SimilarityMode {
  // H/(Li+Lj-H) * (1/H) * prod exp(-d²/2σ²).
  kLiteral,
  // H/(Li+Lj-H) * (prod exp(-d²/2σ²))^(1/H).
  kGeometricMean,
};

struct SimilarityParams {
  double sigma_squared = 36.;
  double min_similarity = 0.3;
  SimilarityMode mode = SimilarityMode::kLiteral;
};

void ValidateSimilarityParams(const SimilarityParams& params);

// Fingerprint similarity in [0, 1]: the product of a detection likelihood
// (Jaccard overlap of the AP sets) and a signal-strength likelihood over the H
// common APs. Zero when no AP is shared. Throws kInvalidInput on an empty
// fingerprint.
double Similarity(const Fingerprint& fi, const Fingerprint& fj,
                  const SimilarityParams& params);

// Same as Similarity() once the common-AP statistics are known. `sum_sq_diff`
// is the sum over common APs of (f_i,n - f_j,n)².
double SimilarityFromOverlap(int common, int size_i, int size_j,
                             double sum_sq_diff, const SimilarityParams& params);

// True when the score passes the gate (score >= min_similarity).
inline bool PassesSimilarityGate(double score, const SimilarityParams& params) {
  return score >= params.min_similarity;
}

// WiFi log: one `timestamp_s, ap_id, rss_dbm` record per line, '#' starts a
// comment. Records whose timestamps fall within `burst_window` seconds of the
// first record of the current burst form one fingerprint, stamped with that
// first timestamp.
std::vector<Fingerprint> ParseWifiLog(std::istream& in, const std::string& name,
                                      double burst_window = 2.);
std::vector<Fingerprint> ReadWifiLog(const std::filesystem::path& path,
                                     double burst_window = 2.);
void WriteWifiLog(const std::vector<Fingerprint>& fingerprints,
                  std::ostream& out);

}  // namespace wlslam

#endif  // WLSLAM_FINGERPRINT_H_
