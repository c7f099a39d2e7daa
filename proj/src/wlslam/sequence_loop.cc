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

#include "wlslam/sequence_loop.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "wlslam/errors.h"
#include "wlslam/rigid_alignment.h"

namespace wlslam {
namespace {

struct Candidate {
  double score;
  int index_distance;
  int index;
};

bool BetterCandidate(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.index_distance != b.index_distance) {
    return a.index_distance < b.index_distance;
  }
  return a.index < b.index;
}

int CandidateHalfWidth(const SequenceMatchParams& params) {
  return params.wide_candidate_window ? params.window_w : params.window_w / 2;
}

bool WindowInside(const FingerprintTrack& track, int center, int half) {
  return center - half >= 0 && center + half < track.size();
}

// Shared by the direct and the table-backed paths; `score(c)` is the
// similarity between the query and track entry c.
template <typename ScoreFn>
std::optional<PositionEstimate> EstimateWith(const FingerprintTrack& track,
                                             int j,
                                             const SequenceMatchParams& params,
                                             ScoreFn&& score,
                                             std::vector<Candidate>* scratch) {
  const int half = CandidateHalfWidth(params);
  const int first = std::max(0, j - half);
  const int last = std::min(track.size() - 1, j + half);
  scratch->clear();
  for (int c = first; c <= last; ++c) {
    scratch->push_back({score(c), std::abs(c - j), c});
  }
  const int k = std::min<int>(params.k_neighbors, scratch->size());
  std::partial_sort(scratch->begin(), scratch->begin() + k, scratch->end(),
                    BetterCandidate);
  double total = 0.;
  Eigen::Vector2d weighted = Eigen::Vector2d::Zero();
  const Pose2D& anchor = track[j].pose;
  for (int l = 0; l < k; ++l) {
    const Candidate& candidate = (*scratch)[l];
    total += candidate.score;
    weighted += candidate.score *
                Relative(anchor, track[candidate.index].pose).translation();
  }
  if (!(total > 0.)) return std::nullopt;
  return PositionEstimate{weighted / total, (*scratch)[0].score};
}

template <typename PairScoreFn>
SequenceAlignment AlignWith(const FingerprintTrack& track, int i, int j,
                            const SequenceMatchParams& params,
                            PairScoreFn&& pair_score) {
  const int half = params.window_w / 2;
  SequenceAlignment alignment;
  std::vector<Candidate> scratch;
  const Pose2D& origin = track[i].pose;
  for (int tau = -half; tau <= half; ++tau) {
    const int query = i + tau;
    const auto estimate = EstimateWith(
        track, j, params, [&](int c) { return pair_score(query, c); },
        &scratch);
    if (!estimate) continue;
    alignment.source_points.push_back(
        Relative(origin, track[query].pose).translation());
    alignment.target_points.push_back(estimate->position);
  }
  if (alignment.source_points.size() < 3) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "sequences around nodes " + std::to_string(i) + " and " +
                    std::to_string(j) + " yield " +
                    std::to_string(alignment.source_points.size()) +
                    " correspondences");
  }
  alignment.transform =
      AlignRigid(alignment.source_points, alignment.target_points);
  alignment.residual = MeanAlignmentDistance(
      alignment.transform, alignment.source_points, alignment.target_points);
  return alignment;
}

void CheckWindows(const FingerprintTrack& track, int i, int j,
                  const SequenceMatchParams& params) {
  const int half = params.window_w / 2;
  if (!WindowInside(track, i, half) || !WindowInside(track, j, half)) {
    throw Error(ErrorCode::kInvalidInput,
                "sequence windows around nodes " + std::to_string(i) + " and " +
                    std::to_string(j) + " leave the track");
  }
}

}  // namespace

FingerprintTrack::FingerprintTrack(std::vector<TrackEntry> entries)
    : entries_(std::move(entries)) {
  for (std::size_t n = 0; n < entries_.size(); ++n) {
    const TrackEntry& entry = entries_[n];
    if (entry.fingerprint.empty()) {
      throw Error(ErrorCode::kInvalidInput,
                  "track entry " + std::to_string(n) + " has no readings");
    }
    if (n == 0) {
      if (entry.cumulative_distance != 0.) {
        throw Error(ErrorCode::kInvalidInput,
                    "track must start at cumulative distance 0");
      }
      continue;
    }
    const TrackEntry& previous = entries_[n - 1];
    if (!(entry.fingerprint.timestamp() > previous.fingerprint.timestamp())) {
      throw Error(ErrorCode::kInvalidInput,
                  "track timestamps must strictly increase at entry " +
                      std::to_string(n));
    }
    if (entry.cumulative_distance < previous.cumulative_distance) {
      throw Error(ErrorCode::kInvalidInput,
                  "cumulative distance decreases at entry " + std::to_string(n));
    }
  }
}

FingerprintTrack FingerprintTrack::FromOdometry(
    std::span<const TimedPose> odometry,
    std::span<const Fingerprint> fingerprints, double max_gap) {
  if (odometry.empty()) {
    throw Error(ErrorCode::kInvalidInput, "odometry is empty");
  }
  std::vector<double> odometry_times;
  odometry_times.reserve(odometry.size());
  for (const TimedPose& p : odometry) odometry_times.push_back(p.timestamp);
  // Path length at every odometry sample.
  std::vector<double> path(odometry.size(), 0.);
  for (std::size_t n = 1; n < odometry.size(); ++n) {
    path[n] = path[n - 1] + (odometry[n].pose.translation() -
                             odometry[n - 1].pose.translation())
                                .norm();
  }

  std::vector<TrackEntry> entries;
  entries.reserve(fingerprints.size());
  for (const Fingerprint& fingerprint : fingerprints) {
    const double t = fingerprint.timestamp();
    if (!NearestTimestamp(odometry_times, t, max_gap)) {
      throw Error(ErrorCode::kTimestampMisalignment,
                  "no odometry within " + std::to_string(max_gap) +
                      " s of the fingerprint at t=" + std::to_string(t));
    }
    const auto upper = static_cast<std::size_t>(
        std::upper_bound(odometry_times.begin(), odometry_times.end(), t) -
        odometry_times.begin());
    double distance = 0.;
    if (upper == odometry.size()) {
      distance = path.back();
    } else if (upper > 0) {
      const double alpha = (t - odometry_times[upper - 1]) /
                           (odometry_times[upper] - odometry_times[upper - 1]);
      distance = path[upper - 1] + alpha * (path[upper] - path[upper - 1]);
    }
    entries.push_back({InterpolatePose(odometry, t), fingerprint, distance});
  }
  if (!entries.empty()) {
    const double offset = entries.front().cumulative_distance;
    for (TrackEntry& entry : entries) entry.cumulative_distance -= offset;
  }
  return FingerprintTrack(std::move(entries));
}

std::vector<double> FingerprintTrack::timestamps() const {
  std::vector<double> result;
  result.reserve(entries_.size());
  for (const TrackEntry& entry : entries_) {
    result.push_back(entry.fingerprint.timestamp());
  }
  return result;
}

std::vector<Pose2D> FingerprintTrack::poses() const {
  std::vector<Pose2D> result;
  result.reserve(entries_.size());
  for (const TrackEntry& entry : entries_) result.push_back(entry.pose);
  return result;
}

double FingerprintTrack::AccumulatedDistance(int i, int j) const {
  return std::abs(entries_[i].cumulative_distance -
                  entries_[j].cumulative_distance);
}

FingerprintTrack FingerprintTrack::WithPoses(
    std::span<const Pose2D> poses) const {
  if (poses.size() != entries_.size()) {
    throw Error(ErrorCode::kInvalidInput, "pose count does not match track");
  }
  FingerprintTrack copy = *this;
  for (std::size_t n = 0; n < poses.size(); ++n) copy.entries_[n].pose = poses[n];
  return copy;
}

void ValidateSequenceMatchParams(const SequenceMatchParams& params) {
  if (params.window_w < 2 || params.window_w % 2 != 0) {
    throw Error(ErrorCode::kInvalidInput, "window_w must be even and >= 2");
  }
  if (params.k_neighbors < 1) {
    throw Error(ErrorCode::kInvalidInput, "k_neighbors must be >= 1");
  }
  if (!(params.residual_threshold > 0.) || !(params.min_loop_distance > 0.)) {
    throw Error(ErrorCode::kInvalidInput, "thresholds must be positive");
  }
}

const char* ClosureSourceName(ClosureSource source) {
  switch (source) {
    case ClosureSource::kWifiSequence: return "wifi_sequence";
    case ClosureSource::kIcpProximity: return "icp_proximity";
    case ClosureSource::kIcpLoop: return "icp_loop";
  }
  return "unknown";
}

PositionEstimate EstimatePositionInSequence(const FingerprintTrack& track,
                                            const Fingerprint& query, int j,
                                            const SequenceMatchParams& params,
                                            const SimilarityParams& sim_params) {
  ValidateSequenceMatchParams(params);
  if (!WindowInside(track, j, params.window_w / 2)) {
    throw Error(ErrorCode::kInvalidInput,
                "sequence window around node " + std::to_string(j) +
                    " leaves the track");
  }
  std::vector<Candidate> scratch;
  const auto estimate = EstimateWith(
      track, j, params,
      [&](int c) { return Similarity(query, track[c].fingerprint, sim_params); },
      &scratch);
  if (!estimate) {
    throw Error(ErrorCode::kNoEstimate,
                "no candidate around node " + std::to_string(j) +
                    " shares an access point with the query");
  }
  return *estimate;
}

SequenceAlignment AlignSequences(const FingerprintTrack& track, int i, int j,
                                 const SequenceMatchParams& params,
                                 const SimilarityParams& sim_params) {
  ValidateSequenceMatchParams(params);
  CheckWindows(track, i, j, params);
  return AlignWith(track, i, j, params, [&](int query, int c) {
    return Similarity(track[query].fingerprint, track[c].fingerprint,
                      sim_params);
  });
}

SimilarityTable::SimilarityTable(const FingerprintTrack& track,
                                 const SimilarityParams& params)
    : size_(track.size()),
      values_(static_cast<std::size_t>(size_) * size_, 0.) {
  // Intern AP ids in lexicographic order so that merging by id visits common
  // APs in the same order as Similarity() and sums bit-identically.
  std::set<std::string> names;
  for (const TrackEntry& entry : track.entries()) {
    for (const ApReading& r : entry.fingerprint.readings()) names.insert(r.ap_id);
  }
  std::unordered_map<std::string, int> ids;
  for (const std::string& name : names) ids.emplace(name, static_cast<int>(ids.size()));

  struct Compact {
    std::vector<int> ids;
    std::vector<double> rss;
  };
  std::vector<Compact> compact(size_);
  for (int n = 0; n < size_; ++n) {
    for (const ApReading& r : track[n].fingerprint.readings()) {
      compact[n].ids.push_back(ids.at(r.ap_id));
      compact[n].rss.push_back(r.rss_dbm);
    }
  }
  for (int a = 0; a < size_; ++a) {
    const Compact& fa = compact[a];
    for (int b = a; b < size_; ++b) {
      const Compact& fb = compact[b];
      int common = 0;
      double sum_sq_diff = 0.;
      std::size_t ia = 0;
      std::size_t ib = 0;
      while (ia < fa.ids.size() && ib < fb.ids.size()) {
        if (fa.ids[ia] < fb.ids[ib]) {
          ++ia;
        } else if (fa.ids[ia] > fb.ids[ib]) {
          ++ib;
        } else {
          const double d = fa.rss[ia] - fb.rss[ib];
          sum_sq_diff += d * d;
          ++common;
          ++ia;
          ++ib;
        }
      }
      const double score = SimilarityFromOverlap(
          common, static_cast<int>(fa.ids.size()),
          static_cast<int>(fb.ids.size()), sum_sq_diff, params);
      values_[static_cast<std::size_t>(a) * size_ + b] = score;
      values_[static_cast<std::size_t>(b) * size_ + a] = score;
    }
  }
}

LoopDetectionResult DetectWifiLoopClosures(const FingerprintTrack& track,
                                           const SequenceMatchParams& params,
                                           const SimilarityParams& sim_params) {
  return DetectWifiLoopClosures(track, SimilarityTable(track, sim_params),
                                params, sim_params);
}

LoopDetectionResult DetectWifiLoopClosures(const FingerprintTrack& track,
                                           const SimilarityTable& table,
                                           const SequenceMatchParams& params,
                                           const SimilarityParams& sim_params) {
  ValidateSequenceMatchParams(params);
  ValidateSimilarityParams(sim_params);
  if (table.size() != track.size()) {
    throw Error(ErrorCode::kInvalidInput, "similarity table does not match track");
  }
  LoopDetectionResult result;
  auto& diagnostics = result.diagnostics;
  const int half = params.window_w / 2;
  const int prune = params.window_w / 4;
  const auto table_score = [&](int a, int b) { return table(a, b); };

  for (int i = half; i + half < track.size(); ++i) {
    for (int j = half; j < i; ++j) {
      if (track.AccumulatedDistance(i, j) < params.min_loop_distance) break;
      ++diagnostics.pairs_considered;
      if (!PassesSimilarityGate(table(i, j), sim_params)) continue;
      ++diagnostics.pairs_similarity_gate;

      bool pruned = false;
      for (auto it = result.closures.rbegin(); it != result.closures.rend();
           ++it) {
        if (i - it->node_i >= prune) break;
        if (std::abs(j - it->node_j) < prune) {
          pruned = true;
          break;
        }
      }
      if (pruned) {
        ++diagnostics.pairs_pruned;
        continue;
      }

      SequenceAlignment alignment;
      try {
        alignment = AlignWith(track, i, j, params, table_score);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientCorrespondences) throw;
        ++diagnostics.alignments_failed;
        continue;
      }
      const int bin = std::min(
          LoopDetectionDiagnostics::kHistogramBins - 1,
          static_cast<int>(alignment.residual /
                           LoopDetectionDiagnostics::kHistogramBinWidth));
      ++diagnostics.residual_histogram[bin];
      if (alignment.residual < params.residual_threshold) {
        result.closures.push_back({i, j, alignment.transform,
                                   alignment.residual,
                                   ClosureSource::kWifiSequence});
        ++diagnostics.closures_accepted;
      } else {
        ++diagnostics.closures_rejected;
      }
    }
  }
  return result;
}

}  // namespace wlslam
