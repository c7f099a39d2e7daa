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

#ifndef WLSLAM_SEQUENCE_LOOP_H_
#define WLSLAM_SEQUENCE_LOOP_H_

#include <array>
#include <span>
#include <vector>

#include "Eigen/Core"
#include "wlslam/fingerprint.h"
#include "wlslam/geometry.h"
#include "wlslam/trajectory.h"

namespace wlslam {

struct TrackEntry {
  Pose2D pose;
  Fingerprint fingerprint;
  // Odometric path length from the first entry.
  double cumulative_distance = 0.;
};

// Time-ordered (odometry pose, fingerprint) samples. These are the nodes of
// the pose graph.
class FingerprintTrack {
 public:
  FingerprintTrack() = default;
  // Throws kInvalidInput unless timestamps strictly increase, distances start
  // at 0 and never decrease, and every fingerprint is non-empty.
  explicit FingerprintTrack(std::vector<TrackEntry> entries);

  // Places one entry at each fingerprint time, with the pose interpolated
  // from `odometry` and the distance taken along it. Fingerprints further
  // than `max_gap` seconds from any odometry sample raise
  // kTimestampMisalignment.
  static FingerprintTrack FromOdometry(std::span<const TimedPose> odometry,
                                       std::span<const Fingerprint> fingerprints,
                                       double max_gap = 5.);

  int size() const { return static_cast<int>(entries_.size()); }
  const TrackEntry& operator[](int index) const { return entries_[index]; }
  const std::vector<TrackEntry>& entries() const { return entries_; }
  double timestamp(int index) const {
    return entries_[index].fingerprint.timestamp();
  }
  std::vector<double> timestamps() const;
  std::vector<Pose2D> poses() const;

  // acc(x_i, x_j): path length travelled between the two entries.
  double AccumulatedDistance(int i, int j) const;

  // Copy with every pose replaced; distances and fingerprints are kept.
  FingerprintTrack WithPoses(std::span<const Pose2D> poses) const;

 private:
  std::vector<TrackEntry> entries_;
};

struct SequenceMatchParams {
  int window_w = 80;
  int k_neighbors = 2;
  double residual_threshold = 3.;
  double min_loop_distance = 50.;
  // Search candidates over [j - w, j + w] instead of [j - w/2, j + w/2].
  bool wide_candidate_window = false;
};

void ValidateSequenceMatchParams(const SequenceMatchParams& params);

enum class ClosureSource { kWifiSequence, kIcpProximity, kIcpLoop };

const char* ClosureSourceName(ClosureSource source);

// Relative-pose constraint between two nodes. `transform` is the pose of
// node_i expressed in the frame of node_j, i.e. it maps points given in
// node_i's frame into node_j's frame.
struct LoopClosure {
  int node_i = 0;
  int node_j = 0;
  Transform2D transform;
  double residual = 0.;
  ClosureSource source = ClosureSource::kWifiSequence;
};

struct PositionEstimate {
  // Position in the frame of node j.
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  // Similarity of the best matching candidate.
  double weight = 0.;
};

// Similarity-weighted mean of the relative positions of the k candidates
// around node j whose fingerprints best match `query`. Ties are broken by
// smaller index distance to j, then by lower index. Throws kInvalidInput when
// the window leaves the track and kNoEstimate when all k scores are zero.
PositionEstimate EstimatePositionInSequence(const FingerprintTrack& track,
                                            const Fingerprint& query, int j,
                                            const SequenceMatchParams& params,
                                            const SimilarityParams& sim_params);

struct SequenceAlignment {
  // Maps node_i-frame positions onto node_j-frame positions.
  Transform2D transform;
  // Mean correspondence distance under `transform`.
  double residual = 0.;
  std::vector<Eigen::Vector2d> source_points;
  std::vector<Eigen::Vector2d> target_points;
};

// Aligns the fingerprint sequence around node i with the one around node j.
// For every offset tau in [-w/2, w/2] the relative position x_i⁻¹x_{i+tau} is
// paired with the position estimated for f_{i+tau} inside sequence j, and the
// rigid transform minimizing the squared pair distances is solved by SVD.
// Throws kInsufficientCorrespondences with fewer than 3 pairs.
SequenceAlignment AlignSequences(const FingerprintTrack& track, int i, int j,
                                 const SequenceMatchParams& params,
                                 const SimilarityParams& sim_params);

struct LoopDetectionDiagnostics {
  static constexpr double kHistogramBinWidth = 0.5;
  static constexpr int kHistogramBins = 20;

  long pairs_considered = 0;       // acc >= min_loop_distance, windows valid
  long pairs_similarity_gate = 0;  // ... and similarity >= min_similarity
  long pairs_pruned = 0;           // near an already accepted closure
  long alignments_failed = 0;      // no estimate / too few correspondences
  long closures_rejected = 0;      // residual >= threshold
  long closures_accepted = 0;
  // Residuals of every completed alignment; the last bin collects overflow.
  std::array<long, kHistogramBins> residual_histogram{};
};

struct LoopDetectionResult {
  std::vector<LoopClosure> closures;  // sorted by (node_i, node_j)
  LoopDetectionDiagnostics diagnostics;
};

// Dense symmetric table of pairwise fingerprint similarities over a track.
// Entries equal Similarity() on the same pair bit for bit.
class SimilarityTable {
 public:
  SimilarityTable(const FingerprintTrack& track, const SimilarityParams& params);

  double operator()(int a, int b) const { return values_[a * size_ + b]; }
  int size() const { return size_; }

 private:
  int size_;
  std::vector<double> values_;
};

// Scans every pair (i, j), j < i, with acc(x_i, x_j) >= min_loop_distance and
// a fingerprint similarity passing the gate, aligns their sequences and keeps
// the pair when the residual is below residual_threshold. After a pair is
// accepted, pairs within w/4 of it on both indices are skipped.
LoopDetectionResult DetectWifiLoopClosures(const FingerprintTrack& track,
                                           const SequenceMatchParams& params,
                                           const SimilarityParams& sim_params);

// Same as above, reusing a precomputed table.
LoopDetectionResult DetectWifiLoopClosures(const FingerprintTrack& track,
                                           const SimilarityTable& table,
                                           const SequenceMatchParams& params,
                                           const SimilarityParams& sim_params);

}  // namespace wlslam

#endif  // WLSLAM_SEQUENCE_LOOP_H_
