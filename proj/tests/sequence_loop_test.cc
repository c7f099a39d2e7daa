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
#include <map>
#include <random>
#include <string>

#include <Eigen/LU>

#include "gtest/gtest.h"
#include "oracles.h"
#include "wlslam/errors.h"
#include "wlslam/rigid_alignment.h"
#include "wlslam/sim.h"

namespace wlslam {
namespace {

using oracle::SingleAp;
using oracle::WithDistances;

double TranslationError(const Transform2D& a, const Transform2D& b) {
  return (a.translation() - b.translation()).norm();
}

double AngleError(const Transform2D& a, const Transform2D& b) {
  return std::abs(NormalizeAngle(a.dtheta() - b.dtheta()));
}

TEST(FingerprintTrackTest, RejectsMalformedEntries) {
  const Pose2D origin;
  EXPECT_THROW(FingerprintTrack({{origin, SingleAp(0., "a"), 1.}}), Error);
  EXPECT_THROW(FingerprintTrack({{origin, SingleAp(1., "a"), 0.},
                                 {origin, SingleAp(1., "a"), 0.}}),
               Error);
  EXPECT_THROW(FingerprintTrack({{origin, SingleAp(0., "a"), 0.},
                                 {origin, SingleAp(1., "a"), 2.},
                                 {origin, SingleAp(2., "a"), 1.}}),
               Error);
  EXPECT_THROW(FingerprintTrack({{origin, Fingerprint(), 0.}}), Error);
}

TEST(FingerprintTrackTest, FromOdometryInterpolatesPoseAndDistance) {
  std::vector<TimedPose> odometry;
  for (int n = 0; n <= 10; ++n) odometry.push_back({n * 1., Pose2D(n * 0.4, 0., 0.)});
  const std::vector<Fingerprint> fingerprints = {SingleAp(1., "a"),
                                                 SingleAp(3.5, "b")};
  const FingerprintTrack track = FingerprintTrack::FromOdometry(odometry, fingerprints);
  ASSERT_EQ(track.size(), 2);
  EXPECT_NEAR(track[1].pose.x(), 1.4, 1e-12);
  EXPECT_EQ(track[0].cumulative_distance, 0.);
  EXPECT_NEAR(track.AccumulatedDistance(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(track.AccumulatedDistance(1, 0), 1.0, 1e-12);
}

TEST(FingerprintTrackTest, FromOdometryRejectsDistantFingerprints) {
  const std::vector<TimedPose> odometry = {{0., Pose2D()}, {1., Pose2D(1., 0., 0.)}};
  const std::vector<Fingerprint> fingerprints = {SingleAp(7., "a")};
  try {
    FingerprintTrack::FromOdometry(odometry, fingerprints, 5.);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTimestampMisalignment);
  }
}

TEST(SequenceParamsTest, Validation) {
  SequenceMatchParams params;
  EXPECT_NO_THROW(ValidateSequenceMatchParams(params));
  params.window_w = 7;
  EXPECT_THROW(ValidateSequenceMatchParams(params), Error);
  params = {};
  params.window_w = 0;
  EXPECT_THROW(ValidateSequenceMatchParams(params), Error);
  params = {};
  params.k_neighbors = 0;
  EXPECT_THROW(ValidateSequenceMatchParams(params), Error);
  params = {};
  params.residual_threshold = 0.;
  EXPECT_THROW(ValidateSequenceMatchParams(params), Error);
}

// Five entries on the x axis, each with a unique AP.
FingerprintTrack LineTrack() {
  std::vector<TrackEntry> entries;
  for (int n = 0; n < 5; ++n) {
    entries.push_back({Pose2D(n * 1., 0., 0.), SingleAp(n * 2., "ap" + std::to_string(n)), 0.});
  }
  return FingerprintTrack(WithDistances(std::move(entries)));
}

TEST(EstimatePositionTest, QueryAtCentreMapsToOrigin) {
  SequenceMatchParams params;
  params.window_w = 4;
  params.k_neighbors = 1;
  const FingerprintTrack track = LineTrack();
  const PositionEstimate e = EstimatePositionInSequence(
      track, track[2].fingerprint, 2, params, {});
  EXPECT_EQ(e.position, Eigen::Vector2d::Zero());
  EXPECT_EQ(e.weight, 1.);
}

TEST(EstimatePositionTest, SingleNeighbourReturnsItsRelativePosition) {
  SequenceMatchParams params;
  params.window_w = 4;
  params.k_neighbors = 1;
  const FingerprintTrack track = LineTrack();
  const PositionEstimate e = EstimatePositionInSequence(
      track, SingleAp(0., "ap4", -53.), 2, params, {});
  EXPECT_NEAR(e.position.x(), 2., 1e-15);
  EXPECT_NEAR(e.position.y(), 0., 1e-15);
}

TEST(EstimatePositionTest, WeightedMeanOfTwoCandidates) {
  // RSS offsets chosen so that the query scores 0.6 against the centre node
  // and 0.3 against the node 2 m ahead.
  const double d06 = std::sqrt(-72. * std::log(0.6));
  const double d03 = std::sqrt(-72. * std::log(0.3));
  std::vector<TrackEntry> entries = {
      {Pose2D(-2., 0., 0.), SingleAp(0., "B"), 0.},
      {Pose2D(0., 0., 0.), SingleAp(2., "A", -50. - d06), 0.},
      {Pose2D(2., 0., 0.), SingleAp(4., "A", -50. - d03), 0.},
  };
  const FingerprintTrack track(WithDistances(std::move(entries)));
  SequenceMatchParams params;
  params.window_w = 2;
  params.k_neighbors = 2;
  const PositionEstimate e =
      EstimatePositionInSequence(track, SingleAp(9., "A"), 1, params, {});
  EXPECT_NEAR(e.position.x(), 2. * 0.3 / 0.9, 1e-12);
  EXPECT_NEAR(e.position.y(), 0., 1e-12);
  EXPECT_NEAR(e.weight, 0.6, 1e-12);
}

TEST(EstimatePositionTest, TiesPreferTheCloserIndex) {
  std::vector<TrackEntry> entries;
  for (int n = 0; n < 5; ++n) {
    entries.push_back({Pose2D(n * 1., 0., 0.), SingleAp(n * 2., n == 2 ? "x" : "A"), 0.});
  }
  const FingerprintTrack track(WithDistances(std::move(entries)));
  SequenceMatchParams params;
  params.window_w = 4;
  params.k_neighbors = 1;
  // Nodes 0, 1, 3 and 4 score 1; 1 and 3 are closest, 1 has the lower index.
  const PositionEstimate e =
      EstimatePositionInSequence(track, SingleAp(0., "A"), 2, params, {});
  EXPECT_EQ(e.position.x(), -1.);
}

TEST(EstimatePositionTest, Errors) {
  SequenceMatchParams params;
  params.window_w = 4;
  const FingerprintTrack track = LineTrack();
  try {
    EstimatePositionInSequence(track, SingleAp(0., "none"), 2, params, {});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoEstimate);
  }
  try {
    EstimatePositionInSequence(track, SingleAp(0., "ap0"), 1, params, {});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(AlignSequencesTest, PlantedTranslation) {
  std::mt19937_64 rng(31);
  const oracle::PlantedSequence c = oracle::MakePlantedSequence(20, Transform2D(5., 2., 0.), 0., &rng);
  SequenceMatchParams params;
  params.window_w = 20;
  params.k_neighbors = 1;
  const SequenceAlignment a = AlignSequences(c.track, c.i, c.j, params, {});
  EXPECT_NEAR(a.transform.dx(), 5., 1e-9);
  EXPECT_NEAR(a.transform.dy(), 2., 1e-9);
  EXPECT_NEAR(a.transform.dtheta(), 0., 1e-9);
  EXPECT_NEAR(a.residual, 0., 1e-9);
}

TEST(AlignSequencesTest, PlantedQuarterTurn) {
  std::mt19937_64 rng(32);
  const oracle::PlantedSequence c = oracle::MakePlantedSequence(20, Transform2D(0., 0., kPi / 2.), 0., &rng);
  SequenceMatchParams params;
  params.window_w = 20;
  const SequenceAlignment a = AlignSequences(c.track, c.i, c.j, params, {});
  EXPECT_NEAR(a.transform.dtheta(), kPi / 2., 1e-9);
  EXPECT_LE(a.residual, 1e-9);
}

TEST(AlignSequencesTest, RecoversRandomPlantedTransformsExactly) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> radius(0., 20.);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  SequenceMatchParams params;
  for (int trial = 0; trial < 25; ++trial) {
    const double r = radius(rng);
    const double bearing = angle(rng);
    const Transform2D planted(r * std::cos(bearing), r * std::sin(bearing), angle(rng));
    const oracle::PlantedSequence c = oracle::MakePlantedSequence(params.window_w, planted, 0., &rng);
    const SequenceAlignment a = AlignSequences(c.track, c.i, c.j, params, {});
    EXPECT_LE(TranslationError(a.transform, planted), 1e-6);
    EXPECT_LE(AngleError(a.transform, planted), 1e-8);
    EXPECT_EQ(a.source_points.size(), static_cast<std::size_t>(params.window_w));
  }
}

TEST(AlignSequencesTest, NoisyCorrespondencesMatchGridSearch) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> coordinate(-10., 10.);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  SequenceMatchParams params;
  for (int trial = 0; trial < 5; ++trial) {
    const Transform2D planted(coordinate(rng), coordinate(rng), angle(rng));
    const oracle::PlantedSequence c = oracle::MakePlantedSequence(params.window_w, planted, 0.3, &rng);
    const SequenceAlignment a = AlignSequences(c.track, c.i, c.j, params, {});
    EXPECT_LE(a.residual, 1.0);
    EXPECT_LE(TranslationError(a.transform, planted), 0.5);
    EXPECT_LE(AngleError(a.transform, planted), 0.05);
    const Transform2D best =
        oracle::GridSearchRigid(a.source_points, a.target_points, 25.);
    EXPECT_LE(TranslationError(a.transform, best), 1e-6);
    EXPECT_LE(AngleError(a.transform, best), 1e-7);
  }
}

TEST(AlignSequencesTest, ResidualIsMeanCorrespondenceDistance) {
  std::mt19937_64 rng(35);
  const oracle::PlantedSequence c = oracle::MakePlantedSequence(40, Transform2D(3., -4., 1.), 0.3, &rng);
  SequenceMatchParams params;
  params.window_w = 40;
  const SequenceAlignment a = AlignSequences(c.track, c.i, c.j, params, {});
  const double ct = std::cos(a.transform.dtheta());
  const double st = std::sin(a.transform.dtheta());
  double sum = 0.;
  for (std::size_t n = 0; n < a.source_points.size(); ++n) {
    const Eigen::Vector2d& s = a.source_points[n];
    const double x = ct * s.x() - st * s.y() + a.transform.dx();
    const double y = st * s.x() + ct * s.y() + a.transform.dy();
    sum += std::hypot(x - a.target_points[n].x(), y - a.target_points[n].y());
  }
  EXPECT_NEAR(a.residual, sum / a.source_points.size(), 1e-12);
}

TEST(AlignSequencesTest, InvariantUnderRigidMotionOfTheOdometryFrame) {
  std::mt19937_64 rng(36);
  const oracle::PlantedSequence c = oracle::MakePlantedSequence(40, Transform2D(-6., 8., -2.), 0.3, &rng);
  SequenceMatchParams params;
  params.window_w = 40;
  const SequenceAlignment a = AlignSequences(c.track, c.i, c.j, params, {});
  const Pose2D frame(123., -45., 2.5);
  std::vector<Pose2D> moved;
  for (const Pose2D& p : c.track.poses()) {
    moved.push_back(Compose(frame, Transform2D(p.x(), p.y(), p.theta())));
  }
  const SequenceAlignment b =
      AlignSequences(c.track.WithPoses(moved), c.i, c.j, params, {});
  EXPECT_NEAR(a.transform.dx(), b.transform.dx(), 1e-9);
  EXPECT_NEAR(a.transform.dy(), b.transform.dy(), 1e-9);
  EXPECT_NEAR(NormalizeAngle(a.transform.dtheta() - b.transform.dtheta()), 0., 1e-9);
  EXPECT_NEAR(a.residual, b.residual, 1e-9);
}

TEST(AlignSequencesTest, SwappedRolesGiveInverseTransforms) {
  std::mt19937_64 rng(37);
  SequenceMatchParams params;
  params.window_w = 40;
  for (int trial = 0; trial < 10; ++trial) {
    const oracle::PlantedSequence c =
        oracle::MakePlantedSequence(40, Transform2D(4., 1., 0.3 * trial), 0.3, &rng);
    const SequenceAlignment ij = AlignSequences(c.track, c.i, c.j, params, {});
    const SequenceAlignment ji = AlignSequences(c.track, c.j, c.i, params, {});
    const Transform2D loop = Compose(ij.transform, ji.transform);
    EXPECT_LE(loop.translation().norm(), 2. * std::max(ij.residual, ji.residual));
  }
}

TEST(AlignSequencesTest, Errors) {
  std::mt19937_64 rng(38);
  const oracle::PlantedSequence c = oracle::MakePlantedSequence(20, Transform2D(1., 1., 0.), 0., &rng);
  SequenceMatchParams params;
  params.window_w = 20;
  EXPECT_THROW(AlignSequences(c.track, 3, c.j, params, {}), Error);
  // Every query in a window of unique APs misses the other window.
  std::vector<TrackEntry> entries;
  for (int n = 0; n < 30; ++n) {
    entries.push_back({Pose2D(n * 1., 0., 0.), SingleAp(n * 2., "u" + std::to_string(n)), 0.});
  }
  const FingerprintTrack unique(WithDistances(std::move(entries)));
  params.window_w = 8;
  try {
    AlignSequences(unique, 5, 20, params, {});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientCorrespondences);
  }
}

TEST(RigidRotationTest, AlwaysProper) {
  std::mt19937_64 rng(39);
  std::normal_distribution<double> g(0., 1.);
  for (int n = 0; n < 2000; ++n) {
    Eigen::Matrix2d m;
    m << g(rng), g(rng), g(rng), g(rng);
    EXPECT_NEAR(RigidRotationFromCovariance(m).determinant(), 1., 1e-12);
  }
}

// A rectangular loop driven twice with noise-free RSS, so that fingerprints
// repeat exactly on the second lap.
Scenario TwoLapScenario(std::uint64_t seed, double odometry_noise_scale) {
  ScenarioConfig config;
  config.extent = {30., 60.};
  config.num_aps = 40;
  config.laps = 2.;
  config.noise.rss_noise_sigma = 0.;
  config.noise.odom_trans_noise *= odometry_noise_scale;
  config.noise.odom_rot_noise *= odometry_noise_scale;
  config.noise.odom_drift_bias *= odometry_noise_scale;
  return GenerateScenario(config, seed);
}

TEST(DetectLoopClosuresTest, StraightLineHasNoClosures) {
  std::vector<TrackEntry> entries;
  for (int n = 0; n < 300; ++n) {
    std::map<std::string, double> readings;
    for (int k = n - 3; k <= n + 3; ++k) readings["ap" + std::to_string(k)] = -50. - std::abs(k - n);
    entries.push_back({Pose2D(n * 0.8, 0., 0.), Fingerprint(n * 2., readings), 0.});
  }
  const FingerprintTrack track(WithDistances(std::move(entries)));
  SimilarityParams similarity;
  similarity.mode = SimilarityMode::kGeometricMean;
  const LoopDetectionResult result = DetectWifiLoopClosures(track, {}, similarity);
  EXPECT_TRUE(result.closures.empty());
  EXPECT_GT(result.diagnostics.pairs_considered, 0);
}

TEST(DetectLoopClosuresTest, RepeatedLoopClosesAcrossLaps) {
  const Scenario scenario = TwoLapScenario(41, 0.5);
  const FingerprintTrack track =
      FingerprintTrack::FromOdometry(scenario.odometry, scenario.fingerprints);
  SimilarityParams similarity;
  similarity.mode = SimilarityMode::kGeometricMean;
  const LoopDetectionResult result = DetectWifiLoopClosures(track, {}, similarity);
  ASSERT_FALSE(result.closures.empty());
  const int lap_nodes = track.size() / 2;
  const LoopClosure* best = nullptr;
  for (const LoopClosure& c : result.closures) {
    EXPECT_GE(track.AccumulatedDistance(c.node_i, c.node_j), 50.);
    EXPECT_LT(c.node_j, lap_nodes);
    EXPECT_GE(c.node_i, lap_nodes);
    EXPECT_LT(c.residual, 3.);
    EXPECT_EQ(c.source, ClosureSource::kWifiSequence);
    if (best == nullptr || c.residual < best->residual) best = &c;
  }
  // Windows clamped near the start of the track still pass the 3 m residual
  // gate with metre-level bias; the best-fitting closure is the accurate one.
  const Pose2D gi = InterpolatePose(scenario.ground_truth, track.timestamp(best->node_i));
  const Pose2D gj = InterpolatePose(scenario.ground_truth, track.timestamp(best->node_j));
  EXPECT_LE(TranslationError(best->transform, Relative(gj, gi)), 0.5)
      << best->node_i << " " << best->node_j;
}

TEST(DetectLoopClosuresTest, DeterministicSortedPrunedAndAccounted) {
  const Scenario scenario = TwoLapScenario(42, 1.);
  const FingerprintTrack track =
      FingerprintTrack::FromOdometry(scenario.odometry, scenario.fingerprints);
  SimilarityParams similarity;
  similarity.mode = SimilarityMode::kGeometricMean;
  SequenceMatchParams params;
  params.window_w = 40;
  const LoopDetectionResult a = DetectWifiLoopClosures(track, params, similarity);
  const LoopDetectionResult b = DetectWifiLoopClosures(track, params, similarity);
  ASSERT_EQ(a.closures.size(), b.closures.size());
  ASSERT_FALSE(a.closures.empty());
  for (std::size_t n = 0; n < a.closures.size(); ++n) {
    EXPECT_EQ(a.closures[n].node_i, b.closures[n].node_i);
    EXPECT_EQ(a.closures[n].node_j, b.closures[n].node_j);
    EXPECT_EQ(a.closures[n].transform.dx(), b.closures[n].transform.dx());
    EXPECT_EQ(a.closures[n].residual, b.closures[n].residual);
    if (n > 0) {
      const auto& p = a.closures[n - 1];
      const auto& q = a.closures[n];
      EXPECT_TRUE(p.node_i < q.node_i || (p.node_i == q.node_i && p.node_j < q.node_j));
    }
    for (std::size_t m = 0; m < n; ++m) {
      const bool near_i = std::abs(a.closures[n].node_i - a.closures[m].node_i) < 10;
      const bool near_j = std::abs(a.closures[n].node_j - a.closures[m].node_j) < 10;
      EXPECT_FALSE(near_i && near_j);
    }
  }
  const auto& d = a.diagnostics;
  EXPECT_GE(d.pairs_considered, d.pairs_similarity_gate);
  EXPECT_EQ(d.pairs_similarity_gate, d.pairs_pruned + d.alignments_failed +
                                         d.closures_rejected + d.closures_accepted);
  EXPECT_EQ(d.closures_accepted, static_cast<long>(a.closures.size()));
  long histogram = 0;
  for (long count : d.residual_histogram) histogram += count;
  EXPECT_EQ(histogram, d.closures_rejected + d.closures_accepted);
}

TEST(SimilarityTableTest, MatchesDirectEvaluationBitForBit) {
  const Scenario scenario = TwoLapScenario(43, 1.);
  const FingerprintTrack track =
      FingerprintTrack::FromOdometry(scenario.odometry, scenario.fingerprints);
  for (SimilarityMode mode : {SimilarityMode::kLiteral, SimilarityMode::kGeometricMean}) {
    SimilarityParams params;
    params.mode = mode;
    const SimilarityTable table(track, params);
    for (int a = 0; a < track.size(); a += 7) {
      for (int b = 0; b < track.size(); b += 3) {
        EXPECT_EQ(table(a, b), Similarity(track[a].fingerprint, track[b].fingerprint, params));
      }
    }
  }
}

}  // namespace
}  // namespace wlslam
