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

#ifndef WLSLAM_POSE_GRAPH_H_
#define WLSLAM_POSE_GRAPH_H_

#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "Eigen/Core"
#include "wlslam/geometry.h"
#include "wlslam/sequence_loop.h"

namespace wlslam {

enum class EdgeKind { kOdometry, kWifiLoop, kIcpProximity, kIcpLoop };

const char* EdgeKindName(EdgeKind kind);
EdgeKind EdgeKindFromClosureSource(ClosureSource source);

struct GraphNode {
  int id = 0;
  Pose2D pose;
  double timestamp = 0.;
};

// Constraint z_ij: the pose of node `to` measured in the frame of node
// `from`, weighted by `information` (inverse covariance).
struct GraphEdge {
  int from = 0;
  int to = 0;
  Transform2D measurement;
  Eigen::Matrix3d information = Eigen::Matrix3d::Identity();
  EdgeKind kind = EdgeKind::kOdometry;
};

// Information matrices assigned per constraint kind.
struct InformationDefaults {
  Eigen::Matrix3d odometry = Eigen::Vector3d(20., 20., 100.).asDiagonal();
  Eigen::Matrix3d wifi_loop = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d icp = Eigen::Vector3d(50., 50., 200.).asDiagonal();

  const Eigen::Matrix3d& For(EdgeKind kind) const;
};

class PoseGraph {
 public:
  int AddNode(const Pose2D& pose, double timestamp);
  // Throws kInvalidInput for unknown ids or from == to, kNotPositiveDefinite
  // for an information matrix that is not symmetric positive definite, and
  // kDuplicateEdge when (from, to, kind) already exists.
  void AddEdge(const GraphEdge& edge);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  void SetPose(int id, const Pose2D& pose) { nodes_.at(id).pose = pose; }
  std::vector<Pose2D> poses() const;

  // Sum over edges of r^T Ω r.
  double Chi2() const;

  // Ids of nodes not connected to node 0 through any edge.
  std::vector<int> UnreachableNodes() const;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::set<std::tuple<int, int, EdgeKind>> edge_keys_;
};

// One node per track entry, odometry edges between consecutive entries with
// the odometric relative pose as measurement, and one edge per closure from
// node_j to node_i.
PoseGraph BuildGraph(const FingerprintTrack& track,
                     std::span<const LoopClosure> closures,
                     const InformationDefaults& information = {});

// Adds closures as edges to an existing graph.
void AddClosures(std::span<const LoopClosure> closures,
                 const InformationDefaults& information, PoseGraph* graph);

// r = z - ẑ(xi, xj) with ẑ = xi⁻¹xj, the angle wrapped to (-pi, pi].
Eigen::Vector3d EdgeResidual(const GraphEdge& edge, const Pose2D& xi,
                             const Pose2D& xj);

// Derivatives of EdgeResidual() with respect to (x, y, theta) of xi and xj.
void EdgeJacobians(const GraphEdge& edge, const Pose2D& xi, const Pose2D& xj,
                   Eigen::Matrix3d* jacobian_i, Eigen::Matrix3d* jacobian_j);

struct OptimizerConfig {
  int max_iterations = 100;
  double convergence_delta = 1e-6;
  double initial_lambda = 1e-4;
  double lambda_factor = 10.;
};

struct OptimizationResult {
  PoseGraph graph;
  // chi² of the input followed by chi² after every accepted step.
  std::vector<double> chi2_history;
  int iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt on the sum of squared weighted residuals. Node 0 is held
// fixed. Each iteration solves (H + λ diag(H)) δ = -g with a sparse LDLᵀ
// factorization; steps that do not lower chi² are rejected and λ grows.
// Throws kDisconnectedGraph naming unreachable nodes and kNumericalFailure if
// the solve breaks down.
OptimizationResult Optimize(const PoseGraph& graph,
                            const OptimizerConfig& config = {});

// VERTEX_SE2 id x y theta
// EDGE_SE2 from to dx dy dtheta i11 i12 i13 i22 i23 i33 [kind]
void WriteGraph(const PoseGraph& graph, std::ostream& out);
PoseGraph ReadGraph(std::istream& in, const std::string& name);

}  // namespace wlslam

#endif  // WLSLAM_POSE_GRAPH_H_
