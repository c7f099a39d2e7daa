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

#include "wlslam/pose_graph.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "Eigen/Cholesky"
#include "Eigen/Sparse"
#include "Eigen/SparseCholesky"
#include "wlslam/errors.h"

namespace wlslam {
namespace {

constexpr double kMaxLambda = 1e12;
constexpr double kMinLambda = 1e-12;

void CheckInformation(const Eigen::Matrix3d& information) {
  if (!information.allFinite() ||
      (information - information.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "information matrix is not symmetric");
  }
  Eigen::LLT<Eigen::Matrix3d> llt(information);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "information matrix is not positive definite");
  }
}

double Chi2Of(const std::vector<GraphEdge>& edges,
              const std::vector<Pose2D>& poses) {
  double chi2 = 0.;
  for (const GraphEdge& edge : edges) {
    const Eigen::Vector3d r = EdgeResidual(edge, poses[edge.from], poses[edge.to]);
    chi2 += r.dot(edge.information * r);
  }
  return chi2;
}

EdgeKind ParseKind(const std::string& token, const std::string& context) {
  for (EdgeKind kind : {EdgeKind::kOdometry, EdgeKind::kWifiLoop,
                        EdgeKind::kIcpProximity, EdgeKind::kIcpLoop}) {
    if (token == EdgeKindName(kind)) return kind;
  }
  throw Error(ErrorCode::kParse, context + ": unknown edge kind '" + token + "'");
}

}  // namespace

const char* EdgeKindName(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kOdometry: return "odometry";
    case EdgeKind::kWifiLoop: return "wifi_loop";
    case EdgeKind::kIcpProximity: return "icp_proximity";
    case EdgeKind::kIcpLoop: return "icp_loop";
  }
  return "unknown";
}

EdgeKind EdgeKindFromClosureSource(ClosureSource source) {
  switch (source) {
    case ClosureSource::kWifiSequence: return EdgeKind::kWifiLoop;
    case ClosureSource::kIcpProximity: return EdgeKind::kIcpProximity;
    case ClosureSource::kIcpLoop: return EdgeKind::kIcpLoop;
  }
  return EdgeKind::kWifiLoop;
}

const Eigen::Matrix3d& InformationDefaults::For(EdgeKind kind) const {
  switch (kind) {
    case EdgeKind::kOdometry: return odometry;
    case EdgeKind::kWifiLoop: return wifi_loop;
    case EdgeKind::kIcpProximity:
    case EdgeKind::kIcpLoop: return icp;
  }
  return odometry;
}

int PoseGraph::AddNode(const Pose2D& pose, double timestamp) {
  const int id = num_nodes();
  nodes_.push_back({id, pose, timestamp});
  return id;
}

void PoseGraph::AddEdge(const GraphEdge& edge) {
  if (edge.from < 0 || edge.from >= num_nodes() || edge.to < 0 ||
      edge.to >= num_nodes()) {
    throw Error(ErrorCode::kInvalidInput,
                "edge references unknown node (" + std::to_string(edge.from) +
                    ", " + std::to_string(edge.to) + ")");
  }
  if (edge.from == edge.to) {
    throw Error(ErrorCode::kInvalidInput,
                "edge connects node " + std::to_string(edge.from) + " to itself");
  }
  CheckInformation(edge.information);
  if (!edge_keys_.emplace(edge.from, edge.to, edge.kind).second) {
    throw Error(ErrorCode::kDuplicateEdge,
                std::string("duplicate ") + EdgeKindName(edge.kind) + " edge " +
                    std::to_string(edge.from) + " -> " + std::to_string(edge.to));
  }
  edges_.push_back(edge);
}

std::vector<Pose2D> PoseGraph::poses() const {
  std::vector<Pose2D> result;
  result.reserve(nodes_.size());
  for (const GraphNode& node : nodes_) result.push_back(node.pose);
  return result;
}

double PoseGraph::Chi2() const { return Chi2Of(edges_, poses()); }

std::vector<int> PoseGraph::UnreachableNodes() const {
  if (nodes_.empty()) return {};
  std::vector<std::vector<int>> adjacency(nodes_.size());
  for (const GraphEdge& edge : edges_) {
    adjacency[edge.from].push_back(edge.to);
    adjacency[edge.to].push_back(edge.from);
  }
  std::vector<bool> seen(nodes_.size(), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  while (!frontier.empty()) {
    const int n = frontier.front();
    frontier.pop();
    for (int m : adjacency[n]) {
      if (!seen[m]) {
        seen[m] = true;
        frontier.push(m);
      }
    }
  }
  std::vector<int> unreachable;
  for (std::size_t n = 0; n < seen.size(); ++n) {
    if (!seen[n]) unreachable.push_back(static_cast<int>(n));
  }
  return unreachable;
}

PoseGraph BuildGraph(const FingerprintTrack& track,
                     std::span<const LoopClosure> closures,
                     const InformationDefaults& information) {
  PoseGraph graph;
  for (int n = 0; n < track.size(); ++n) {
    graph.AddNode(track[n].pose, track.timestamp(n));
  }
  for (int n = 0; n + 1 < track.size(); ++n) {
    graph.AddEdge({n, n + 1, Relative(track[n].pose, track[n + 1].pose),
                   information.odometry, EdgeKind::kOdometry});
  }
  AddClosures(closures, information, &graph);
  return graph;
}

void AddClosures(std::span<const LoopClosure> closures,
                 const InformationDefaults& information, PoseGraph* graph) {
  for (const LoopClosure& closure : closures) {
    const EdgeKind kind = EdgeKindFromClosureSource(closure.source);
    graph->AddEdge({closure.node_j, closure.node_i, closure.transform,
                    information.For(kind), kind});
  }
}

Eigen::Vector3d EdgeResidual(const GraphEdge& edge, const Pose2D& xi,
                             const Pose2D& xj) {
  const Transform2D predicted = Relative(xi, xj);
  return {edge.measurement.dx() - predicted.dx(),
          edge.measurement.dy() - predicted.dy(),
          NormalizeAngle(edge.measurement.dtheta() - predicted.dtheta())};
}

void EdgeJacobians(const GraphEdge& /*edge*/, const Pose2D& xi,
                   const Pose2D& xj, Eigen::Matrix3d* jacobian_i,
                   Eigen::Matrix3d* jacobian_j) {
  const double c = std::cos(xi.theta());
  const double s = std::sin(xi.theta());
  const Eigen::Vector2d delta = xj.translation() - xi.translation();
  Eigen::Matrix2d rotation_t;
  rotation_t << c, s, -s, c;
  Eigen::Matrix2d d_rotation_t;
  d_rotation_t << -s, c, -c, -s;

  jacobian_i->setZero();
  jacobian_i->topLeftCorner<2, 2>() = rotation_t;
  jacobian_i->block<2, 1>(0, 2) = -d_rotation_t * delta;
  (*jacobian_i)(2, 2) = 1.;

  jacobian_j->setZero();
  jacobian_j->topLeftCorner<2, 2>() = -rotation_t;
  (*jacobian_j)(2, 2) = -1.;
}

OptimizationResult Optimize(const PoseGraph& graph,
                            const OptimizerConfig& config) {
  if (config.max_iterations <= 0 || !(config.convergence_delta > 0.) ||
      !(config.initial_lambda > 0.) || !(config.lambda_factor > 1.)) {
    throw Error(ErrorCode::kInvalidInput, "invalid optimizer configuration");
  }
  const std::vector<int> unreachable = graph.UnreachableNodes();
  if (!unreachable.empty()) {
    std::string list;
    for (std::size_t n = 0; n < unreachable.size() && n < 20; ++n) {
      list += (n ? ", " : "") + std::to_string(unreachable[n]);
    }
    if (unreachable.size() > 20) list += ", ...";
    throw Error(ErrorCode::kDisconnectedGraph,
                "nodes not connected to node 0: " + list);
  }

  OptimizationResult result;
  result.graph = graph;
  std::vector<Pose2D> poses = graph.poses();
  const auto& edges = graph.edges();
  double chi2 = Chi2Of(edges, poses);
  if (!std::isfinite(chi2)) {
    throw Error(ErrorCode::kNumericalFailure, "initial chi2 is not finite");
  }
  result.chi2_history.push_back(chi2);
  const int num_free = graph.num_nodes() - 1;
  if (chi2 == 0. || num_free <= 0) {
    result.converged = true;
    return result;
  }

  const int dimension = 3 * num_free;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 36);
  Eigen::SparseMatrix<double> hessian(dimension, dimension);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool pattern_ready = false;
  double lambda = config.initial_lambda;

  for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
    triplets.clear();
    Eigen::VectorXd gradient = Eigen::VectorXd::Zero(dimension);
    for (const GraphEdge& edge : edges) {
      const Pose2D& xi = poses[edge.from];
      const Pose2D& xj = poses[edge.to];
      const Eigen::Vector3d r = EdgeResidual(edge, xi, xj);
      Eigen::Matrix3d jacobians[2];
      EdgeJacobians(edge, xi, xj, &jacobians[0], &jacobians[1]);
      const int blocks[2] = {edge.from - 1, edge.to - 1};
      for (int a = 0; a < 2; ++a) {
        if (blocks[a] < 0) continue;
        const Eigen::Matrix<double, 3, 3> jt_omega =
            jacobians[a].transpose() * edge.information;
        gradient.segment<3>(3 * blocks[a]) += jt_omega * r;
        for (int b = 0; b < 2; ++b) {
          if (blocks[b] < 0) continue;
          const Eigen::Matrix3d block = jt_omega * jacobians[b];
          for (int row = 0; row < 3; ++row) {
            for (int col = 0; col < 3; ++col) {
              triplets.emplace_back(3 * blocks[a] + row, 3 * blocks[b] + col,
                                    block(row, col));
            }
          }
        }
      }
    }
    hessian.setFromTriplets(triplets.begin(), triplets.end());
    if (!pattern_ready) {
      solver.analyzePattern(hessian);
      pattern_ready = true;
    }
    const Eigen::VectorXd diagonal = hessian.diagonal();

    bool accepted = false;
    while (lambda <= kMaxLambda) {
      Eigen::SparseMatrix<double> damped = hessian;
      for (int d = 0; d < dimension; ++d) {
        damped.coeffRef(d, d) += lambda * diagonal[d];
      }
      solver.factorize(damped);
      if (solver.info() == Eigen::Success) {
        const Eigen::VectorXd step = solver.solve(-gradient);
        if (solver.info() == Eigen::Success && step.allFinite()) {
          std::vector<Pose2D> candidate = poses;
          for (int n = 1; n <= num_free; ++n) {
            const Pose2D& p = poses[n];
            candidate[n] = Pose2D(p.x() + step[3 * (n - 1)],
                                  p.y() + step[3 * (n - 1) + 1],
                                  p.theta() + step[3 * (n - 1) + 2]);
          }
          const double candidate_chi2 = Chi2Of(edges, candidate);
          if (std::isfinite(candidate_chi2) && candidate_chi2 < chi2) {
            const double relative_decrease = (chi2 - candidate_chi2) / chi2;
            poses = std::move(candidate);
            chi2 = candidate_chi2;
            result.chi2_history.push_back(chi2);
            lambda = std::max(kMinLambda, lambda / config.lambda_factor);
            accepted = true;
            if (relative_decrease < config.convergence_delta) {
              result.converged = true;
            }
            break;
          }
        }
      }
      lambda *= config.lambda_factor;
    }
    if (!accepted) {
      // No damping level lowers chi²: a (local) minimum.
      result.converged = true;
      break;
    }
    ++result.iterations;
    if (result.converged || chi2 == 0.) {
      result.converged = true;
      break;
    }
  }
  if (!std::isfinite(chi2)) {
    throw Error(ErrorCode::kNumericalFailure, "optimizer diverged");
  }
  for (int n = 0; n < graph.num_nodes(); ++n) result.graph.SetPose(n, poses[n]);
  return result;
}

void WriteGraph(const PoseGraph& graph, std::ostream& out) {
  char buffer[512];
  for (const GraphNode& node : graph.nodes()) {
    std::snprintf(buffer, sizeof(buffer), "VERTEX_SE2 %d %.9f %.9f %.9f\n",
                  node.id, node.pose.x(), node.pose.y(), node.pose.theta());
    out << buffer;
  }
  for (const GraphEdge& edge : graph.edges()) {
    const Eigen::Matrix3d& m = edge.information;
    std::snprintf(buffer, sizeof(buffer),
                  "EDGE_SE2 %d %d %.9f %.9f %.9f %.9g %.9g %.9g %.9g %.9g "
                  "%.9g %s\n",
                  edge.from, edge.to, edge.measurement.dx(),
                  edge.measurement.dy(), edge.measurement.dtheta(), m(0, 0),
                  m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2),
                  EdgeKindName(edge.kind));
    out << buffer;
  }
}

PoseGraph ReadGraph(std::istream& in, const std::string& name) {
  PoseGraph graph;
  std::string line;
  int line_number = 0;
  std::vector<GraphEdge> edges;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string context = name + ":" + std::to_string(line_number);
    std::stringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "VERTEX_SE2") {
      int id;
      double x, y, theta;
      if (!(ss >> id >> x >> y >> theta)) {
        throw Error(ErrorCode::kParse, context + ": malformed VERTEX_SE2");
      }
      if (id != graph.num_nodes()) {
        throw Error(ErrorCode::kParse, context + ": vertex ids must be dense and ordered");
      }
      graph.AddNode(Pose2D(x, y, theta), 0.);
    } else if (tag == "EDGE_SE2") {
      GraphEdge edge;
      double dx, dy, dtheta, i11, i12, i13, i22, i23, i33;
      if (!(ss >> edge.from >> edge.to >> dx >> dy >> dtheta >> i11 >> i12 >>
            i13 >> i22 >> i23 >> i33)) {
        throw Error(ErrorCode::kParse, context + ": malformed EDGE_SE2");
      }
      edge.measurement = Transform2D(dx, dy, dtheta);
      edge.information << i11, i12, i13, i12, i22, i23, i13, i23, i33;
      std::string kind;
      if (ss >> kind) {
        edge.kind = ParseKind(kind, context);
      } else {
        edge.kind = edge.to == edge.from + 1 ? EdgeKind::kOdometry
                                             : EdgeKind::kWifiLoop;
      }
      edges.push_back(edge);
    } else {
      throw Error(ErrorCode::kParse, context + ": unknown record '" + tag + "'");
    }
  }
  for (const GraphEdge& edge : edges) graph.AddEdge(edge);
  return graph;
}

}  // namespace wlslam
