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


#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "wlslam/pose_graph.h"

namespace wlslam::oracle {

double PatternSearch(const std::function<double(const Eigen::VectorXd&)>& f,
                     double initial_step, double min_step, Eigen::VectorXd* x) {
  double best = f(*x);
  double step = initial_step;
  while (step >= min_step) {
    bool improved = false;
    for (int d = 0; d < x->size(); ++d) {
      for (double sign : {1., -1.}) {
        Eigen::VectorXd probe = *x;
        probe[d] += sign * step;
        const double value = f(probe);
        if (value < best) {
          best = value;
          *x = probe;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

double RigidCost(const Transform2D& t, std::span<const Eigen::Vector2d> source,
                 std::span<const Eigen::Vector2d> target) {
  const double c = std::cos(t.dtheta());
  const double s = std::sin(t.dtheta());
  double sum = 0.;
  for (std::size_t n = 0; n < source.size(); ++n) {
    const double x = c * source[n].x() - s * source[n].y() + t.dx();
    const double y = s * source[n].x() + c * source[n].y() + t.dy();
    sum += (x - target[n].x()) * (x - target[n].x()) +
           (y - target[n].y()) * (y - target[n].y());
  }
  return sum;
}

Transform2D GridSearchRigid(std::span<const Eigen::Vector2d> source,
                            std::span<const Eigen::Vector2d> target,
                            double translation_range) {
  double center_x = 0., center_y = 0., center_theta = 0.;
  double half_xy = translation_range;
  double half_theta = kPi;
  int steps_xy = 41;
  int steps_theta = 73;
  double best = std::numeric_limits<double>::infinity();
  for (int level = 0; level < 60; ++level) {
    const double step_xy = 2. * half_xy / (steps_xy - 1);
    const double step_theta = 2. * half_theta / (steps_theta - 1);
    double next_x = center_x, next_y = center_y, next_theta = center_theta;
    for (int a = 0; a < steps_xy; ++a) {
      const double x = center_x - half_xy + a * step_xy;
      for (int b = 0; b < steps_xy; ++b) {
        const double y = center_y - half_xy + b * step_xy;
        for (int c = 0; c < steps_theta; ++c) {
          const double theta = center_theta - half_theta + c * step_theta;
          const double cost = RigidCost(Transform2D(x, y, theta), source, target);
          if (cost < best) {
            best = cost;
            next_x = x;
            next_y = y;
            next_theta = theta;
          }
        }
      }
    }
    center_x = next_x;
    center_y = next_y;
    center_theta = next_theta;
    half_xy = 2. * step_xy;
    half_theta = 2. * step_theta;
    steps_xy = 9;
    steps_theta = 9;
    if (half_xy < 1e-13 && half_theta < 1e-13) break;
  }
  Eigen::VectorXd x(3);
  x << center_x, center_y, center_theta;
  PatternSearch(
      [&](const Eigen::VectorXd& v) {
        return RigidCost(Transform2D(v[0], v[1], v[2]), source, target);
      },
      1e-6, 1e-14, &x);
  return Transform2D(x[0], x[1], x[2]);
}

double BruteForceRayCast(std::span<const Segment> walls,
                         const Eigen::Vector2d& origin, double angle,
                         double range_max) {
  const double ux = std::cos(angle);
  const double uy = std::sin(angle);
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& segment : walls) {
    // origin + t u = a + s (b - a), solved for (t, s).
    const double ex = segment.b.x() - segment.a.x();
    const double ey = segment.b.y() - segment.a.y();
    const double rx = segment.a.x() - origin.x();
    const double ry = segment.a.y() - origin.y();
    const double det = ux * (-ey) - (-ex) * uy;
    if (std::abs(det) < 1e-15) continue;
    const double t = (rx * (-ey) - (-ex) * ry) / det;
    const double s = (ux * ry - uy * rx) / det;
    if (t > 1e-9 && s >= 0. && s <= 1. && t < best) best = t;
  }
  return best <= range_max ? best : std::numeric_limits<double>::infinity();
}

namespace {

void AddBox(double x0, double y0, double x1, double y1,
            std::vector<Segment>* out) {
  out->push_back({{x0, y0}, {x1, y0}});
  out->push_back({{x1, y0}, {x1, y1}});
  out->push_back({{x1, y1}, {x0, y1}});
  out->push_back({{x0, y1}, {x0, y0}});
}

}  // namespace

std::vector<Segment> FurnishedRoom(double width, double height) {
  std::vector<Segment> segments;
  const double hx = 0.5 * width;
  const double hy = 0.5 * height;
  AddBox(-hx, -hy, hx, hy, &segments);
  AddBox(-hx + 0.5, -hy + 0.5, -hx + 1.7, -hy + 1.1, &segments);
  AddBox(hx - 1.4, hy - 2.2, hx - 0.6, hy - 0.9, &segments);
  AddBox(0.6, -0.4, 1.1, 0.3, &segments);
  segments.push_back({{-hx + 1.0, hy - 0.8}, {-hx + 2.6, hy - 2.0}});
  return segments;
}

LaserScan OutlineScan(std::span<const Segment> segments, double spacing) {
  LaserScan scan;
  for (const Segment& segment : segments) {
    const double length = (segment.b - segment.a).norm();
    const int count = std::max(1, static_cast<int>(std::floor(length / spacing)));
    for (int k = 0; k < count; ++k) {
      const double u = (k + 0.5) / count;
      scan.points.push_back(segment.a + u * (segment.b - segment.a));
    }
  }
  double max_norm = 0.;
  for (const Eigen::Vector2d& p : scan.points) {
    max_norm = std::max(max_norm, p.norm());
  }
  scan.max_range = max_norm + 1.;
  return scan;
}

LaserScan TransformScan(const LaserScan& scan, const Transform2D& t) {
  LaserScan out = scan;
  for (Eigen::Vector2d& p : out.points) p = Apply(t, p);
  return out;
}

int BruteForceNearest(std::span<const Eigen::Vector2d> points,
                      const Eigen::Vector2d& query,
                      double max_squared_distance) {
  int best = -1;
  double best_squared = max_squared_distance;
  for (std::size_t n = 0; n < points.size(); ++n) {
    const double d = (points[n] - query).squaredNorm();
    if (d <= best_squared && (best < 0 || d < best_squared)) {
      best = static_cast<int>(n);
      best_squared = d;
    }
  }
  return best;
}

Fingerprint SingleAp(double timestamp, const std::string& ap, double rss) {
  return Fingerprint(timestamp, std::map<std::string, double>{{ap, rss}});
}

std::vector<TrackEntry> WithDistances(std::vector<TrackEntry> entries) {
  double distance = 0.;
  for (std::size_t n = 0; n < entries.size(); ++n) {
    if (n > 0) {
      distance += (entries[n].pose.translation() -
                   entries[n - 1].pose.translation())
                      .norm();
    }
    entries[n].cumulative_distance = distance;
  }
  return entries;
}

PlantedSequence MakePlantedSequence(int window_w, const Transform2D& planted,
                                    double noise_sigma, std::mt19937_64* rng) {
  const int count = window_w + 1;
  const int center = window_w / 2;
  std::normal_distribution<double> turn(0., 0.3);
  std::normal_distribution<double> noise(0., 1.);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  std::vector<Eigen::Vector2d> locations;
  Eigen::Vector2d p(0., 0.);
  double direction = heading(*rng);
  for (int n = 0; n < count; ++n) {
    locations.push_back(p);
    direction += turn(*rng);
    p += 0.8 * Eigen::Vector2d(std::cos(direction), std::sin(direction));
  }
  const Pose2D x_i(locations[center], heading(*rng));
  const Pose2D x_j = Compose(x_i, planted.inverse());

  std::vector<TrackEntry> entries;
  double t = 0.;
  for (int n = 0; n < count; ++n) {
    const Pose2D pose = n == center ? x_i : Pose2D(locations[n], heading(*rng));
    entries.push_back({pose, SingleAp(t += 2., "loc" + std::to_string(n)), 0.});
  }
  for (int n = 0; n < count; ++n) {
    if (n == center) {
      entries.push_back({x_j, SingleAp(t += 2., "centre"), 0.});
      continue;
    }
    const Eigen::Vector2d jitter(noise(*rng), noise(*rng));
    entries.push_back({Pose2D(locations[n] + noise_sigma * jitter, heading(*rng)),
                       SingleAp(t += 2., "loc" + std::to_string(n)), 0.});
  }
  return {FingerprintTrack(WithDistances(std::move(entries))), center,
          count + center, planted};
}

double WorstJacobianError(int edges, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> position(-20., 20.);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  constexpr double kStep = 1e-6;
  double worst = 0.;
  for (int trial = 0; trial < edges; ++trial) {
    const Eigen::Vector3d xi(position(rng), position(rng), angle(rng));
    const Eigen::Vector3d xj(position(rng), position(rng), angle(rng));
    // A measurement near the prediction keeps the angle residual away from
    // the wrap point, where it is not differentiable.
    const Transform2D predicted =
        Relative(Pose2D(xi[0], xi[1], xi[2]), Pose2D(xj[0], xj[1], xj[2]));
    GraphEdge edge;
    edge.measurement = Transform2D(predicted.dx() + 0.3, predicted.dy() - 0.2,
                                   predicted.dtheta() + 0.4);
    Eigen::Matrix3d ji, jj;
    EdgeJacobians(edge, Pose2D(xi[0], xi[1], xi[2]), Pose2D(xj[0], xj[1], xj[2]),
                  &ji, &jj);
    for (int side = 0; side < 2; ++side) {
      for (int d = 0; d < 3; ++d) {
        Eigen::Vector3d plus_i = xi, minus_i = xi, plus_j = xj, minus_j = xj;
        Eigen::Vector3d& plus = side == 0 ? plus_i : plus_j;
        Eigen::Vector3d& minus = side == 0 ? minus_i : minus_j;
        plus[d] += kStep;
        minus[d] -= kStep;
        const Eigen::Vector3d rp =
            EdgeResidual(edge, Pose2D(plus_i[0], plus_i[1], plus_i[2]),
                         Pose2D(plus_j[0], plus_j[1], plus_j[2]));
        const Eigen::Vector3d rm =
            EdgeResidual(edge, Pose2D(minus_i[0], minus_i[1], minus_i[2]),
                         Pose2D(minus_j[0], minus_j[1], minus_j[2]));
        Eigen::Vector3d fd = (rp - rm) / (2. * kStep);
        fd.z() = NormalizeAngle(rp.z() - rm.z()) / (2. * kStep);
        const Eigen::Vector3d analytic = side == 0 ? ji.col(d) : jj.col(d);
        for (int row = 0; row < 3; ++row) {
          worst = std::max(worst, std::abs(analytic[row] - fd[row]) /
                                      std::max(1., std::abs(fd[row])));
        }
      }
    }
  }
  return worst;
}

}  // namespace wlslam::oracle
