// Copyright 2026 The novelbox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "novelbox/cost.hpp"

#include <algorithm>
#include <cmath>

#include "novelbox/errors.hpp"

namespace novelbox::cost {

namespace {

// Top edges as corner index pairs; edge k and edge k + 2 are parallel.
constexpr std::array<std::array<int, 2>, 4> kTopEdges = {{{4, 5}, {5, 6}, {6, 7}, {7, 4}}};

void require_points(std::span<const Point3> obj_points) {
  if (obj_points.empty()) throw ValidationError("object point set is empty");
}

// Picks the nearest edge and its nearer perpendicular neighbour given the
// four midpoint distances.
std::array<int, 2> pick_edges(const std::array<double, 4>& midpoint_dist) {
  int first = 0;
  for (int k = 1; k < 4; ++k) {
    if (midpoint_dist[k] < midpoint_dist[first]) first = k;
  }
  const int a = (first + 1) % 4;
  const int b = (first + 3) % 4;
  const int second = (midpoint_dist[b] < midpoint_dist[a] || (midpoint_dist[b] == midpoint_dist[a] && b < a)) ? b : a;
  return {first, second};
}

}  // namespace

void CostWeights::validate() const {
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda3 >= 0.0 && gamma >= 0.0)) {
    throw ValidationError("cost weights must be non-negative");
  }
  if (c_surface && !(*c_surface > 0.0)) throw ValidationError("c_surface must be positive");
}

void AnchorRange::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(dims_min[i] > 0.0) || !(dims_min[i] <= dims_max[i]) || !std::isfinite(dims_max[i])) {
      throw ValidationError("anchor '" + class_id + "': need 0 < dims_min <= dims_max");
    }
  }
}

AnchorEdges select_anchor_edges(const BoxParams& box, const EgoPose& ego) {
  const auto corners = geom::box_corners(box);
  const Point3 e = ego.position();
  std::array<double, 4> dist;
  for (int k = 0; k < 4; ++k) {
    const Point3 mid = 0.5 * (corners[kTopEdges[k][0]] + corners[kTopEdges[k][1]]);
    dist[k] = (mid - e).norm();
  }
  const auto picked = pick_edges(dist);
  return {{kTopEdges[picked[0]], kTopEdges[picked[1]]}};
}

double point_segment_distance(const Point3& p, const Point3& a, const Point3& b) {
  const Point3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double cost_density(const BoxParams& box, std::span<const Point3> obj_points) {
  require_points(obj_points);
  const auto inside = std::count_if(obj_points.begin(), obj_points.end(),
                                    [&](const Point3& p) { return geom::point_in_box(p, box); });
  return -static_cast<double>(inside) / static_cast<double>(obj_points.size());
}

double cost_lshape(const BoxParams& box, std::span<const Point3> obj_points, const EgoPose& ego) {
  require_points(obj_points);
  const auto corners = geom::box_corners(box);
  const auto anchor = select_anchor_edges(box, ego);
  double sum = 0.0;
  std::size_t inside = 0;
  for (const auto& p : obj_points) {
    if (!geom::point_in_box(p, box)) continue;
    ++inside;
    // Distances are planar: the anchoring edges act as 2D edges of the
    // footprint, so points anywhere on a visible face score zero.
    const Point3 flat(p.x(), p.y(), 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [i, j] : anchor.edges) {
      const Point3 a(corners[i].x(), corners[i].y(), 0.0);
      const Point3 b(corners[j].x(), corners[j].y(), 0.0);
      best = std::min(best, point_segment_distance(flat, a, b));
    }
    sum += best;
  }
  return inside == 0 ? 0.0 : sum / static_cast<double>(inside);
}

double cost_surface(const BoxParams& box, const EgoPose& ego, const CostWeights& weights) {
  if (!weights.c_surface) throw ValidationError("c_surface is unresolved");
  const double d = std::hypot(box.x - ego.x, box.y - ego.y);
  return -std::min(d, *weights.c_surface);
}

double cost_iou2d(const BoxParams& box, const Box2D& proposal, const CameraCalib& calib,
                  const CostWeights& weights) {
  const auto projected = geom::project_box_to_2d(box, calib);
  if (!projected) return 0.0;
  return -weights.gamma * geom::iou_2d(*projected, proposal);
}

CostBreakdown cost_total(const BoxParams& box, std::span<const Point3> obj_points,
                         const EgoPose& ego, const Box2D& proposal, const CameraCalib& calib,
                         const CostWeights& weights) {
  return BoxObjective(obj_points, ego, proposal, calib, weights).evaluate(box);
}

BoxParams clamp_to_constraints(const BoxParams& box, const AnchorRange& anchor) {
  BoxParams out = box;
  out.l = std::clamp(box.l, anchor.dims_min.x(), anchor.dims_max.x());
  out.w = std::clamp(box.w, anchor.dims_min.y(), anchor.dims_max.y());
  out.h = std::clamp(box.h, anchor.dims_min.z(), anchor.dims_max.z());
  out.ry = geom::wrap_yaw(box.ry);
  return out;
}

double default_c_surface(const Point3& cluster_centroid, const EgoPose& ego,
                         const AnchorRange& anchor) {
  const double d = std::hypot(cluster_centroid.x() - ego.x, cluster_centroid.y() - ego.y);
  return d + 0.5 * std::min(anchor.dims_min.x(), anchor.dims_min.y());
}

CostWeights resolve_weights(const CostWeights& weights, const Point3& cluster_centroid,
                            const EgoPose& ego, const AnchorRange& anchor) {
  CostWeights out = weights;
  if (!out.c_surface) out.c_surface = default_c_surface(cluster_centroid, ego, anchor);
  return out;
}

BoxObjective::BoxObjective(std::span<const Point3> obj_points, const EgoPose& ego,
                           const Box2D& proposal, CameraCalib calib, const CostWeights& weights)
    : ego_(ego), proposal_(proposal), calib_(std::move(calib)), weights_(weights) {
  require_points(obj_points);
  weights_.validate();
  if (!weights_.c_surface) throw ValidationError("c_surface is unresolved");
  xs_.reserve(obj_points.size());
  ys_.reserve(obj_points.size());
  zs_.reserve(obj_points.size());
  for (const auto& p : obj_points) {
    xs_.push_back(p.x());
    ys_.push_back(p.y());
    zs_.push_back(p.z());
  }
}

CostBreakdown BoxObjective::evaluate(const BoxParams& box) const {
  const double c = std::cos(box.ry);
  const double s = std::sin(box.ry);
  const double hl = 0.5 * box.l;
  const double hw = 0.5 * box.w;
  const double hh = 0.5 * box.h;
  const double tol = geom::kInsideTolerance;

  // Anchor edges in the box frame. Edge k runs between top corners; the
  // midpoints are (0, +hw), (-hl, 0), (0, -hw), (+hl, 0) at height +hh.
  const Point3 ego_local = geom::to_box_frame(ego_.position(), box);
  const std::array<Point3, 4> mids = {Point3(0, hw, hh), Point3(-hl, 0, hh), Point3(0, -hw, hh),
                                      Point3(hl, 0, hh)};
  std::array<double, 4> mid_dist;
  for (int k = 0; k < 4; ++k) mid_dist[k] = (mids[k] - ego_local).norm();
  const auto picked = pick_edges(mid_dist);

  // Squared planar distance to top edge k for a point in the box frame.
  const auto edge_dist2 = [&](int k, double lx, double ly) {
    if (k % 2 == 0) {  // runs along x at y = +-hw
      const double ey = (k == 0) ? hw : -hw;
      const double dx = lx - std::clamp(lx, -hl, hl);
      return dx * dx + (ly - ey) * (ly - ey);
    }
    const double ex = (k == 1) ? -hl : hl;  // runs along y at x = -+hl
    const double dy = ly - std::clamp(ly, -hw, hw);
    return (lx - ex) * (lx - ex) + dy * dy;
  };

  std::size_t inside = 0;
  double lshape_sum = 0.0;
  const std::size_t n = xs_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs_[i] - box.x;
    const double dy = ys_[i] - box.y;
    const double lx = c * dx + s * dy;
    const double ly = -s * dx + c * dy;
    const double lz = zs_[i] - box.z;
    if (std::abs(lx) > hl + tol || std::abs(ly) > hw + tol || std::abs(lz) > hh + tol) continue;
    ++inside;
    const double d2 = std::min(edge_dist2(picked[0], lx, ly), edge_dist2(picked[1], lx, ly));
    lshape_sum += std::sqrt(d2);
  }

  CostBreakdown out;
  out.density = -static_cast<double>(inside) / static_cast<double>(n);
  out.lshape = inside == 0 ? 0.0 : lshape_sum / static_cast<double>(inside);
  out.surface = cost_surface(box, ego_, weights_);
  out.iou2d = cost_iou2d(box, proposal_, calib_, weights_);
  out.total = weights_.lambda1 * out.density + weights_.lambda2 * out.lshape +
              weights_.lambda3 * out.surface + out.iou2d;
  return out;
}

}  // namespace novelbox::cost
