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

/// \file
/// \brief Box-fitting objective: point density, l-shape, surface and image
/// IoU terms evaluated for a candidate box.
#ifndef NOVELBOX_COST_HPP_
#define NOVELBOX_COST_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "novelbox/geometry.hpp"

namespace novelbox::cost {

using geom::BoxParams;
using geom::Box2D;
using geom::CameraCalib;
using geom::EgoPose;
using geom::Point3;

struct CostWeights {
  double lambda1 = 5.0;  ///< density
  double lambda2 = 1.0;  ///< l-shape
  double lambda3 = 1.0;  ///< surface
  double gamma = 3.0;    ///< image IoU
  /// Surface clip in meters. When empty it is derived per proposal by
  /// default_c_surface().
  std::optional<double> c_surface;

  void validate() const;
};

/// Per-class dimension bounds (l, w, h) in meters.
struct AnchorRange {
  std::string class_id;
  Point3 dims_min = Point3::Ones();
  Point3 dims_max = Point3::Ones();

  void validate() const;
  Point3 mid() const { return 0.5 * (dims_min + dims_max); }
  double max_footprint_diagonal() const { return dims_max.head<2>().norm(); }
};

/// Raw density, l-shape and surface terms; `iou2d` is already weighted
/// (-gamma * IoU) and `total` is the weighted sum that the search minimizes.
struct CostBreakdown {
  double density = 0.0;
  double lshape = 0.0;
  double surface = 0.0;
  double iou2d = 0.0;
  double total = 0.0;
};

/// Indices (into box_corners) of the two anchoring top edges: the top edge
/// whose midpoint is nearest the ego, and the nearer of its two
/// perpendicular neighbours.
struct AnchorEdges {
  std::array<std::array<int, 2>, 2> edges;
};

AnchorEdges select_anchor_edges(const BoxParams& box, const EgoPose& ego);

/// Euclidean distance from p to the segment [a, b].
double point_segment_distance(const Point3& p, const Point3& a, const Point3& b);

/// -(points inside) / |points|. Throws ValidationError on empty input.
double cost_density(const BoxParams& box, std::span<const Point3> obj_points);
/// Mean bird's-eye-view distance of the enclosed points to the nearer anchoring
/// edge; 0 when no point is enclosed. Throws ValidationError on empty input.
double cost_lshape(const BoxParams& box, std::span<const Point3> obj_points, const EgoPose& ego);

/// -min(||center_xy - ego_xy||, c_surface). Requires weights.c_surface.
double cost_surface(const BoxParams& box, const EgoPose& ego, const CostWeights& weights);

/// -gamma * IoU(projected box, proposal); 0 when the box does not project.
double cost_iou2d(const BoxParams& box, const Box2D& proposal, const CameraCalib& calib,
                  const CostWeights& weights);

CostBreakdown cost_total(const BoxParams& box, std::span<const Point3> obj_points,
                         const EgoPose& ego, const Box2D& proposal, const CameraCalib& calib,
                         const CostWeights& weights);

/// Clamp (l, w, h) into the anchor range and wrap yaw into [0, pi).
BoxParams clamp_to_constraints(const BoxParams& box, const AnchorRange& anchor);

/// Distance from ego to the cluster centroid plus half the anchor's shortest
/// minimum footprint side: the shallowest depth at which the true center can
/// sit behind the visible surface. A deeper clip lets empty boxes behind
/// large vehicles outscore the true box.
double default_c_surface(const Point3& cluster_centroid, const EgoPose& ego,
                         const AnchorRange& anchor);

/// Weights with c_surface resolved for one proposal.
CostWeights resolve_weights(const CostWeights& weights, const Point3& cluster_centroid,
                            const EgoPose& ego, const AnchorRange& anchor);

/// The objective bound to one proposal. Points are stored structure-of-arrays
/// and the enclosed-point count is shared by the density and l-shape terms.
/// evaluate() is const and safe to call concurrently.
class BoxObjective {
 public:
  BoxObjective(std::span<const Point3> obj_points, const EgoPose& ego, const Box2D& proposal,
               CameraCalib calib, const CostWeights& weights);

  CostBreakdown evaluate(const BoxParams& box) const;

  std::size_t num_points() const { return xs_.size(); }
  const CostWeights& weights() const { return weights_; }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> zs_;
  EgoPose ego_;
  Box2D proposal_;
  CameraCalib calib_;
  CostWeights weights_;
};

}  // namespace novelbox::cost

#endif  // NOVELBOX_COST_HPP_
