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
/// \brief Cross-modal association: 2D proposals are back-projected into
/// frusta and paired with the point clusters lying near the center ray.
#ifndef NOVELBOX_ASSOCIATION_HPP_
#define NOVELBOX_ASSOCIATION_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "novelbox/geometry.hpp"
#include "novelbox/scene.hpp"

namespace novelbox::assoc {

using geom::Box2D;
using geom::CameraCalib;
using geom::EgoPose;
using geom::Point3;
using geom::PointCloud;

/// One 2D novel-object detection with its mask statistics. The embedding is
/// an opaque pass-through vector produced upstream.
struct Proposal2D {
  Box2D box;
  std::string camera_id;
  std::string class_id;
  double score = 0.0;
  long mask_pixel_count = 0;
  int crop_w = 0;
  int crop_h = 0;
  std::optional<std::vector<double>> embedding;

  void validate() const;
};

struct Ray {
  Point3 origin = Point3::Zero();
  Point3 direction = Point3::UnitZ();  ///< unit length

  Point3 at(double t) const { return origin + t * direction; }
};

/// Viewing volume of a 2D box. Corner rays follow the Box2D corners
/// (u_min, v_min), (u_max, v_min), (u_max, v_max), (u_min, v_max).
struct Frustum {
  std::array<Ray, 4> corner_rays;
  Point3 center_direction = Point3::UnitZ();  ///< unprojected box-center pixel
  double d_min = 0.5;
  double d_max = 60.0;
};

enum class MatchCriterion {
  kClosestPoint,  ///< cluster point nearest the center ray
  kCentroid,      ///< cluster centroid
};

struct AssociationParams {
  double tau_match = 2.0;
  double d_min = 0.5;
  double d_max = 60.0;
  MatchCriterion criterion = MatchCriterion::kClosestPoint;
};

/// A (proposal, cluster) pair ready for box search. It owns copies of
/// everything the search needs so it can be processed independently.
struct CrossModalProposal {
  Proposal2D proposal;
  std::size_t proposal_index = 0;
  scene::Cluster cluster;
  std::size_t cluster_index = 0;
  PointCloud obj_points;
  CameraCalib calib;
  EgoPose ego;
  std::string frame_id;
  Ray center_ray;
  Point3 closest_point = Point3::Zero();  ///< cluster point nearest the center ray
  double distance_to_ray = 0.0;
};

/// Unit ray through pixel (u, v) in the ego frame. Throws ValidationError on
/// a singular intrinsic.
Ray unproject_pixel(double u, double v, const CameraCalib& calib);

/// Throws ValidationError when the box lies outside the image or the
/// intrinsic is singular.
Frustum frustum_from_box(const Box2D& box, const CameraCalib& calib, double d_min, double d_max);

Ray center_ray(const Frustum& frustum);

/// Perpendicular distance to the ray; points behind the origin measure to the
/// origin.
double point_to_ray_distance(const Point3& p, const Ray& ray);

struct AssociationStats {
  std::size_t proposals = 0;
  std::size_t unmatched = 0;
  std::size_t pairs = 0;
};

/// Pairs every proposal with each cluster whose matching point lies within
/// tau_match of the center ray and within [d_min, d_max] along it.
std::vector<CrossModalProposal> associate(const scene::Scene& scene,
                                          std::span<const Proposal2D> proposals,
                                          std::span<const scene::Cluster> clusters,
                                          const AssociationParams& params,
                                          AssociationStats* stats = nullptr);

}  // namespace novelbox::assoc

#endif  // NOVELBOX_ASSOCIATION_HPP_
