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

#include "novelbox/association.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "novelbox/errors.hpp"

namespace novelbox::assoc {

void Proposal2D::validate() const {
  if (!(box.u_min <= box.u_max && box.v_min <= box.v_max)) {
    throw ValidationError("proposal box must satisfy u_min <= u_max and v_min <= v_max");
  }
  if (crop_w < 1 || crop_h < 1) throw ValidationError("proposal crop dimensions must be >= 1");
  if (mask_pixel_count < 0 ||
      mask_pixel_count > static_cast<long>(crop_w) * static_cast<long>(crop_h)) {
    throw ValidationError("proposal mask pixel count must lie in [0, crop area]");
  }
  if (!(score >= 0.0 && score <= 1.0)) throw ValidationError("proposal score must lie in [0, 1]");
}

Ray unproject_pixel(double u, double v, const CameraCalib& calib) {
  const double det = calib.intrinsic.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12) {
    throw ValidationError("camera '" + calib.camera_id + "': singular intrinsic");
  }
  const Point3 dir_cam = calib.intrinsic.inverse() * Point3(u, v, 1.0);
  const Eigen::Matrix3d r = calib.extrinsic.topLeftCorner<3, 3>();
  return {calib.center_in_ego(), (r.transpose() * dir_cam).normalized()};
}

Frustum frustum_from_box(const Box2D& box, const CameraCalib& calib, double d_min, double d_max) {
  if (!(d_min < d_max)) throw ValidationError("frustum requires d_min < d_max");
  if (box.u_min < 0.0 || box.v_min < 0.0 || box.u_max > calib.image_width ||
      box.v_max > calib.image_height || box.u_min > box.u_max || box.v_min > box.v_max) {
    throw ValidationError("frustum box lies outside the image of camera '" + calib.camera_id + "'");
  }
  Frustum f;
  f.corner_rays = {unproject_pixel(box.u_min, box.v_min, calib),
                   unproject_pixel(box.u_max, box.v_min, calib),
                   unproject_pixel(box.u_max, box.v_max, calib),
                   unproject_pixel(box.u_min, box.v_max, calib)};
  f.center_direction = unproject_pixel(0.5 * (box.u_min + box.u_max),
                                       0.5 * (box.v_min + box.v_max), calib)
                           .direction;
  f.d_min = d_min;
  f.d_max = d_max;
  return f;
}

Ray center_ray(const Frustum& frustum) {
  return {frustum.corner_rays[0].origin, frustum.center_direction};
}

double point_to_ray_distance(const Point3& p, const Ray& ray) {
  const Point3 rel = p - ray.origin;
  const double t = rel.dot(ray.direction);
  if (t <= 0.0) return rel.norm();
  return (rel - t * ray.direction).norm();
}

std::vector<CrossModalProposal> associate(const scene::Scene& scene,
                                          std::span<const Proposal2D> proposals,
                                          std::span<const scene::Cluster> clusters,
                                          const AssociationParams& params,
                                          AssociationStats* stats) {
  if (!(params.tau_match > 0.0)) throw ValidationError("tau_match must be positive");
  AssociationStats local;
  std::vector<CrossModalProposal> pairs;
  for (std::size_t pi = 0; pi < proposals.size(); ++pi) {
    const Proposal2D& proposal = proposals[pi];
    ++local.proposals;
    const CameraCalib& calib = scene.camera(proposal.camera_id);
    const auto clipped = geom::clip_to_image(proposal.box, calib.image_width, calib.image_height);
    if (!clipped) {
      ++local.unmatched;
      continue;
    }
    const Ray ray = center_ray(frustum_from_box(*clipped, calib, params.d_min, params.d_max));

    std::size_t matched = 0;
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
      const scene::Cluster& cluster = clusters[ci];
      Point3 closest = cluster.centroid;
      double closest_dist = std::numeric_limits<double>::infinity();
      for (const auto idx : cluster.point_indices) {
        const double d = point_to_ray_distance(scene.cloud[idx], ray);
        if (d < closest_dist) {
          closest_dist = d;
          closest = scene.cloud[idx];
        }
      }
      const bool by_centroid = params.criterion == MatchCriterion::kCentroid;
      const Point3& probe = by_centroid ? cluster.centroid : closest;
      const double dist = by_centroid ? point_to_ray_distance(cluster.centroid, ray) : closest_dist;
      const double along = (probe - ray.origin).dot(ray.direction);
      if (dist > params.tau_match || along < params.d_min || along > params.d_max) continue;

      CrossModalProposal pair;
      pair.proposal = proposal;
      pair.proposal_index = pi;
      pair.cluster = cluster;
      pair.cluster_index = ci;
      pair.obj_points = cluster.points(scene.cloud);
      pair.calib = calib;
      pair.ego = scene.ego;
      pair.frame_id = scene.frame_id;
      pair.center_ray = ray;
      pair.closest_point = closest;
      pair.distance_to_ray = dist;
      pairs.push_back(std::move(pair));
      ++matched;
    }
    if (matched == 0) ++local.unmatched;
    local.pairs += matched;
  }
  if (stats) *stats = local;
  return pairs;
}

}  // namespace novelbox::assoc
