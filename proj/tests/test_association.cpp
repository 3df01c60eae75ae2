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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "novelbox/errors.hpp"
#include "test_util.hpp"

namespace novelbox::assoc {
namespace {

using testing::forward_camera;
using testing::identity_camera;

TEST(Unproject, PrincipalPointIsOpticalAxis) {
  const auto cam = identity_camera();
  const auto ray = unproject_pixel(50, 50, cam);
  EXPECT_TRUE(ray.direction.isApprox(Point3(0, 0, 1), 1e-12));
  EXPECT_TRUE(ray.origin.isZero(1e-12));
  // Through an extrinsic: the forward camera looks along ego +x.
  const auto fwd = forward_camera();
  EXPECT_TRUE(unproject_pixel(800, 450, fwd).direction.isApprox(Point3(1, 0, 0), 1e-12));
}

TEST(Unproject, OffsetPixel) {
  // u = 70 at f = 100 and c_u = 50: direction (0.2, 0, 1) normalized.
  const auto ray = unproject_pixel(70, 50, identity_camera());
  EXPECT_TRUE(ray.direction.isApprox(Point3(0.2, 0, 1).normalized(), 1e-12));
}

TEST(Unproject, SingularIntrinsicThrows) {
  auto cam = identity_camera();
  cam.intrinsic(1, 1) = 0.0;
  EXPECT_THROW(unproject_pixel(1, 1, cam), ValidationError);
}

TEST(Frustum, FullImageMatchesCameraFrustum) {
  const auto cam = identity_camera();
  const auto f = frustum_from_box({0, 0, 100, 100}, cam, 0.5, 60);
  EXPECT_TRUE(f.corner_rays[0].direction.isApprox(Point3(-0.5, -0.5, 1).normalized(), 1e-12));
  EXPECT_TRUE(f.corner_rays[1].direction.isApprox(Point3(0.5, -0.5, 1).normalized(), 1e-12));
  EXPECT_TRUE(f.corner_rays[2].direction.isApprox(Point3(0.5, 0.5, 1).normalized(), 1e-12));
  EXPECT_TRUE(f.corner_rays[3].direction.isApprox(Point3(-0.5, 0.5, 1).normalized(), 1e-12));
  const auto c = center_ray(f);
  EXPECT_TRUE(c.direction.isApprox(Point3(0, 0, 1), 1e-12));
  // Symmetric box: the center ray bisects opposite corner rays.
  const Point3 bisector = (f.corner_rays[0].direction + f.corner_rays[2].direction).normalized();
  EXPECT_TRUE(c.direction.isApprox(bisector, 1e-12));
}

TEST(Frustum, DegenerateBoxHasParallelRays) {
  const auto f = frustum_from_box({50, 50, 50, 50}, identity_camera(), 0.5, 60);
  for (const auto& r : f.corner_rays) EXPECT_TRUE(r.direction.isApprox(f.center_direction, 1e-12));
}

TEST(Frustum, Errors) {
  const auto cam = identity_camera();
  EXPECT_THROW(frustum_from_box({-5, 0, 10, 10}, cam, 0.5, 60), ValidationError);
  EXPECT_THROW(frustum_from_box({0, 0, 10, 110}, cam, 0.5, 60), ValidationError);
  EXPECT_THROW(frustum_from_box({0, 0, 10, 10}, cam, 60, 0.5), ValidationError);
}

TEST(RayDistance, Examples) {
  const Ray z{Point3::Zero(), Point3::UnitZ()};
  EXPECT_DOUBLE_EQ(point_to_ray_distance({0, 0, 7}, z), 0.0);
  EXPECT_DOUBLE_EQ(point_to_ray_distance({1, 0, 0}, z), 1.0);
  EXPECT_NEAR(point_to_ray_distance({3, 0, 5}, z), 3.0, 1e-12);
  EXPECT_NEAR(point_to_ray_distance({0, 3, -4}, z), 5.0, 1e-12);
}

// Scene with the forward camera at the origin and point blobs at given ego
// positions.
struct Fixture {
  scene::Scene scene;
  std::vector<scene::Cluster> clusters;

  void add_blob(const Point3& center, int n = 20, double spread = 0.3) {
    std::vector<std::size_t> idx;
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (n - 1) - 0.5;
      idx.push_back(scene.cloud.size());
      scene.cloud.push_back(center + Point3(spread * t, spread * t * t, spread * t));
    }
    clusters.push_back(scene::make_cluster(scene.cloud, idx));
  }
};

Fixture make_fixture() {
  Fixture f;
  f.scene.frame_id = "000001";
  f.scene.cameras.push_back(forward_camera());
  return f;
}

Proposal2D centred_proposal() {
  Proposal2D p;
  p.box = {700, 350, 900, 550};  // centred on the principal point
  p.camera_id = "FRONT";
  p.class_id = "car";
  p.score = 0.9;
  p.crop_w = 200;
  p.crop_h = 200;
  p.mask_pixel_count = 30000;
  return p;
}

TEST(Associate, ClusterOnRayPairs) {
  auto f = make_fixture();
  f.add_blob({15, 0, 0});
  const std::vector<Proposal2D> props = {centred_proposal()};
  AssociationStats stats;
  const auto pairs = associate(f.scene, props, f.clusters, {}, &stats);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].cluster_index, 0u);
  EXPECT_LE(pairs[0].distance_to_ray, 2.0);
  EXPECT_EQ(pairs[0].obj_points.size(), 20u);
  EXPECT_EQ(pairs[0].frame_id, "000001");
  EXPECT_EQ(stats.pairs, 1u);
  EXPECT_EQ(stats.unmatched, 0u);
}

TEST(Associate, FarOffRayIsDropped) {
  auto f = make_fixture();
  f.add_blob({15, 5, 0});
  const std::vector<Proposal2D> props = {centred_proposal()};
  AssociationStats stats;
  EXPECT_TRUE(associate(f.scene, props, f.clusters, {}, &stats).empty());
  EXPECT_EQ(stats.unmatched, 1u);
}

TEST(Associate, FragmentedObjectGivesCompetingPairs) {
  auto f = make_fixture();
  f.add_blob({14, 0.5 + 0.15, 0}, 20, 0.0);
  f.add_blob({16, -0.5 - 0.15, 0}, 20, 0.0);
  const std::vector<Proposal2D> props = {centred_proposal()};
  const auto pairs = associate(f.scene, props, f.clusters, {});
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].proposal_index, pairs[1].proposal_index);
}

TEST(Associate, DepthWindow) {
  auto f = make_fixture();
  f.add_blob({80, 0, 0});
  f.add_blob({0.2, 0, 0}, 5, 0.0);
  const std::vector<Proposal2D> props = {centred_proposal()};
  EXPECT_TRUE(associate(f.scene, props, f.clusters, {}).empty());
  AssociationParams wide;
  wide.d_max = 100.0;
  EXPECT_EQ(associate(f.scene, props, f.clusters, wide).size(), 1u);
}

TEST(Associate, CentroidCriterion) {
  auto f = make_fixture();
  // Elongated cluster: one end on the ray, centroid 3 m off it.
  std::vector<std::size_t> idx;
  for (int i = 0; i <= 30; ++i) {
    idx.push_back(f.scene.cloud.size());
    f.scene.cloud.emplace_back(15, 0.2 * i, 0);
  }
  f.clusters.push_back(scene::make_cluster(f.scene.cloud, idx));
  const std::vector<Proposal2D> props = {centred_proposal()};
  EXPECT_EQ(associate(f.scene, props, f.clusters, {}).size(), 1u);
  AssociationParams by_centroid;
  by_centroid.criterion = MatchCriterion::kCentroid;
  EXPECT_TRUE(associate(f.scene, props, f.clusters, by_centroid).empty());
}

TEST(Associate, ProposalOutsideImageIsUnmatched) {
  auto f = make_fixture();
  f.add_blob({15, 0, 0});
  auto p = centred_proposal();
  p.box = {2000, 100, 2100, 200};
  AssociationStats stats;
  const std::vector<Proposal2D> props = {p};
  EXPECT_TRUE(associate(f.scene, props, f.clusters, {}, &stats).empty());
  EXPECT_EQ(stats.unmatched, 1u);
}

TEST(Associate, UnknownCameraThrows) {
  auto f = make_fixture();
  f.add_blob({15, 0, 0});
  auto p = centred_proposal();
  p.camera_id = "NOPE";
  const std::vector<Proposal2D> props = {p};
  EXPECT_THROW(associate(f.scene, props, f.clusters, {}), ValidationError);
}

TEST(Associate, IndependentOfClusterOrder) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-4, 4);
  auto f = make_fixture();
  for (int k = 0; k < 12; ++k) f.add_blob({20 + u(rng), u(rng), 0.2 * u(rng)}, 10, 0.5);
  const std::vector<Proposal2D> props = {centred_proposal()};
  const auto key = [&](const std::vector<CrossModalProposal>& pairs,
                       const std::vector<scene::Cluster>& cs) {
    std::vector<std::vector<std::size_t>> members;
    for (const auto& p : pairs) members.push_back(cs[p.cluster_index].point_indices);
    std::sort(members.begin(), members.end());
    return members;
  };
  const auto reference = key(associate(f.scene, props, f.clusters, {}), f.clusters);
  ASSERT_FALSE(reference.empty());
  for (int trial = 0; trial < 5; ++trial) {
    auto shuffled = f.clusters;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(key(associate(f.scene, props, shuffled, {}), shuffled), reference);
  }
}

TEST(Associate, EveryPairWithinTau) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-6, 6);
  auto f = make_fixture();
  for (int k = 0; k < 40; ++k) f.add_blob({25 + u(rng), u(rng), 0.3 * u(rng)}, 8, 0.6);
  std::vector<Proposal2D> props;
  for (int k = 0; k < 6; ++k) {
    auto p = centred_proposal();
    p.box.u_min += 60 * (k - 3);
    p.box.u_max += 60 * (k - 3);
    props.push_back(p);
  }
  AssociationParams params;
  params.tau_match = 1.5;
  for (const auto& pair : associate(f.scene, props, f.clusters, params)) {
    EXPECT_LE(pair.distance_to_ray, params.tau_match);
    const double along = (pair.closest_point - pair.center_ray.origin).dot(pair.center_ray.direction);
    EXPECT_GE(along, params.d_min);
    EXPECT_LE(along, params.d_max);
  }
}

TEST(Proposal, Validation) {
  auto p = centred_proposal();
  EXPECT_NO_THROW(p.validate());
  p.mask_pixel_count = 200 * 200 + 1;
  EXPECT_THROW(p.validate(), ValidationError);
  p = centred_proposal();
  p.crop_w = 0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = centred_proposal();
  p.score = 1.5;
  EXPECT_THROW(p.validate(), ValidationError);
}

}  // namespace
}  // namespace novelbox::assoc
