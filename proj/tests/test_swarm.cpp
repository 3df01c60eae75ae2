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

#include "novelbox/swarm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "novelbox/errors.hpp"
#include "novelbox/synth.hpp"
#include "test_util.hpp"

namespace novelbox::search {
namespace {

const AnchorRange kCar{"car", {3.9, 1.6, 1.4}, {5.3, 2.1, 1.9}};

std::vector<Point3> blob() {
  return {{10, 0, -1}, {10.5, 0.5, -1}, {11, -0.5, -0.5}, {12, 0, -1.2}, {10.2, 1.0, -0.8}};
}

assoc::Ray ray_to(const Point3& target) {
  return {Point3::Zero(), target.normalized()};
}

TEST(SwarmConfig, PublishedDefaults) {
  const SwarmConfig cfg;
  EXPECT_EQ(cfg.n_swarm, 50);
  EXPECT_EQ(cfg.n_iter, 3000);
  EXPECT_EQ(cfg.w_init, 10.0);
  EXPECT_EQ(cfg.w_end, 0.1);
  EXPECT_EQ(cfg.c1, 1.0);
  EXPECT_EQ(cfg.c2, 1.0);
  EXPECT_EQ(cfg.c_noise, 0.1);
  EXPECT_EQ(cfg.evaluations(), 150000u);
}

TEST(SwarmConfig, Validation) {
  SwarmConfig cfg;
  cfg.n_swarm = 1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.n_iter = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.w_end = 20.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.w_end = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.c2 = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Inertia, Schedule) {
  SwarmConfig cfg;
  EXPECT_DOUBLE_EQ(inertia_at(0, cfg), 10.0);
  EXPECT_DOUBLE_EQ(inertia_at(cfg.n_iter - 1, cfg), 0.1);
  cfg.n_iter = 3;
  EXPECT_NEAR(inertia_at(1, cfg), 5.05, 1e-12);
  EXPECT_THROW(inertia_at(3, cfg), ValidationError);
  EXPECT_THROW(inertia_at(-1, cfg), ValidationError);
}

TEST(InitParticles, ZeroNoiseCollapsesToTwoSites) {
  SwarmConfig cfg;
  cfg.c_noise = 0.0;
  const auto cluster = blob();
  const auto particles = init_particles(cluster, ray_to({12, 0, -1.2}), kCar, cfg);
  std::set<std::array<double, 3>> sites;
  for (const auto& p : particles) sites.insert({p.position[0], p.position[1], p.position[2]});
  EXPECT_EQ(sites.size(), 2u);
  EXPECT_TRUE(sites.count({12, 0, -1.2}));
}

TEST(InitParticles, HalfAtEachSite) {
  SwarmConfig cfg;
  cfg.c_noise = 0.0;
  const auto cluster = blob();
  Point3 centroid = Point3::Zero();
  for (const auto& p : cluster) centroid += p;
  centroid /= cluster.size();
  const auto particles = init_particles(cluster, ray_to({12, 0, -1.2}), kCar, cfg);
  ASSERT_EQ(particles.size(), 50u);
  int at_closest = 0;
  int at_centroid = 0;
  for (const auto& p : particles) {
    const Point3 pos(p.position[0], p.position[1], p.position[2]);
    if (pos == Point3(12, 0, -1.2)) ++at_closest;
    if ((pos - centroid).norm() < 1e-12) ++at_centroid;
    for (std::size_t d = 3; d < 6; ++d) {
      EXPECT_GE(p.position[d], kCar.dims_min[d - 3]);
      EXPECT_LE(p.position[d], kCar.dims_max[d - 3]);
    }
    EXPECT_GE(p.position[kYaw], 0.0);
    EXPECT_LT(p.position[kYaw], geom::kPi);
    for (const double v : p.velocity) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(at_closest, 25);
  EXPECT_EQ(at_centroid, 25);
}

TEST(InitParticles, Deterministic) {
  SwarmConfig cfg;
  cfg.seed = 42;
  const auto cluster = blob();
  const auto a = init_particles(cluster, ray_to({10, 0, -1}), kCar, cfg);
  const auto b = init_particles(cluster, ray_to({10, 0, -1}), kCar, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].position, b[i].position);
}

TEST(InitParticles, EmptyClusterThrows) {
  EXPECT_THROW(init_particles({}, ray_to({1, 0, 0}), kCar, SwarmConfig{}), ValidationError);
}

TEST(SearchSpace, DilatedClusterBounds) {
  const auto cluster = blob();
  const auto space = make_search_space(cluster, kCar);
  const double margin = 0.5 * kCar.dims_max.norm();
  EXPECT_NEAR(space.lower[0], 10 - margin, 1e-12);
  EXPECT_NEAR(space.upper[0], 12 + margin, 1e-12);
  EXPECT_NEAR(space.lower[2], -1.2 - margin, 1e-12);
  EXPECT_EQ(space.lower[3], 3.9);
  EXPECT_EQ(space.upper[5], 1.9);
  EXPECT_EQ(space.lower[kYaw], 0.0);
  EXPECT_EQ(space.upper[kYaw], geom::kPi);
}

TEST(Minimize, SphereFunction) {
  const Vec7 target = {10.7, 0.3, -0.9, 4.4, 1.8, 1.6, 1.2};
  const Objective sphere = [&](const BoxParams& b) {
    const Vec7 v = to_vector(b);
    double s = 0.0;
    for (std::size_t d = 0; d < kDims; ++d) {
      const double diff = d == kYaw ? geom::yaw_difference(v[d], target[d]) : v[d] - target[d];
      s += diff * diff;
    }
    cost::CostBreakdown c;
    c.total = s;
    return c;
  };
  SwarmConfig cfg;
  cfg.seed = 9;
  cfg.record_trace = true;
  const auto cluster = blob();
  const auto space = make_search_space(cluster, kCar);
  Rng rng(cfg.seed);
  auto particles = init_particles(cluster, ray_to({10, 0, -1}), kCar, cfg, rng);
  const auto r = minimize(sphere, particles, space, kCar, cfg, rng);
  const Vec7 best = to_vector(r.best_box);
  for (std::size_t d = 0; d < kDims; ++d) EXPECT_NEAR(best[d], target[d], 1e-3) << "axis " << d;
  EXPECT_EQ(r.evaluations, cfg.evaluations());
  ASSERT_EQ(r.trace.size(), static_cast<std::size_t>(cfg.n_iter));
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
}

TEST(Minimize, SingleIterationIsBestOfInitialPopulation) {
  SwarmConfig cfg;
  cfg.n_iter = 1;
  cfg.seed = 4;
  const auto cluster = blob();
  const auto space = make_search_space(cluster, kCar);
  Rng rng(cfg.seed);
  const auto particles = init_particles(cluster, ray_to({10, 0, -1}), kCar, cfg, rng);
  const Objective f = [](const BoxParams& b) {
    cost::CostBreakdown c;
    c.total = std::abs(b.x - 11.0) + b.l;
    return c;
  };
  double want = 1e18;
  for (const auto& p : particles) {
    want = std::min(want, f(cost::clamp_to_constraints(from_vector(p.position), kCar)).total);
  }
  const auto r = minimize(f, particles, space, kCar, cfg, rng);
  EXPECT_EQ(r.evaluations, 50u);
  EXPECT_DOUBLE_EQ(r.best_cost.total, want);
}

synth::SynthInstance car_instance(std::uint64_t seed) {
  synth::Rng rng(seed);
  return synth::synth_instance("car", kCar, 5, 40, synth::make_camera_ring({}), {}, -1.8, rng);
}

TEST(PsoSearch, RecoversSyntheticCar) {
  const auto inst = car_instance(17);
  SwarmConfig cfg;
  cfg.seed = 1;
  const auto r = pso_search(inst.pair, kCar, CostWeights{}, cfg);
  EXPECT_GE(geom::iou_bev(r.best_box, inst.ground_truth), 0.7);
  EXPECT_EQ(r.evaluations, 150000u);
}

TEST(PsoSearch, BestBoxSatisfiesConstraints) {
  const auto inst = car_instance(3);
  SwarmConfig cfg;
  cfg.n_iter = 200;
  const auto r = pso_search(inst.pair, kCar, CostWeights{}, cfg);
  const auto& b = r.best_box;
  EXPECT_GE(b.l, 3.9);
  EXPECT_LE(b.l, 5.3);
  EXPECT_GE(b.w, 1.6);
  EXPECT_LE(b.w, 2.1);
  EXPECT_GE(b.h, 1.4);
  EXPECT_LE(b.h, 1.9);
  EXPECT_GE(b.ry, 0.0);
  EXPECT_LT(b.ry, geom::kPi);
}

TEST(PsoSearch, SeededRunsAreBitwiseIdentical) {
  const auto inst = car_instance(5);
  SwarmConfig cfg;
  cfg.n_iter = 100;
  cfg.seed = 77;
  cfg.record_trace = true;
  const auto a = pso_search(inst.pair, kCar, CostWeights{}, cfg);
  const auto b = pso_search(inst.pair, kCar, CostWeights{}, cfg);
  EXPECT_EQ(to_vector(a.best_box), to_vector(b.best_box));
  EXPECT_EQ(a.best_cost.total, b.best_cost.total);
  EXPECT_EQ(a.trace, b.trace);
}

TEST(PsoSearch, EmptyClusterThrows) {
  auto inst = car_instance(5);
  inst.pair.obj_points.clear();
  EXPECT_THROW(pso_search(inst.pair, kCar, CostWeights{}, SwarmConfig{}), ValidationError);
}

TEST(Grid, CountsForBudget) {
  const auto one = grid_counts_for_budget(1);
  for (const int c : one) EXPECT_EQ(c, 1);
  const auto full = grid_counts_for_budget(150000);
  std::size_t product = 1;
  for (const int c : full) product *= static_cast<std::size_t>(c);
  EXPECT_LE(product, 150000u);
  EXPECT_EQ(full[3], 3);
  EXPECT_EQ(full[4], 3);
  EXPECT_EQ(full[5], 3);
  // Growing any non-capped axis would exceed the budget.
  for (const std::size_t axis : {0u, 1u, 2u, 6u}) {
    EXPECT_GT(product / full[axis] * (full[axis] + 1), 150000u) << axis;
  }
  EXPECT_THROW(grid_counts_for_budget(0), ValidationError);
}

TEST(Grid, AxisValues) {
  SearchSpace space;
  space.lower = {0, 0, 0, 3.9, 1.6, 1.4, 0};
  space.upper = {4, 4, 4, 5.3, 2.1, 1.9, geom::kPi};
  const auto dims = grid_axis(space, 3, 3);
  ASSERT_EQ(dims.size(), 3u);
  EXPECT_NEAR(dims[0], 3.9 + 0.35, 1e-12);  // anchor quartiles
  EXPECT_NEAR(dims[1], 4.6, 1e-12);
  EXPECT_NEAR(dims[2], 3.9 + 1.05, 1e-12);
  const auto center = grid_axis(space, 0, 1);
  EXPECT_NEAR(center[0], 2.0, 1e-12);
  const auto yaw = grid_axis(space, kYaw, 4);
  EXPECT_NEAR(yaw[0], geom::kPi / 8, 1e-12);
  EXPECT_NEAR(yaw[3], 7 * geom::kPi / 8, 1e-12);
}

TEST(Grid, BudgetOneEvaluatesCenter) {
  const auto inst = car_instance(8);
  const auto r = greedy_search(inst.pair, kCar, CostWeights{}, 1);
  EXPECT_EQ(r.evaluations, 1u);
  const auto space = make_search_space(inst.pair.obj_points, kCar);
  EXPECT_NEAR(r.best_box.x, 0.5 * (space.lower[0] + space.upper[0]), 1e-12);
  EXPECT_NEAR(r.best_box.l, 4.6, 1e-12);
  EXPECT_NEAR(r.best_box.ry, geom::kPi / 2, 1e-12);
}

TEST(Grid, ExhaustiveMinimum) {
  const auto inst = car_instance(8);
  const auto objective = make_objective(inst.pair, kCar, CostWeights{});
  const auto space = make_search_space(inst.pair.obj_points, kCar);
  GridCounts counts = {3, 3, 2, 2, 2, 2, 3};
  const auto r = grid_search([&](const BoxParams& b) { return objective.evaluate(b); }, space,
                             counts);
  EXPECT_EQ(r.evaluations, 3u * 3 * 2 * 2 * 2 * 2 * 3);
  double best = 1e18;
  for (const double x : grid_axis(space, 0, 3))
    for (const double y : grid_axis(space, 1, 3))
      for (const double z : grid_axis(space, 2, 2))
        for (const double l : grid_axis(space, 3, 2))
          for (const double w : grid_axis(space, 4, 2))
            for (const double h : grid_axis(space, 5, 2))
              for (const double ry : grid_axis(space, 6, 3))
                best = std::min(best, objective.evaluate({x, y, z, l, w, h, ry}).total);
  EXPECT_DOUBLE_EQ(r.best_cost.total, best);
}

TEST(Grid, GreedyIsDeterministicAndWithinBudget) {
  const auto inst = car_instance(9);
  const auto a = greedy_search(inst.pair, kCar, CostWeights{}, 5000);
  const auto b = greedy_search(inst.pair, kCar, CostWeights{}, 5000);
  EXPECT_LE(a.evaluations, 5000u);
  EXPECT_EQ(to_vector(a.best_box), to_vector(b.best_box));
}

}  // namespace
}  // namespace novelbox::search
