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

#include <algorithm>
#include <cmath>
#include <limits>

#include "novelbox/errors.hpp"

namespace novelbox::search {

Vec7 to_vector(const BoxParams& box) { return {box.x, box.y, box.z, box.l, box.w, box.h, box.ry}; }

BoxParams from_vector(const Vec7& v) { return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]}; }

void SwarmConfig::validate() const {
  if (n_swarm < 2) throw ValidationError("swarm size must be >= 2");
  if (n_iter < 1) throw ValidationError("swarm iterations must be >= 1");
  if (!(w_end > 0.0) || !(w_init >= w_end)) {
    throw ValidationError("inertia weights must satisfy w_init >= w_end > 0");
  }
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw ValidationError("c1 and c2 must be non-negative");
  if (!(c_noise >= 0.0)) throw ValidationError("c_noise must be non-negative");
}

SearchSpace make_search_space(std::span<const Point3> cluster, const AnchorRange& anchor) {
  if (cluster.empty()) throw ValidationError("search space needs a non-empty cluster");
  anchor.validate();
  Point3 lo = cluster.front();
  Point3 hi = cluster.front();
  for (const auto& p : cluster) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double margin = 0.5 * anchor.dims_max.norm();
  SearchSpace space;
  for (int d = 0; d < 3; ++d) {
    space.lower[d] = lo[d] - margin;
    space.upper[d] = hi[d] + margin;
    space.lower[3 + d] = anchor.dims_min[d];
    space.upper[3 + d] = anchor.dims_max[d];
  }
  space.lower[kYaw] = 0.0;
  space.upper[kYaw] = geom::kPi;
  return space;
}

std::vector<Particle> init_particles(std::span<const Point3> cluster, const assoc::Ray& frustum_ray,
                                     const AnchorRange& anchor, const SwarmConfig& cfg, Rng& rng) {
  if (cluster.empty()) throw ValidationError("cannot initialise a swarm on an empty cluster");
  cfg.validate();
  const SearchSpace space = make_search_space(cluster, anchor);

  Point3 centroid = Point3::Zero();
  const Point3* closest = &cluster.front();
  double closest_dist = std::numeric_limits<double>::infinity();
  for (const auto& p : cluster) {
    centroid += p;
    const double d = assoc::point_to_ray_distance(p, frustum_ray);
    if (d < closest_dist) {
      closest_dist = d;
      closest = &p;
    }
  }
  centroid /= static_cast<double>(cluster.size());

  const Point3 sigma = cfg.c_noise * anchor.mid();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Particle> swarm(static_cast<std::size_t>(cfg.n_swarm));
  const std::size_t half = swarm.size() / 2;
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    Particle& particle = swarm[i];
    const Point3& site = i < half ? *closest : centroid;
    for (int d = 0; d < 3; ++d) {
      const double noise = sigma[d] * normal(rng);
      particle.position[d] = std::clamp(site[d] + noise, space.lower[d], space.upper[d]);
    }
    for (std::size_t d = 3; d < kDims; ++d) {
      particle.position[d] = space.lower[d] + unit(rng) * space.range(d);
    }
    particle.position[kYaw] = geom::wrap_yaw(particle.position[kYaw]);
    particle.velocity.fill(0.0);
    particle.best_position = particle.position;
    particle.best_cost = std::numeric_limits<double>::infinity();
  }
  return swarm;
}

std::vector<Particle> init_particles(std::span<const Point3> cluster, const assoc::Ray& frustum_ray,
                                     const AnchorRange& anchor, const SwarmConfig& cfg) {
  Rng rng(cfg.seed);
  return init_particles(cluster, frustum_ray, anchor, cfg, rng);
}

double inertia_at(int iter, const SwarmConfig& cfg) {
  if (iter < 0 || iter >= cfg.n_iter) {
    throw ValidationError("inertia_at: iteration " + std::to_string(iter) + " outside [0, " +
                          std::to_string(cfg.n_iter) + ")");
  }
  if (cfg.n_iter == 1) return cfg.w_init;
  if (iter == cfg.n_iter - 1) return cfg.w_end;
  const double phase = geom::kPi * iter / static_cast<double>(cfg.n_iter - 1);
  return cfg.w_end + 0.5 * (cfg.w_init - cfg.w_end) * (1.0 + std::cos(phase));
}

SearchResult minimize(const Objective& objective, std::vector<Particle> particles,
                      const SearchSpace& space, const AnchorRange& anchor, const SwarmConfig& cfg,
                      Rng& rng) {
  cfg.validate();
  if (particles.empty()) throw ValidationError("minimize needs at least one particle");

  Vec7 v_max;
  for (std::size_t d = 0; d < kDims; ++d) v_max[d] = 0.5 * space.range(d);

  SearchResult result;
  result.best_cost.total = std::numeric_limits<double>::infinity();
  Vec7 global_best{};

  const auto evaluate = [&](Particle& p) {
    const BoxParams box = cost::clamp_to_constraints(from_vector(p.position), anchor);
    const CostBreakdown c = objective(box);
    ++result.evaluations;
    if (c.total < p.best_cost) {
      p.best_cost = c.total;
      p.best_position = to_vector(box);
    }
    return std::pair{box, c};
  };
  const auto absorb = [&](const std::pair<BoxParams, CostBreakdown>& eval) {
    if (eval.second.total < result.best_cost.total) {
      result.best_cost = eval.second;
      result.best_box = eval.first;
    }
  };

  for (auto& p : particles) {
    p.best_cost = std::numeric_limits<double>::infinity();
    absorb(evaluate(p));
  }
  global_best = to_vector(result.best_box);
  if (cfg.record_trace) result.trace.push_back(result.best_cost.total);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int iter = 1; iter < cfg.n_iter; ++iter) {
    const double w = inertia_at(iter, cfg);
    // Synchronous topology: every particle sees the global best of the
    // previous iteration.
    const Vec7 attractor = global_best;
    for (auto& p : particles) {
      for (std::size_t d = 0; d < kDims; ++d) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double to_personal = p.best_position[d] - p.position[d];
        double to_global = attractor[d] - p.position[d];
        if (d == kYaw) {
          to_personal = geom::yaw_difference(p.best_position[d], p.position[d]);
          to_global = geom::yaw_difference(attractor[d], p.position[d]);
        }
        double v = w * p.velocity[d] + cfg.c1 * r1 * to_personal + cfg.c2 * r2 * to_global;
        v = std::clamp(v, -v_max[d], v_max[d]);
        double x = p.position[d] + v;
        if (d == kYaw) {
          x = geom::wrap_yaw(x);
        } else if (x < space.lower[d] || x > space.upper[d]) {
          x = std::clamp(x, space.lower[d], space.upper[d]);
          v = 0.0;
        }
        p.position[d] = x;
        p.velocity[d] = v;
      }
      absorb(evaluate(p));
    }
    global_best = to_vector(result.best_box);
    if (cfg.record_trace) result.trace.push_back(result.best_cost.total);
  }
  return result;
}

cost::BoxObjective make_objective(const assoc::CrossModalProposal& proposal,
                                  const AnchorRange& anchor, const CostWeights& weights) {
  if (proposal.obj_points.empty()) throw ValidationError("cross-modal proposal has no points");
  Point3 centroid = Point3::Zero();
  for (const auto& p : proposal.obj_points) centroid += p;
  centroid /= static_cast<double>(proposal.obj_points.size());
  const CostWeights resolved = cost::resolve_weights(weights, centroid, proposal.ego, anchor);
  return cost::BoxObjective(proposal.obj_points, proposal.ego, proposal.proposal.box,
                            proposal.calib, resolved);
}

SearchResult pso_search(const assoc::CrossModalProposal& proposal, const AnchorRange& anchor,
                        const CostWeights& weights, const SwarmConfig& cfg) {
  cfg.validate();
  const cost::BoxObjective objective = make_objective(proposal, anchor, weights);
  const SearchSpace space = make_search_space(proposal.obj_points, anchor);
  Rng rng(cfg.seed);
  auto particles = init_particles(proposal.obj_points, proposal.center_ray, anchor, cfg, rng);
  return minimize([&objective](const BoxParams& box) { return objective.evaluate(box); },
                  std::move(particles), space, anchor, cfg, rng);
}

GridCounts grid_counts_for_budget(std::size_t budget) {
  if (budget == 0) throw ValidationError("grid budget must be positive");
  constexpr std::array<std::size_t, kDims> kOrder = {0, 1, kYaw, 2, 3, 4, 5};
  constexpr int kDimSamples = 3;
  GridCounts counts;
  counts.fill(1);
  std::size_t product = 1;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto axis : kOrder) {
      const bool is_dim = axis >= 3 && axis < kYaw;
      if (is_dim && counts[axis] >= kDimSamples) continue;
      const std::size_t next = product / static_cast<std::size_t>(counts[axis]) *
                               static_cast<std::size_t>(counts[axis] + 1);
      if (next <= budget) {
        product = next;
        ++counts[axis];
        grew = true;
      }
    }
  }
  return counts;
}

std::vector<double> grid_axis(const SearchSpace& space, std::size_t axis, int count) {
  if (count < 1) throw ValidationError("grid axis needs at least one sample");
  std::vector<double> values(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    values[static_cast<std::size_t>(i)] =
        axis == kYaw ? (i + 0.5) * geom::kPi / count
                     : space.lower[axis] + (i + 1) * space.range(axis) / (count + 1);
  }
  return values;
}

SearchResult grid_search(const Objective& objective, const SearchSpace& space,
                         const GridCounts& counts) {
  std::array<std::vector<double>, kDims> axes;
  for (std::size_t d = 0; d < kDims; ++d) axes[d] = grid_axis(space, d, counts[d]);

  SearchResult result;
  result.best_cost.total = std::numeric_limits<double>::infinity();
  std::array<std::size_t, kDims> idx{};
  while (true) {
    Vec7 v;
    for (std::size_t d = 0; d < kDims; ++d) v[d] = axes[d][idx[d]];
    const BoxParams box = from_vector(v);
    const CostBreakdown c = objective(box);
    ++result.evaluations;
    if (c.total < result.best_cost.total) {
      result.best_cost = c;
      result.best_box = box;
    }
    std::size_t d = 0;
    while (d < kDims && ++idx[d] == axes[d].size()) idx[d++] = 0;
    if (d == kDims) break;
  }
  return result;
}

SearchResult greedy_search(const assoc::CrossModalProposal& proposal, const AnchorRange& anchor,
                           const CostWeights& weights, std::size_t budget) {
  const cost::BoxObjective objective = make_objective(proposal, anchor, weights);
  const SearchSpace space = make_search_space(proposal.obj_points, anchor);
  return grid_search([&objective](const BoxParams& box) { return objective.evaluate(box); }, space,
                     grid_counts_for_budget(budget));
}

}  // namespace novelbox::search
