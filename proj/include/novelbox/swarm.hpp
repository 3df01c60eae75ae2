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
/// \brief Constrained box search: particle swarm with cosine-annealed inertia
/// and an exhaustive grid baseline.
#ifndef NOVELBOX_SWARM_HPP_
#define NOVELBOX_SWARM_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "novelbox/association.hpp"
#include "novelbox/cost.hpp"
#include "novelbox/geometry.hpp"

namespace novelbox::search {

using geom::BoxParams;
using geom::Point3;
using cost::AnchorRange;
using cost::CostBreakdown;
using cost::CostWeights;

/// Search vector layout: x, y, z, l, w, h, ry.
inline constexpr std::size_t kDims = 7;
inline constexpr std::size_t kYaw = 6;
using Vec7 = std::array<double, kDims>;

Vec7 to_vector(const BoxParams& box);
BoxParams from_vector(const Vec7& v);

struct SwarmConfig {
  int n_swarm = 50;
  int n_iter = 3000;
  double w_init = 10.0;
  double w_end = 0.1;
  double c1 = 1.0;
  double c2 = 1.0;
  double c_noise = 0.1;
  std::uint64_t seed = 0;
  bool record_trace = false;

  void validate() const;
  std::size_t evaluations() const {
    return static_cast<std::size_t>(n_swarm) * static_cast<std::size_t>(n_iter);
  }
};

struct SearchResult {
  BoxParams best_box;
  CostBreakdown best_cost;
  std::size_t evaluations = 0;
  std::vector<double> trace;  ///< best-so-far total after each iteration
};

/// Axis-aligned bounds per search coordinate. Positions span the cluster's
/// bounding box dilated by half the anchor's max diagonal; dimensions span
/// the anchor; yaw spans [0, pi).
struct SearchSpace {
  Vec7 lower{};
  Vec7 upper{};

  double range(std::size_t d) const { return upper[d] - lower[d]; }
};

SearchSpace make_search_space(std::span<const Point3> cluster, const AnchorRange& anchor);

struct Particle {
  Vec7 position{};
  Vec7 velocity{};
  Vec7 best_position{};
  double best_cost = 0.0;
};

using Rng = std::mt19937_64;
using Objective = std::function<CostBreakdown(const BoxParams&)>;

/// Half the swarm starts at the cluster point nearest `frustum_ray`, the rest
/// at the cluster centroid; positions get N(0, c_noise * anchor mid-size)
/// noise per axis. Dimensions and yaw are uniform within their bounds and
/// velocities start at zero. Throws ValidationError on an empty cluster.
std::vector<Particle> init_particles(std::span<const Point3> cluster, const assoc::Ray& frustum_ray,
                                     const AnchorRange& anchor, const SwarmConfig& cfg, Rng& rng);

/// Same, seeded from cfg.seed.
std::vector<Particle> init_particles(std::span<const Point3> cluster, const assoc::Ray& frustum_ray,
                                     const AnchorRange& anchor, const SwarmConfig& cfg);

/// w(t) = w_end + (w_init - w_end) * (1 + cos(pi t / (n_iter - 1))) / 2.
/// Throws ValidationError when iter is outside [0, n_iter).
double inertia_at(int iter, const SwarmConfig& cfg);

/// Global-best PSO over `objective`. Iteration 0 evaluates the initial
/// swarm; each later iteration moves and re-evaluates every particle, so the
/// evaluation count is n_swarm * n_iter. Velocities are clamped to half the
/// axis range; positions are projected back into `space` (the blocked
/// velocity component is zeroed) and yaw wraps modulo pi.
SearchResult minimize(const Objective& objective, std::vector<Particle> particles,
                      const SearchSpace& space, const AnchorRange& anchor, const SwarmConfig& cfg,
                      Rng& rng);

/// Adaptive box search for one cross-modal proposal.
SearchResult pso_search(const assoc::CrossModalProposal& proposal, const AnchorRange& anchor,
                        const CostWeights& weights, const SwarmConfig& cfg);

using GridCounts = std::array<int, kDims>;

/// Per-axis grid resolution that fits `budget` evaluations: axes grow in
/// turn (x, y, ry, z, l, w, h) while the product stays within budget; the
/// dimension axes stop at three samples (the anchor range quartiles).
GridCounts grid_counts_for_budget(std::size_t budget);

/// Values sampled along one axis: interior points lower + (i + 1) * range /
/// (n + 1) for positions and dimensions, cell centers (i + 0.5) * pi / n for
/// yaw.
std::vector<double> grid_axis(const SearchSpace& space, std::size_t axis, int count);

/// Exhaustive evaluation of the grid; ties keep the first candidate.
SearchResult grid_search(const Objective& objective, const SearchSpace& space,
                         const GridCounts& counts);

/// Greedy grid baseline at a fixed evaluation budget.
SearchResult greedy_search(const assoc::CrossModalProposal& proposal, const AnchorRange& anchor,
                           const CostWeights& weights, std::size_t budget);

/// Objective bound to a proposal with c_surface resolved.
cost::BoxObjective make_objective(const assoc::CrossModalProposal& proposal,
                                  const AnchorRange& anchor, const CostWeights& weights);

}  // namespace novelbox::search

#endif  // NOVELBOX_SWARM_HPP_
