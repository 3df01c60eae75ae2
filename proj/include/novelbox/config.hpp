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
/// \brief Pipeline configuration. Every tunable constant is a named field
/// whose default is the published value (or a documented project default
/// where none was published).
///
/// JSON schema (all keys optional):
///
///     {
///       "seed": 0, "threads": 0, "nms_iou": 0.5,
///       "input":  {"manifest": "scenes.json"},
///       "output": {"bank": "bank.jsonl", "report": "report.json", "bench_csv": "bench.csv"},
///       "cost":   {"lambda1": 5.0, "lambda2": 1.0, "lambda3": 1.0, "gamma": 3.0,
///                  "c_surface": null},
///       "swarm":  {"n_swarm": 50, "n_iter": 3000, "w_init": 10.0, "w_end": 0.1,
///                  "c1": 1.0, "c2": 1.0, "c_noise": 0.1},
///       "anchors": {"car": {"min": [3.9, 1.6, 1.4], "max": [5.3, 2.1, 1.9]}, ...},
///       "filters": {"tau_occ": {"car": 0.5, ...}, "tau_res": 4000, "tau_mv": 0.5},
///       "association": {"tau_match": 2.0, "d_min": 0.5, "d_max": 60.0,
///                       "criterion": "closest_point" | "centroid"},
///       "clustering": {"eps": 0.5, "min_pts": 5, "ground_cell": 4.0,
///                      "ground_height": 0.25, "ground_seed_quantile": 0.3,
///                      "ground_refit_rounds": 3, "ground_max_slope": 0.35},
///       "bench": {"instances": 50, "budgets": [37500, 75000, 150000],
///                 "class": "car", "range": [5, 40]}
///     }
///
/// Relative paths resolve against the config file's directory. A given
/// "anchors" or "tau_occ" object replaces the default table entry by entry.
#ifndef NOVELBOX_CONFIG_HPP_
#define NOVELBOX_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "novelbox/alignment_filter.hpp"
#include "novelbox/association.hpp"
#include "novelbox/cost.hpp"
#include "novelbox/scene.hpp"
#include "novelbox/swarm.hpp"

namespace novelbox::pipeline {

struct ClusteringParams {
  double eps = 0.5;
  int min_pts = 5;
  scene::GroundParams ground;
};

struct BenchParams {
  int instances = 50;
  std::vector<std::size_t> budgets = {37500, 75000, 150000};
  std::string class_id = "car";
  double range_min = 5.0;
  double range_max = 40.0;
};

struct PipelineConfig {
  cost::CostWeights weights;
  search::SwarmConfig swarm;
  std::map<std::string, cost::AnchorRange> anchors;
  align::FilterThresholds filters;
  assoc::AssociationParams association;
  ClusteringParams clustering;
  BenchParams bench;
  double nms_iou = 0.5;
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0 = hardware concurrency

  std::filesystem::path manifest;
  std::filesystem::path bank_path;
  std::filesystem::path report_path;
  std::filesystem::path bench_csv;

  static PipelineConfig defaults();
  /// Throws ValidationError on any out-of-range constant, or when a class has
  /// an anchor but no occlusion threshold (or vice versa).
  void validate() const;
  /// Throws ValidationError for a class that has no anchor.
  const cost::AnchorRange& anchor(const std::string& class_id) const;
  /// Stable hex digest of the configuration constants (paths excluded).
  std::string fingerprint() const;
};

/// Project default anchors; the car entry is (3.9-5.3, 1.6-2.1, 1.4-1.9) m.
std::map<std::string, cost::AnchorRange> default_anchors();

PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json config_to_json(const PipelineConfig& config, bool include_paths = true);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace novelbox::pipeline

#endif  // NOVELBOX_CONFIG_HPP_
