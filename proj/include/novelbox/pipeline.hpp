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
/// \brief End-to-end annotation: box search per cross-modal pair, conflict
/// resolution, NMS and the novel object bank.
///
/// Bank file (JSONL, one target per line, frames contiguous):
///     {"frame": str, "box": {"x","y","z","l","w","h","ry"}, "class": str,
///      "cost": {"density","lshape","surface","iou2d","total"},
///      "fit_for_alignment": bool, "embedding": [num, ...]?,
///      "provenance": {"frame_id", "camera_id", "proposal_index", "cluster_index"},
///      "verdict": {"not_occluded", "high_res", "mv_aligned"}?, "velocity": [vx, vy]?}
#ifndef NOVELBOX_PIPELINE_HPP_
#define NOVELBOX_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "novelbox/alignment_filter.hpp"
#include "novelbox/association.hpp"
#include "novelbox/config.hpp"
#include "novelbox/cost.hpp"
#include "novelbox/geometry.hpp"
#include "novelbox/io.hpp"
#include "novelbox/scene.hpp"
#include "novelbox/swarm.hpp"

namespace novelbox::pipeline {

using geom::BoxParams;

struct Provenance {
  std::string frame_id;
  std::string camera_id;
  std::size_t proposal_index = 0;
  std::size_t cluster_index = 0;
};

struct NovelObjectTarget {
  BoxParams box;
  std::string class_id;
  std::optional<std::vector<double>> embedding;
  bool fit_for_alignment = false;  ///< never true without an embedding
  std::optional<align::AlignmentVerdict> verdict;
  cost::CostBreakdown search_cost;
  Provenance provenance;
  std::optional<std::vector<double>> velocity;  ///< reserved; nothing writes it
};

struct FrameTargets {
  std::string frame_id;
  std::vector<NovelObjectTarget> targets;
};

struct BankSummary {
  std::size_t frames = 0;
  std::size_t targets = 0;
  std::size_t fit_for_alignment = 0;
  std::map<std::string, std::size_t> per_class;
};

struct NovelObjectBank {
  std::vector<FrameTargets> frames;
  std::string config_fingerprint;

  BankSummary summary() const;
};

/// Greedy suppression in ascending total-cost order (stable on ties) using
/// BEV IoU; a target survives unless it overlaps an earlier survivor by more
/// than `iou_threshold`. Throws ValidationError unless the threshold lies in
/// (0, 1).
std::vector<NovelObjectTarget> nms(std::vector<NovelObjectTarget> targets, double iou_threshold);

/// Seed for one search, mixed from the run seed and the pair's identity so
/// results do not depend on processing order.
std::uint64_t pair_seed(std::uint64_t seed, const std::string& frame_id, std::size_t proposal_index,
                        std::size_t cluster_index);

struct PrepareStats {
  std::size_t searched = 0;
  std::size_t failed = 0;
  std::size_t conflicts_dropped = 0;
  std::size_t nms_dropped = 0;
};

/// Searches every pair, attaches verdicts, keeps the best pair per 2D
/// proposal and runs NMS over the frame. Competing pairs are ranked by total
/// cost plus lambda3 times their surface clip, which removes the range offset
/// of the surface term. Failed searches are logged to stderr and skipped.
/// `threads` <= 0 uses the hardware concurrency.
FrameTargets prepare_targets(const std::string& frame_id,
                             std::span<const assoc::CrossModalProposal> pairs,
                             const PipelineConfig& config, PrepareStats* stats = nullptr);

void write_bank(const std::filesystem::path& path, const NovelObjectBank& bank);
/// Throws ParseError naming the 1-based line of the first schema violation.
NovelObjectBank read_bank(const std::filesystem::path& path);

nlohmann::json target_to_json(const std::string& frame_id, const NovelObjectTarget& target);
NovelObjectTarget target_from_json(const nlohmann::json& j, std::string* frame_id);

/// A loaded frame with its clusters, ready for association.
struct PreparedFrame {
  scene::Scene scene;
  std::vector<assoc::Proposal2D> proposals;
  std::vector<scene::Cluster> clusters;
};

/// Reads one manifest entry. Uses the sidecar ground mask and cluster labels
/// when present, otherwise runs ground removal and clustering.
PreparedFrame load_frame(const io::FrameEntry& entry, const std::vector<geom::CameraCalib>& cameras,
                         const PipelineConfig& config);

struct RunReport {
  std::size_t frames = 0;
  std::size_t frames_skipped = 0;
  std::size_t proposals = 0;
  std::size_t unmatched_proposals = 0;
  std::size_t pairs = 0;
  std::size_t search_failures = 0;
  std::size_t targets = 0;
  std::size_t fit_for_alignment = 0;
  std::map<std::string, std::size_t> per_class;
  std::map<std::string, std::size_t> per_class_fit;
  /// Each rejected target is charged to the first failing filter in the
  /// order occlusion, resolution, multi-view; targets without an embedding
  /// are counted separately.
  std::size_t rejected_occlusion = 0;
  std::size_t rejected_resolution = 0;
  std::size_t rejected_multiview = 0;
  std::size_t missing_embedding = 0;
  std::string config_fingerprint;

  nlohmann::json to_json() const;
};

/// Full annotation run over the configured manifest. Writes the bank and the
/// report when their paths are set.
RunReport run_annotate(const PipelineConfig& config);

/// Searches for one proposal of one frame against every matching cluster.
struct FitResult {
  assoc::CrossModalProposal pair;
  search::SearchResult result;
  align::AlignmentVerdict verdict;
};
std::vector<FitResult> fit_box(const PipelineConfig& config, const std::string& frame_id,
                               std::size_t proposal_index);

struct BenchRow {
  int instance = 0;
  std::string method;  ///< "greedy" or "adaptive"
  std::size_t budget = 0;
  std::size_t evaluations = 0;
  double cost = 0.0;
  double bev_iou = 0.0;
  double seconds = 0.0;
};

/// Greedy and adaptive search on synthetic instances at each budget. The
/// adaptive run uses n_iter = budget / n_swarm. Writes the CSV when
/// config.bench_csv is set.
std::vector<BenchRow> run_bench(const PipelineConfig& config);
void write_bench_csv(const std::filesystem::path& path, std::span<const BenchRow> rows);

}  // namespace novelbox::pipeline

#endif  // NOVELBOX_PIPELINE_HPP_
