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

#include "novelbox/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "novelbox/errors.hpp"
#include "novelbox/synth.hpp"

namespace novelbox::pipeline {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

int worker_count(int requested, std::size_t jobs) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(jobs, 1)));
}

// Runs fn(i) for i in [0, n) on a small pool. Results must be written to
// per-index slots by the caller so order stays deterministic.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int workers = worker_count(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

void ensure_parent(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError("cannot create " + parent.string() + ": " + ec.message());
}

}  // namespace

BankSummary NovelObjectBank::summary() const {
  BankSummary s;
  s.frames = frames.size();
  for (const auto& f : frames) {
    for (const auto& t : f.targets) {
      ++s.targets;
      if (t.fit_for_alignment) ++s.fit_for_alignment;
      ++s.per_class[t.class_id];
    }
  }
  return s;
}

std::vector<NovelObjectTarget> nms(std::vector<NovelObjectTarget> targets, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ValidationError("nms threshold must lie in (0, 1)");
  }
  std::stable_sort(targets.begin(), targets.end(), [](const auto& a, const auto& b) {
    return a.search_cost.total < b.search_cost.total;
  });
  std::vector<NovelObjectTarget> kept;
  for (auto& t : targets) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return geom::iou_bev(k.box, t.box) > iou_threshold;
    });
    if (!suppressed) kept.push_back(std::move(t));
  }
  return kept;
}

std::uint64_t pair_seed(std::uint64_t seed, const std::string& frame_id, std::size_t proposal_index,
                        std::size_t cluster_index) {
  // FNV-1a over the frame id, then splitmix over the indices.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : frame_id) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::uint64_t s = mix(seed);
  s = mix(s ^ h);
  s = mix(s ^ static_cast<std::uint64_t>(proposal_index));
  s = mix(s ^ (static_cast<std::uint64_t>(cluster_index) + 0x5bd1e995ull));
  return s;
}

FrameTargets prepare_targets(const std::string& frame_id,
                             std::span<const assoc::CrossModalProposal> pairs,
                             const PipelineConfig& config, PrepareStats* stats) {
  struct Scored {
    NovelObjectTarget target;
    double rank = 0.0;
  };
  std::vector<std::optional<Scored>> slots(pairs.size());
  parallel_for(pairs.size(), config.threads, [&](std::size_t i) {
    const auto& pair = pairs[i];
    try {
      const auto& anchor = config.anchor(pair.proposal.class_id);
      search::SwarmConfig cfg = config.swarm;
      cfg.record_trace = false;
      cfg.seed = pair_seed(config.seed, frame_id, pair.proposal_index, pair.cluster_index);
      const auto result = search::pso_search(pair, anchor, config.weights, cfg);
      NovelObjectTarget t;
      t.box = result.best_box;
      t.class_id = pair.proposal.class_id;
      t.embedding = pair.proposal.embedding;
      t.search_cost = result.best_cost;
      t.verdict = align::verdict(pair.proposal, t.box, pair.calib, config.filters);
      t.fit_for_alignment = t.verdict->fit_for_alignment && t.embedding.has_value();
      t.provenance = {frame_id, pair.proposal.camera_id, pair.proposal_index, pair.cluster_index};
      // The surface term reaches -C, and C grows with the cluster's range, so
      // raw totals favour distant clusters. Ranking adds the clip back.
      const auto w = cost::resolve_weights(config.weights, pair.cluster.centroid, pair.ego, anchor);
      const double rank = t.search_cost.total + w.lambda3 * *w.c_surface;
      slots[i] = Scored{std::move(t), rank};
    } catch (const std::exception& e) {
      std::cerr << "warning: frame " << frame_id << " proposal " << pair.proposal_index
                << " cluster " << pair.cluster_index << ": search failed: " << e.what() << '\n';
    }
  });

  PrepareStats local;
  local.searched = pairs.size();
  // One-to-many conflicts: keep the best-ranked pair per 2D proposal.
  std::map<std::size_t, Scored> best;
  for (auto& slot : slots) {
    if (!slot) {
      ++local.failed;
      continue;
    }
    const std::size_t key = slot->target.provenance.proposal_index;
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, std::move(*slot));
    } else {
      ++local.conflicts_dropped;
      const auto& cur = it->second;
      const bool better = slot->rank < cur.rank ||
                          (slot->rank == cur.rank &&
                           slot->target.provenance.cluster_index < cur.target.provenance.cluster_index);
      if (better) it->second = std::move(*slot);
    }
  }
  std::vector<NovelObjectTarget> survivors;
  survivors.reserve(best.size());
  for (auto& [key, s] : best) survivors.push_back(std::move(s.target));
  const std::size_t before = survivors.size();

  FrameTargets out;
  out.frame_id = frame_id;
  out.targets = nms(std::move(survivors), config.nms_iou);
  local.nms_dropped = before - out.targets.size();
  if (stats) *stats = local;
  return out;
}

PreparedFrame load_frame(const io::FrameEntry& entry, const std::vector<geom::CameraCalib>& cameras,
                         const PipelineConfig& config) {
  PreparedFrame f;
  f.scene.frame_id = entry.id;
  f.scene.ego = entry.ego;
  f.scene.cameras = cameras;
  f.scene.cloud = scene::load_cloud(entry.cloud, entry.format);
  f.proposals = io::load_proposals(entry.proposals);
  for (const auto& p : f.proposals) {
    config.anchor(p.class_id);
    config.filters.occlusion_threshold(p.class_id);
    f.scene.camera(p.camera_id);
  }
  if (entry.cluster_labels) {
    f.clusters = scene::load_cluster_labels(*entry.cluster_labels, f.scene.cloud);
  } else if (!f.scene.cloud.empty()) {
    const scene::GroundSplit split =
        entry.ground_mask ? scene::load_ground_mask(*entry.ground_mask, f.scene.cloud.size())
                          : scene::remove_ground(f.scene.cloud, config.clustering.ground);
    f.clusters = scene::cluster_objects(f.scene.cloud, split.non_ground, config.clustering.eps,
                                        config.clustering.min_pts);
  }
  return f;
}

nlohmann::json RunReport::to_json() const {
  const auto frac = [this](std::size_t n) {
    return targets == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(targets);
  };
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [cls, n] : per_class) {
    const auto it = per_class_fit.find(cls);
    classes[cls] = {{"targets", n}, {"fit_for_alignment", it == per_class_fit.end() ? 0 : it->second}};
  }
  return {{"frames", frames},
          {"frames_skipped", frames_skipped},
          {"proposals", proposals},
          {"unmatched_proposals", unmatched_proposals},
          {"pairs", pairs},
          {"search_failures", search_failures},
          {"targets", targets},
          {"fit_for_alignment", fit_for_alignment},
          {"fit_fraction", frac(fit_for_alignment)},
          {"per_class", classes},
          {"rejected",
           {{"occlusion", frac(rejected_occlusion)},
            {"resolution", frac(rejected_resolution)},
            {"multiview", frac(rejected_multiview)},
            {"missing_embedding", frac(missing_embedding)}}},
          {"rejected_counts",
           {{"occlusion", rejected_occlusion},
            {"resolution", rejected_resolution},
            {"multiview", rejected_multiview},
            {"missing_embedding", missing_embedding}}},
          {"config_fingerprint", config_fingerprint}};
}

RunReport run_annotate(const PipelineConfig& config) {
  config.validate();
  const io::Manifest manifest = io::load_manifest(config.manifest);
  NovelObjectBank bank;
  bank.config_fingerprint = config.fingerprint();
  RunReport report;
  report.config_fingerprint = bank.config_fingerprint;

  for (const auto& entry : manifest.frames) {
    PreparedFrame frame;
    try {
      frame = load_frame(entry, manifest.cameras, config);
    } catch (const IoError& e) {
      std::cerr << "warning: skipping frame " << entry.id << ": " << e.what() << '\n';
      ++report.frames_skipped;
      continue;
    }
    ++report.frames;
    assoc::AssociationStats astats;
    const auto pairs =
        assoc::associate(frame.scene, frame.proposals, frame.clusters, config.association, &astats);
    report.proposals += astats.proposals;
    report.unmatched_proposals += astats.unmatched;
    report.pairs += astats.pairs;

    PrepareStats pstats;
    FrameTargets targets = prepare_targets(entry.id, pairs, config, &pstats);
    report.search_failures += pstats.failed;
    for (const auto& t : targets.targets) {
      ++report.targets;
      ++report.per_class[t.class_id];
      if (t.fit_for_alignment) {
        ++report.fit_for_alignment;
        ++report.per_class_fit[t.class_id];
        continue;
      }
      const auto& v = *t.verdict;
      if (!v.not_occluded) {
        ++report.rejected_occlusion;
      } else if (!v.high_res) {
        ++report.rejected_resolution;
      } else if (!v.mv_aligned) {
        ++report.rejected_multiview;
      } else {
        ++report.missing_embedding;
      }
    }
    bank.frames.push_back(std::move(targets));
  }

  if (!config.bank_path.empty()) {
    ensure_parent(config.bank_path);
    write_bank(config.bank_path, bank);
  }
  if (!config.report_path.empty()) {
    ensure_parent(config.report_path);
    io::write_json(config.report_path, report.to_json());
  }
  return report;
}

std::vector<FitResult> fit_box(const PipelineConfig& config, const std::string& frame_id,
                               std::size_t proposal_index) {
  config.validate();
  const io::Manifest manifest = io::load_manifest(config.manifest);
  const auto entry = std::find_if(manifest.frames.begin(), manifest.frames.end(),
                                  [&](const io::FrameEntry& e) { return e.id == frame_id; });
  if (entry == manifest.frames.end()) {
    throw ValidationError("no frame '" + frame_id + "' in the manifest");
  }
  const PreparedFrame frame = load_frame(*entry, manifest.cameras, config);
  if (proposal_index >= frame.proposals.size()) {
    throw ValidationError("frame '" + frame_id + "' has " + std::to_string(frame.proposals.size()) +
                          " proposals; index " + std::to_string(proposal_index) + " is out of range");
  }
  const std::span<const assoc::Proposal2D> one(&frame.proposals[proposal_index], 1);
  auto pairs = assoc::associate(frame.scene, one, frame.clusters, config.association);
  std::vector<FitResult> out;
  for (auto& pair : pairs) {
    pair.proposal_index = proposal_index;
    search::SwarmConfig cfg = config.swarm;
    cfg.seed = pair_seed(config.seed, frame_id, proposal_index, pair.cluster_index);
    FitResult r;
    r.result = search::pso_search(pair, config.anchor(pair.proposal.class_id), config.weights, cfg);
    r.verdict = align::verdict(pair.proposal, r.result.best_box, pair.calib, config.filters);
    r.pair = std::move(pair);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<BenchRow> run_bench(const PipelineConfig& config) {
  config.validate();
  const auto& bp = config.bench;
  if (bp.instances < 0) throw ValidationError("bench: instances must be >= 0");
  for (const auto b : bp.budgets) {
    if (b < static_cast<std::size_t>(config.swarm.n_swarm)) {
      throw ValidationError("bench: budget " + std::to_string(b) + " is below one swarm iteration");
    }
  }
  const auto& anchor = config.anchor(bp.class_id);
  const auto cameras = synth::make_camera_ring(synth::CameraRig{});
  const synth::SurfaceSampling sampling;
  constexpr double kGroundZ = -1.8;

  std::vector<BenchRow> rows;
  for (int i = 0; i < bp.instances; ++i) {
    synth::Rng rng(pair_seed(config.seed, "bench", static_cast<std::size_t>(i), 0));
    const auto inst = synth::synth_instance(bp.class_id, anchor, bp.range_min, bp.range_max,
                                            cameras, sampling, kGroundZ, rng);
    for (const auto budget : bp.budgets) {
      for (const char* method : {"greedy", "adaptive"}) {
        const auto t0 = std::chrono::steady_clock::now();
        search::SearchResult r;
        if (std::string(method) == "greedy") {
          r = search::greedy_search(inst.pair, anchor, config.weights, budget);
        } else {
          search::SwarmConfig cfg = config.swarm;
          cfg.n_iter = static_cast<int>(budget / static_cast<std::size_t>(cfg.n_swarm));
          cfg.seed = pair_seed(config.seed, "bench", static_cast<std::size_t>(i), budget);
          r = search::pso_search(inst.pair, anchor, config.weights, cfg);
        }
        const auto t1 = std::chrono::steady_clock::now();
        rows.push_back({i, method, budget, r.evaluations, r.best_cost.total,
                        geom::iou_bev(r.best_box, inst.ground_truth),
                        std::chrono::duration<double>(t1 - t0).count()});
      }
    }
  }
  if (!config.bench_csv.empty()) {
    ensure_parent(config.bench_csv);
    write_bench_csv(config.bench_csv, rows);
  }
  return rows;
}

void write_bench_csv(const std::filesystem::path& path, std::span<const BenchRow> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "instance,method,budget,evaluations,cost,bev_iou,seconds\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.instance << ',' << r.method << ',' << r.budget << ',' << r.evaluations << ','
        << r.cost << ',' << r.bev_iou << ',' << r.seconds << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace novelbox::pipeline
