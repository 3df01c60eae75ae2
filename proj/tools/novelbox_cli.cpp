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

// Command-line front end: annotate, fit-box, bench, synth, report.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "novelbox/errors.hpp"
#include "novelbox/io.hpp"
#include "novelbox/pipeline.hpp"
#include "novelbox/synth.hpp"

namespace {

using namespace novelbox;
using nlohmann::json;

json breakdown_json(const cost::CostBreakdown& c) {
  return {{"density", c.density}, {"lshape", c.lshape}, {"surface", c.surface},
          {"iou2d", c.iou2d}, {"total", c.total}};
}

int cmd_annotate(const std::string& config_path) {
  const auto config = pipeline::load_config(config_path);
  const auto report = pipeline::run_annotate(config);
  std::cout << report.to_json().dump(2) << '\n';
  return 0;
}

int cmd_fit_box(const std::string& config_path, const std::string& frame, std::size_t proposal) {
  const auto config = pipeline::load_config(config_path);
  const auto fits = pipeline::fit_box(config, frame, proposal);
  json out = json::array();
  for (const auto& f : fits) {
    out.push_back({{"cluster_index", f.pair.cluster_index},
                   {"cluster_points", f.pair.obj_points.size()},
                   {"distance_to_ray", f.pair.distance_to_ray},
                   {"box", synth::box_to_json(f.result.best_box)},
                   {"cost", breakdown_json(f.result.best_cost)},
                   {"evaluations", f.result.evaluations},
                   {"verdict",
                    {{"not_occluded", f.verdict.not_occluded},
                     {"high_res", f.verdict.high_res},
                     {"mv_aligned", f.verdict.mv_aligned}}}});
  }
  std::cout << out.dump(2) << '\n';
  if (fits.empty()) std::cerr << "no cluster matched proposal " << proposal << '\n';
  return 0;
}

int cmd_bench(const std::string& config_path) {
  const auto config = pipeline::load_config(config_path);
  const auto rows = pipeline::run_bench(config);
  if (config.bench_csv.empty()) pipeline::write_bench_csv("/dev/stdout", rows);
  else std::cout << "wrote " << rows.size() << " rows to " << config.bench_csv.string() << '\n';
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  const auto spec = synth::spec_from_json(io::read_json(spec_path));
  const auto manifest = synth::write_dataset(spec, out_dir);
  std::cout << manifest.string() << '\n';
  return 0;
}

int cmd_report(const std::string& bank_path) {
  const auto bank = pipeline::read_bank(bank_path);
  const auto s = bank.summary();
  json out = {{"frames", s.frames},
              {"targets", s.targets},
              {"fit_for_alignment", s.fit_for_alignment},
              {"fit_fraction", s.targets == 0 ? 0.0 : double(s.fit_for_alignment) / double(s.targets)},
              {"per_class", s.per_class}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"novelbox: amodal 3D box annotation from 2D proposals and LiDAR"};
  app.require_subcommand(1);

  std::string config_path, frame, spec_path, out_dir, bank_path;
  std::size_t proposal = 0;

  auto* annotate = app.add_subcommand("annotate", "Annotate every frame of a manifest");
  annotate->add_option("--config", config_path, "Pipeline config (JSON)")->required();

  auto* fit = app.add_subcommand("fit-box", "Run one box search and print its cost breakdown");
  fit->add_option("--config", config_path, "Pipeline config (JSON)")->required();
  fit->add_option("--scene", frame, "Frame id from the manifest")->required();
  fit->add_option("--proposal", proposal, "Proposal index within the frame")->required();

  auto* bench = app.add_subcommand("bench", "Compare greedy and adaptive search");
  bench->add_option("--config", config_path, "Pipeline config (JSON)")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--spec", spec_path, "Generator spec (JSON)")->required();
  synth_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Summarize a novel object bank");
  report->add_option("--bank", bank_path, "Bank file (JSONL)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors count as validation errors; --help exits cleanly.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*annotate) return cmd_annotate(config_path);
    if (*fit) return cmd_fit_box(config_path, frame, proposal);
    if (*bench) return cmd_bench(config_path);
    if (*synth_cmd) return cmd_synth(spec_path, out_dir);
    if (*report) return cmd_report(bank_path);
  } catch (const novelbox::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const novelbox::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
