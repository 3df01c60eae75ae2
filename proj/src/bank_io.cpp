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

#include <fstream>
#include <sstream>
#include <string>

#include "novelbox/errors.hpp"
#include "novelbox/pipeline.hpp"
#include "novelbox/synth.hpp"

namespace novelbox::pipeline {

using nlohmann::json;

json target_to_json(const std::string& frame_id, const NovelObjectTarget& t) {
  json j;
  j["frame"] = frame_id;
  j["box"] = synth::box_to_json(t.box);
  j["class"] = t.class_id;
  j["cost"] = {{"density", t.search_cost.density},
               {"lshape", t.search_cost.lshape},
               {"surface", t.search_cost.surface},
               {"iou2d", t.search_cost.iou2d},
               {"total", t.search_cost.total}};
  j["fit_for_alignment"] = t.fit_for_alignment;
  if (t.embedding) j["embedding"] = *t.embedding;
  j["provenance"] = {{"frame_id", t.provenance.frame_id},
                     {"camera_id", t.provenance.camera_id},
                     {"proposal_index", t.provenance.proposal_index},
                     {"cluster_index", t.provenance.cluster_index}};
  if (t.verdict) {
    j["verdict"] = {{"not_occluded", t.verdict->not_occluded},
                    {"high_res", t.verdict->high_res},
                    {"mv_aligned", t.verdict->mv_aligned}};
  }
  if (t.velocity) j["velocity"] = *t.velocity;
  return j;
}

NovelObjectTarget target_from_json(const json& j, std::string* frame_id) {
  if (!j.is_object()) throw ValidationError("target must be a JSON object");
  NovelObjectTarget t;
  if (frame_id) *frame_id = j.at("frame").get<std::string>();
  t.box = synth::box_from_json(j.at("box"));
  t.class_id = j.at("class").get<std::string>();
  const auto& c = j.at("cost");
  t.search_cost = {c.at("density").get<double>(), c.at("lshape").get<double>(),
                   c.at("surface").get<double>(), c.at("iou2d").get<double>(),
                   c.at("total").get<double>()};
  t.fit_for_alignment = j.at("fit_for_alignment").get<bool>();
  if (j.contains("embedding") && !j["embedding"].is_null()) {
    t.embedding = j["embedding"].get<std::vector<double>>();
  }
  const auto& p = j.at("provenance");
  t.provenance = {p.at("frame_id").get<std::string>(), p.at("camera_id").get<std::string>(),
                  p.at("proposal_index").get<std::size_t>(), p.at("cluster_index").get<std::size_t>()};
  if (j.contains("verdict")) {
    const auto& v = j["verdict"];
    align::AlignmentVerdict verdict;
    verdict.not_occluded = v.at("not_occluded").get<bool>();
    verdict.high_res = v.at("high_res").get<bool>();
    verdict.mv_aligned = v.at("mv_aligned").get<bool>();
    verdict.fit_for_alignment = verdict.not_occluded && verdict.high_res && verdict.mv_aligned;
    t.verdict = verdict;
  }
  if (j.contains("velocity") && !j["velocity"].is_null()) {
    t.velocity = j["velocity"].get<std::vector<double>>();
  }
  if (!t.box.valid()) throw ValidationError("box dimensions must be positive and finite");
  if (t.fit_for_alignment && !t.embedding) {
    throw ValidationError("fit_for_alignment target has no embedding");
  }
  return t;
}

void write_bank(const std::filesystem::path& path, const NovelObjectBank& bank) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write bank " + path.string());
  for (const auto& frame : bank.frames) {
    for (const auto& t : frame.targets) out << target_to_json(frame.frame_id, t).dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

NovelObjectBank read_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open bank " + path.string());
  NovelObjectBank bank;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string frame_id;
    NovelObjectTarget t;
    try {
      t = target_from_json(json::parse(line), &frame_id);
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (bank.frames.empty() || bank.frames.back().frame_id != frame_id) {
      bank.frames.push_back({frame_id, {}});
    }
    bank.frames.back().targets.push_back(std::move(t));
  }
  return bank;
}

}  // namespace novelbox::pipeline
