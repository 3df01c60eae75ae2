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

#include "novelbox/io.hpp"

#include <fstream>

#include "novelbox/errors.hpp"

namespace novelbox::io {

using nlohmann::json;

namespace {

std::string format_name(scene::CloudFormat f) {
  switch (f) {
    case scene::CloudFormat::kBinaryXYZ:
      return "bin3";
    case scene::CloudFormat::kBinaryXYZI:
      return "bin4";
    case scene::CloudFormat::kCsv:
      return "csv";
  }
  return "bin4";
}

// Paths are stored relative to the manifest's directory when possible.
std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
  const auto abs_p = std::filesystem::absolute(p).lexically_normal();
  const auto abs_base = std::filesystem::absolute(base.empty() ? "." : base).lexically_normal();
  const auto rel = abs_p.lexically_relative(abs_base);
  return rel.empty() ? abs_p.generic_string() : rel.generic_string();
}

}  // namespace

json calib_to_json(const geom::CameraCalib& calib) {
  json ext = json::array();
  for (int r = 0; r < 4; ++r) {
    ext.push_back({calib.extrinsic(r, 0), calib.extrinsic(r, 1), calib.extrinsic(r, 2),
                   calib.extrinsic(r, 3)});
  }
  json intr = json::array();
  for (int r = 0; r < 3; ++r) {
    intr.push_back({calib.intrinsic(r, 0), calib.intrinsic(r, 1), calib.intrinsic(r, 2)});
  }
  return {{"camera_id", calib.camera_id},
          {"extrinsic", ext},
          {"intrinsic", intr},
          {"image_width", calib.image_width},
          {"image_height", calib.image_height}};
}

geom::CameraCalib calib_from_json(const json& j) {
  geom::CameraCalib c;
  try {
    c.camera_id = j.at("camera_id").get<std::string>();
    const auto& ext = j.at("extrinsic");
    const auto& intr = j.at("intrinsic");
    if (ext.size() != 4 || intr.size() != 3) throw ValidationError("calibration matrix shape");
    for (int r = 0; r < 4; ++r) {
      if (ext[r].size() != 4) throw ValidationError("extrinsic rows must have 4 entries");
      for (int k = 0; k < 4; ++k) c.extrinsic(r, k) = ext[r][k].get<double>();
    }
    for (int r = 0; r < 3; ++r) {
      if (intr[r].size() != 3) throw ValidationError("intrinsic rows must have 3 entries");
      for (int k = 0; k < 3; ++k) c.intrinsic(r, k) = intr[r][k].get<double>();
    }
    c.image_width = j.at("image_width").get<int>();
    c.image_height = j.at("image_height").get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("camera calibration: ") + e.what());
  }
  c.validate();
  return c;
}

json proposal_to_json(const assoc::Proposal2D& p) {
  json j = {{"camera_id", p.camera_id},
            {"box", {p.box.u_min, p.box.v_min, p.box.u_max, p.box.v_max}},
            {"class", p.class_id},
            {"score", p.score},
            {"mask_pixel_count", p.mask_pixel_count},
            {"crop_w", p.crop_w},
            {"crop_h", p.crop_h}};
  if (p.embedding) j["embedding"] = *p.embedding;
  return j;
}

assoc::Proposal2D proposal_from_json(const json& j) {
  assoc::Proposal2D p;
  try {
    p.camera_id = j.at("camera_id").get<std::string>();
    const auto box = j.at("box").get<std::vector<double>>();
    if (box.size() != 4) throw ValidationError("proposal box must have 4 entries");
    p.box = {box[0], box[1], box[2], box[3]};
    p.class_id = j.at("class").get<std::string>();
    p.score = j.value("score", 1.0);
    p.mask_pixel_count = j.at("mask_pixel_count").get<long>();
    p.crop_w = j.at("crop_w").get<int>();
    p.crop_h = j.at("crop_h").get<int>();
    if (j.contains("embedding") && !j["embedding"].is_null()) {
      p.embedding = j["embedding"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("proposal: ") + e.what());
  }
  p.validate();
  return p;
}

std::vector<assoc::Proposal2D> load_proposals(const std::filesystem::path& path) {
  const json j = read_json(path);
  if (!j.is_array()) throw ParseError(path.string() + ": proposal file must hold a JSON array");
  std::vector<assoc::Proposal2D> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      out.push_back(proposal_from_json(j[i]));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + " [" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

void write_proposals(const std::filesystem::path& path,
                     std::span<const assoc::Proposal2D> proposals) {
  json j = json::array();
  for (const auto& p : proposals) j.push_back(proposal_to_json(p));
  write_json(path, j);
}

Manifest load_manifest(const std::filesystem::path& path) {
  const json j = read_json(path);
  const auto base = path.parent_path();
  const auto abs = [&base](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  Manifest m;
  try {
    for (const auto& c : j.at("cameras")) m.cameras.push_back(calib_from_json(c));
    if (m.cameras.empty()) throw ValidationError("manifest lists no cameras");
    for (const auto& f : j.at("frames")) {
      FrameEntry e;
      e.id = f.at("id").get<std::string>();
      e.cloud = abs(f.at("cloud").get<std::string>());
      e.format = scene::parse_cloud_format(f.value("format", std::string("bin4")));
      e.proposals = abs(f.at("proposals").get<std::string>());
      if (f.contains("ego")) {
        const auto ego = f["ego"].get<std::vector<double>>();
        if (ego.size() != 3) throw ValidationError("frame ego must have 3 entries");
        e.ego = {ego[0], ego[1], ego[2]};
      }
      if (f.contains("ground_mask")) e.ground_mask = abs(f["ground_mask"].get<std::string>());
      if (f.contains("cluster_labels")) e.cluster_labels = abs(f["cluster_labels"].get<std::string>());
      if (f.contains("ground_truth")) e.ground_truth = abs(f["ground_truth"].get<std::string>());
      m.frames.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  const auto base = path.parent_path();
  json cams = json::array();
  for (const auto& c : manifest.cameras) cams.push_back(calib_to_json(c));
  json frames = json::array();
  for (const auto& f : manifest.frames) {
    json e = {{"id", f.id},
              {"cloud", relative_to(f.cloud, base)},
              {"format", format_name(f.format)},
              {"proposals", relative_to(f.proposals, base)},
              {"ego", {f.ego.x, f.ego.y, f.ego.z}}};
    if (f.ground_mask) e["ground_mask"] = relative_to(*f.ground_mask, base);
    if (f.cluster_labels) e["cluster_labels"] = relative_to(*f.cluster_labels, base);
    if (f.ground_truth) e["ground_truth"] = relative_to(*f.ground_truth, base);
    frames.push_back(std::move(e));
  }
  write_json(path, {{"cameras", cams}, {"frames", frames}});
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace novelbox::io
