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
/// \brief JSON encodings for calibrations, per-frame proposal files and the
/// dataset manifest.
///
/// Proposal file: a JSON array of
///     {"camera_id": str, "box": [u_min, v_min, u_max, v_max], "class": str,
///      "score": num, "mask_pixel_count": int, "crop_w": int, "crop_h": int,
///      "embedding": [num, ...]}            // embedding optional
///
/// Manifest:
///     {"cameras": [{"camera_id": str, "extrinsic": 4x4 rows, "intrinsic": 3x3 rows,
///                   "image_width": int, "image_height": int}, ...],
///      "frames": [{"id": str, "cloud": path, "format": "bin4", "proposals": path,
///                  "ego": [x, y, z], "ground_mask": path?, "cluster_labels": path?,
///                  "ground_truth": path?}, ...]}
///
/// Manifest paths are relative to the manifest's directory.
#ifndef NOVELBOX_IO_HPP_
#define NOVELBOX_IO_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "novelbox/association.hpp"
#include "novelbox/geometry.hpp"
#include "novelbox/scene.hpp"

namespace novelbox::io {

nlohmann::json calib_to_json(const geom::CameraCalib& calib);
geom::CameraCalib calib_from_json(const nlohmann::json& j);

nlohmann::json proposal_to_json(const assoc::Proposal2D& proposal);
assoc::Proposal2D proposal_from_json(const nlohmann::json& j);

std::vector<assoc::Proposal2D> load_proposals(const std::filesystem::path& path);
void write_proposals(const std::filesystem::path& path, std::span<const assoc::Proposal2D> proposals);

struct FrameEntry {
  std::string id;
  std::filesystem::path cloud;
  scene::CloudFormat format = scene::CloudFormat::kBinaryXYZI;
  std::filesystem::path proposals;
  geom::EgoPose ego;
  std::optional<std::filesystem::path> ground_mask;
  std::optional<std::filesystem::path> cluster_labels;
  std::optional<std::filesystem::path> ground_truth;
};

struct Manifest {
  std::vector<geom::CameraCalib> cameras;
  std::vector<FrameEntry> frames;
};

/// Parses and validates the manifest; relative paths become absolute against
/// its directory.
Manifest load_manifest(const std::filesystem::path& path);

/// Writes the manifest with paths relative to `path`'s directory where
/// possible.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace novelbox::io

#endif  // NOVELBOX_IO_HPP_
