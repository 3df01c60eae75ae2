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
/// \brief Synthetic scenes with known ground truth: a ground disc, boxes
/// whose sensor-facing faces are Poisson-disk sampled, and the 2D proposals
/// a perfect detector would emit on a ring of pinhole cameras.
#ifndef NOVELBOX_SYNTH_HPP_
#define NOVELBOX_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "novelbox/association.hpp"
#include "novelbox/cost.hpp"
#include "novelbox/geometry.hpp"
#include "novelbox/scene.hpp"

namespace novelbox::synth {

using geom::BoxParams;
using geom::CameraCalib;
using geom::Point3;
using geom::PointCloud;
using Rng = std::mt19937_64;

struct CameraRig {
  int count = 6;
  int image_width = 1600;
  int image_height = 900;
  double focal = 1000.0;
  double mount_radius = 0.5;  ///< horizontal offset from the LiDAR along each camera's axis
  double mount_z = -0.3;
};

/// Cameras evenly spaced in azimuth, camera i looking along 2*pi*i/count.
std::vector<CameraCalib> make_camera_ring(const CameraRig& rig = {});

struct SurfaceSampling {
  double spacing_per_meter = 0.01;  ///< Poisson-disk radius grows with range
  double min_spacing = 0.12;
  double max_spacing = 0.25;
  double noise = 0.01;              ///< per-axis Gaussian jitter, meters
  bool sample_top = true;
  double bottom_clearance = 0.3;    ///< unsampled band above the ground (undercarriage)
};

struct ExplicitInstance {
  int frame = 0;
  std::string class_id;
  BoxParams box;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  int frames = 1;
  int instances_per_frame = 5;
  std::map<std::string, double> class_mix = {{"car", 1.0}};
  double range_min = 5.0;
  double range_max = 40.0;
  double ground_z = -1.8;
  double ground_extent = 45.0;
  double ground_spacing = 0.35;
  SurfaceSampling surface;
  double mask_ratio_min = 0.3;
  double mask_ratio_max = 1.0;
  int embedding_dim = 16;
  std::vector<ExplicitInstance> instances;  ///< placed in addition to random ones
  CameraRig rig;
  std::map<std::string, cost::AnchorRange> anchors;

  static SynthSpec defaults();
  void validate() const;
};

/// Reads a spec; absent keys keep their defaults. Keys mirror the struct
/// fields ("surface", "rig" and "anchors" are nested objects; "instances" is
/// an array of {"frame", "class", "box": {x, y, z, l, w, h, ry}}).
SynthSpec spec_from_json(const nlohmann::json& j);

/// Bridson Poisson-disk samples in [0, width] x [0, height].
std::vector<Eigen::Vector2d> poisson_disk(double width, double height, double radius, Rng& rng);

/// Points on the faces of `box` visible from `sensor` (side faces whose
/// outward normal points toward it, plus the top when enabled and visible).
PointCloud sample_visible_faces(const BoxParams& box, const Point3& sensor, double ground_z,
                                const SurfaceSampling& sampling, Rng& rng);

/// A box resting on the ground, dims uniform in the anchor, range uniform in
/// [range_min, range_max], azimuth and yaw uniform.
BoxParams sample_box(const cost::AnchorRange& anchor, double range_min, double range_max,
                     double ground_z, Rng& rng);

/// Proposals a perfect detector would produce: one per camera that sees the
/// box, box = project_box_to_2d(gt).
std::vector<assoc::Proposal2D> proposals_for_box(const BoxParams& box, const std::string& class_id,
                                                 const std::vector<CameraCalib>& cameras,
                                                 double mask_ratio, int embedding_dim, Rng& rng);

struct GroundTruthObject {
  int instance_id = 0;
  std::string class_id;
  BoxParams box;
  std::size_t num_points = 0;
};

struct SynthFrame {
  scene::Scene scene;
  std::vector<assoc::Proposal2D> proposals;
  std::vector<GroundTruthObject> objects;
  std::vector<int> point_labels;  ///< -1 ground, otherwise instance_id
};

/// Throws ValidationError when an explicit instance is visible to no camera
/// or random placement cannot find free space.
SynthFrame synth_frame(const SynthSpec& spec, int frame_index);

/// A single isolated object ready for box search: the ground-truth cluster
/// paired with the proposal from the camera that sees most of it.
struct SynthInstance {
  BoxParams ground_truth;
  assoc::CrossModalProposal pair;
};

SynthInstance synth_instance(const std::string& class_id, const cost::AnchorRange& anchor,
                             double range_min, double range_max,
                             const std::vector<CameraCalib>& cameras,
                             const SurfaceSampling& sampling, double ground_z, Rng& rng);

/// Writes `spec.frames` frames plus scenes.json into `out_dir`: per frame a
/// bin4 cloud, a proposal file, a ground-truth JSON and per-point labels.
std::filesystem::path write_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir);

nlohmann::json box_to_json(const BoxParams& box);
BoxParams box_from_json(const nlohmann::json& j);

}  // namespace novelbox::synth

#endif  // NOVELBOX_SYNTH_HPP_
