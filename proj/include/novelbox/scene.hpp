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
/// \brief Point cloud ingestion, ground removal and object clustering.
#ifndef NOVELBOX_SCENE_HPP_
#define NOVELBOX_SCENE_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "novelbox/geometry.hpp"

namespace novelbox::scene {

using geom::CameraCalib;
using geom::EgoPose;
using geom::Point3;
using geom::PointCloud;

struct Scene {
  std::string frame_id;
  PointCloud cloud;
  EgoPose ego;
  std::vector<CameraCalib> cameras;

  /// Throws ValidationError for an unknown id.
  const CameraCalib& camera(const std::string& camera_id) const;
  void validate() const;
};

struct Cluster {
  std::vector<std::size_t> point_indices;
  Point3 centroid = Point3::Zero();

  PointCloud points(const PointCloud& cloud) const;
};

/// Builds a cluster and its centroid. Throws ValidationError if `indices`
/// is empty or out of range.
Cluster make_cluster(const PointCloud& cloud, std::vector<std::size_t> indices);

enum class CloudFormat {
  kBinaryXYZ,   ///< little-endian float32 x, y, z records
  kBinaryXYZI,  ///< little-endian float32 x, y, z, intensity records
  kCsv,         ///< header row naming at least x, y, z columns
};

/// Parses "bin3" / "xyz", "bin4" / "xyzi" / "kitti", or "csv".
CloudFormat parse_cloud_format(const std::string& name);

/// Reads a cloud. Binary files whose size is not a multiple of the record
/// size raise ParseError naming the byte offset of the partial record.
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format);

/// Writes a cloud; XYZI records carry zero intensity.
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format);

struct GroundParams {
  double cell_size = 4.0;         ///< regional plane footprint, meters
  double height_threshold = 0.25; ///< max height above the local plane, meters
  double seed_quantile = 0.3;     ///< fraction of lowest points per cell seeding the fit
  int refit_rounds = 3;
  double max_slope = 0.35;        ///< planes steeper than this are rejected
};

struct GroundSplit {
  std::vector<std::size_t> ground;
  std::vector<std::size_t> non_ground;
};

/// Regional least-squares plane fitting over a square grid. Cells without a
/// usable plane borrow the nearest fitted cell's plane, else the global one.
/// Throws ValidationError on an empty cloud.
GroundSplit remove_ground(const PointCloud& cloud, const GroundParams& params = {});

/// DBSCAN over Euclidean 3D distance restricted to `non_ground`. Clusters are
/// numbered in order of their first core point as `non_ground` is scanned.
std::vector<Cluster> cluster_objects(const PointCloud& cloud,
                                     std::span<const std::size_t> non_ground, double eps,
                                     int min_pts);

/// Sidecar ground mask: one 0/1 per line, one line per point.
GroundSplit load_ground_mask(const std::filesystem::path& path, std::size_t num_points);

/// Sidecar cluster labels: one integer per line (-1 = noise). Clusters are
/// ordered by label value.
std::vector<Cluster> load_cluster_labels(const std::filesystem::path& path,
                                         const PointCloud& cloud);

}  // namespace novelbox::scene

#endif  // NOVELBOX_SCENE_HPP_
