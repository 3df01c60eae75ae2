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

#include "novelbox/scene.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "novelbox/errors.hpp"

namespace novelbox::scene {

namespace {

std::vector<char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

float read_le_float(const char* bytes) {
  std::uint32_t bits;
  std::memcpy(&bits, bytes, sizeof(bits));
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
  }
  float value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

void write_le_float(std::ostream& out, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
  }
  out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  return fields;
}

PointCloud load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  PointCloud cloud;
  if (!std::getline(in, line)) return cloud;
  const auto header = split_csv(line);
  std::array<std::size_t, 3> col{};
  const std::array<const char*, 3> names = {"x", "y", "z"};
  for (int k = 0; k < 3; ++k) {
    const auto it = std::find(header.begin(), header.end(), names[k]);
    if (it == header.end()) {
      throw ParseError(path.string() + ": CSV header lacks column '" + names[k] + "'");
    }
    col[k] = static_cast<std::size_t>(it - header.begin());
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    Point3 p;
    for (int k = 0; k < 3; ++k) {
      if (col[k] >= fields.size()) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": missing column");
      }
      try {
        std::size_t used = 0;
        p[k] = std::stod(fields[col[k]], &used);
        if (used != fields[col[k]].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                         fields[col[k]] + "'");
      }
    }
    cloud.push_back(p);
  }
  return cloud;
}

struct Plane {
  double a = 0.0;  // z = a x + b y + c
  double b = 0.0;
  double c = 0.0;
  double height_of(const Point3& p) const { return p.z() - (a * p.x() + b * p.y() + c); }
};

// Least-squares plane fitted to `seeds`, then refitted to every point of
// `pool` within the height threshold. Empty result when the fit is
// ill-posed or too steep.
std::optional<Plane> fit_ground_plane(const PointCloud& cloud, std::span<const std::size_t> pool,
                                      std::vector<std::size_t> idx, const GroundParams& params) {
  std::optional<Plane> plane;
  for (int round = 0; round < params.refit_rounds; ++round) {
    if (idx.size() < 3) return plane;
    Eigen::MatrixXd a(idx.size(), 3);
    Eigen::VectorXd z(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const Point3& p = cloud[idx[i]];
      a(i, 0) = p.x();
      a(i, 1) = p.y();
      a(i, 2) = 1.0;
      z(i) = p.z();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-9);
    if (qr.rank() < 3) return plane;
    const Eigen::Vector3d coef = qr.solve(z);
    const Plane next{coef[0], coef[1], coef[2]};
    if (std::hypot(next.a, next.b) > params.max_slope) return plane;
    plane = next;

    std::vector<std::size_t> inliers;
    for (const auto i : pool) {
      if (std::abs(plane->height_of(cloud[i])) <= params.height_threshold) inliers.push_back(i);
    }
    if (inliers == idx) break;
    idx = std::move(inliers);
  }
  return plane;
}

// Seeds: the lowest `fraction` of the points that also lie within the height
// threshold of the lowest-point representative (mean of the three lowest).
// The band keeps object bottoms out of cells that are mostly object.
std::vector<std::size_t> ground_seeds(const PointCloud& cloud, std::vector<std::size_t> idx,
                                      const GroundParams& params) {
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return cloud[i].z() < cloud[j].z(); });
  const std::size_t lpr_count = std::min<std::size_t>(idx.size(), 3);
  double lpr = 0.0;
  for (std::size_t k = 0; k < lpr_count; ++k) lpr += cloud[idx[k]].z();
  lpr /= static_cast<double>(std::max<std::size_t>(lpr_count, 1));
  const auto keep = std::max<std::size_t>(
      lpr_count, static_cast<std::size_t>(std::ceil(params.seed_quantile * static_cast<double>(idx.size()))));
  std::vector<std::size_t> seeds;
  for (std::size_t k = 0; k < std::min(keep, idx.size()); ++k) {
    if (cloud[idx[k]].z() > lpr + params.height_threshold) break;
    seeds.push_back(idx[k]);
  }
  return seeds;
}

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093u;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663u;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791u;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

const CameraCalib& Scene::camera(const std::string& camera_id) const {
  for (const auto& cam : cameras) {
    if (cam.camera_id == camera_id) return cam;
  }
  throw ValidationError("frame '" + frame_id + "': unknown camera '" + camera_id + "'");
}

void Scene::validate() const {
  if (cameras.empty()) throw ValidationError("frame '" + frame_id + "' has no cameras");
  for (const auto& cam : cameras) cam.validate();
  for (const auto& p : cloud) {
    if (!p.allFinite()) throw ValidationError("frame '" + frame_id + "' has non-finite points");
  }
}

PointCloud Cluster::points(const PointCloud& cloud) const {
  PointCloud out;
  out.reserve(point_indices.size());
  for (const auto i : point_indices) out.push_back(cloud[i]);
  return out;
}

Cluster make_cluster(const PointCloud& cloud, std::vector<std::size_t> indices) {
  if (indices.empty()) throw ValidationError("cluster must be non-empty");
  Point3 sum = Point3::Zero();
  for (const auto i : indices) {
    if (i >= cloud.size()) throw ValidationError("cluster index out of range");
    sum += cloud[i];
  }
  Cluster c;
  c.centroid = sum / static_cast<double>(indices.size());
  c.point_indices = std::move(indices);
  return c;
}

CloudFormat parse_cloud_format(const std::string& name) {
  if (name == "bin3" || name == "xyz") return CloudFormat::kBinaryXYZ;
  if (name == "bin4" || name == "xyzi" || name == "kitti") return CloudFormat::kBinaryXYZI;
  if (name == "csv") return CloudFormat::kCsv;
  throw ValidationError("unknown cloud format '" + name + "'");
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  if (format == CloudFormat::kCsv) return load_csv(path);

  const std::size_t floats = format == CloudFormat::kBinaryXYZ ? 3 : 4;
  const std::size_t record = floats * sizeof(float);
  const auto bytes = read_bytes(path);
  if (bytes.size() % record != 0) {
    const std::size_t offset = bytes.size() - bytes.size() % record;
    throw ParseError(path.string() + ": truncated record at byte offset " +
                     std::to_string(offset) + " (record size " + std::to_string(record) + ")");
  }
  PointCloud cloud;
  cloud.reserve(bytes.size() / record);
  for (std::size_t off = 0; off < bytes.size(); off += record) {
    const char* r = bytes.data() + off;
    cloud.emplace_back(read_le_float(r), read_le_float(r + 4), read_le_float(r + 8));
  }
  return cloud;
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format) {
  std::ofstream out(path, format == CloudFormat::kCsv ? std::ios::out : std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == CloudFormat::kCsv) {
    out.precision(17);
    out << "x,y,z\n";
    for (const auto& p : cloud) out << p.x() << ',' << p.y() << ',' << p.z() << '\n';
  } else {
    for (const auto& p : cloud) {
      write_le_float(out, static_cast<float>(p.x()));
      write_le_float(out, static_cast<float>(p.y()));
      write_le_float(out, static_cast<float>(p.z()));
      if (format == CloudFormat::kBinaryXYZI) write_le_float(out, 0.0f);
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

GroundSplit remove_ground(const PointCloud& cloud, const GroundParams& params) {
  if (cloud.empty()) throw ValidationError("remove_ground: empty cloud");
  if (!(params.cell_size > 0.0) || !(params.height_threshold > 0.0) || params.refit_rounds < 1) {
    throw ValidationError("remove_ground: invalid parameters");
  }

  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto cx = static_cast<std::int64_t>(std::floor(cloud[i].x() / params.cell_size));
    const auto cy = static_cast<std::int64_t>(std::floor(cloud[i].y() / params.cell_size));
    cells[{cx, cy}].push_back(i);
  }

  std::vector<std::size_t> all(cloud.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::optional<Plane> global = fit_ground_plane(cloud, all, ground_seeds(cloud, all, params), params);
  if (!global) {
    double zmin = std::numeric_limits<double>::infinity();
    for (const auto& p : cloud) zmin = std::min(zmin, p.z());
    global = Plane{0.0, 0.0, zmin};
  }

  std::map<std::pair<std::int64_t, std::int64_t>, Plane> fitted;
  for (const auto& [key, idx] : cells) {
    if (auto plane = fit_ground_plane(cloud, idx, ground_seeds(cloud, idx, params), params)) {
      fitted.emplace(key, *plane);
    }
  }

  GroundSplit split;
  for (const auto& [key, idx] : cells) {
    const Plane* plane = &*global;
    if (auto it = fitted.find(key); it != fitted.end()) {
      plane = &it->second;
    } else {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (const auto& [other, p] : fitted) {
        const std::int64_t dx = other.first - key.first;
        const std::int64_t dy = other.second - key.second;
        if (dx * dx + dy * dy < best) {
          best = dx * dx + dy * dy;
          plane = &p;
        }
      }
    }
    for (const auto i : idx) {
      (plane->height_of(cloud[i]) <= params.height_threshold ? split.ground : split.non_ground)
          .push_back(i);
    }
  }
  std::sort(split.ground.begin(), split.ground.end());
  std::sort(split.non_ground.begin(), split.non_ground.end());
  return split;
}

std::vector<Cluster> cluster_objects(const PointCloud& cloud,
                                     std::span<const std::size_t> non_ground, double eps,
                                     int min_pts) {
  if (!(eps > 0.0)) throw ValidationError("cluster_objects: eps must be positive");
  if (min_pts < 1) throw ValidationError("cluster_objects: min_pts must be >= 1");

  const auto key_of = [eps](const Point3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / eps)),
                   static_cast<std::int64_t>(std::floor(p.y() / eps)),
                   static_cast<std::int64_t>(std::floor(p.z() / eps))};
  };
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> grid;
  for (std::size_t k = 0; k < non_ground.size(); ++k) {
    if (non_ground[k] >= cloud.size()) throw ValidationError("cluster_objects: index out of range");
    grid[key_of(cloud[non_ground[k]])].push_back(k);
  }

  const double eps2 = eps * eps;
  std::vector<std::size_t> neighbours;
  const auto region_query = [&](std::size_t k) {
    neighbours.clear();
    const Point3& p = cloud[non_ground[k]];
    const CellKey c = key_of(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (const auto j : it->second) {
            if ((cloud[non_ground[j]] - p).squaredNorm() <= eps2) neighbours.push_back(j);
          }
        }
      }
    }
  };

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(non_ground.size(), kUnvisited);
  int next_label = 0;
  std::vector<std::size_t> frontier;
  for (std::size_t k = 0; k < non_ground.size(); ++k) {
    if (label[k] != kUnvisited) continue;
    region_query(k);
    if (neighbours.size() < static_cast<std::size_t>(min_pts)) {
      label[k] = kNoise;
      continue;
    }
    const int cluster = next_label++;
    label[k] = cluster;
    frontier.assign(neighbours.begin(), neighbours.end());
    while (!frontier.empty()) {
      const std::size_t j = frontier.back();
      frontier.pop_back();
      if (label[j] == kNoise) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      region_query(j);
      if (neighbours.size() >= static_cast<std::size_t>(min_pts)) {
        frontier.insert(frontier.end(), neighbours.begin(), neighbours.end());
      }
    }
  }

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(next_label));
  for (std::size_t k = 0; k < non_ground.size(); ++k) {
    if (label[k] >= 0) members[static_cast<std::size_t>(label[k])].push_back(non_ground[k]);
  }
  std::vector<Cluster> clusters;
  clusters.reserve(members.size());
  for (auto& m : members) {
    std::sort(m.begin(), m.end());
    clusters.push_back(make_cluster(cloud, std::move(m)));
  }
  return clusters;
}

GroundSplit load_ground_mask(const std::filesystem::path& path, std::size_t num_points) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  GroundSplit split;
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t != "0" && t != "1") {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": expected 0 or 1");
    }
    (t == "1" ? split.ground : split.non_ground).push_back(i++);
  }
  if (i != num_points) {
    throw ParseError(path.string() + ": " + std::to_string(i) + " mask entries for " +
                     std::to_string(num_points) + " points");
  }
  return split;
}

std::vector<Cluster> load_cluster_labels(const std::filesystem::path& path,
                                         const PointCloud& cloud) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<long, std::vector<std::size_t>> by_label;
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    long label = 0;
    try {
      std::size_t used = 0;
      label = std::stol(t, &used);
      if (used != t.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": bad label '" + t + "'");
    }
    if (label >= 0) by_label[label].push_back(i);
    ++i;
  }
  if (i != cloud.size()) {
    throw ParseError(path.string() + ": " + std::to_string(i) + " labels for " +
                     std::to_string(cloud.size()) + " points");
  }
  std::vector<Cluster> clusters;
  for (auto& [label, idx] : by_label) clusters.push_back(make_cluster(cloud, std::move(idx)));
  return clusters;
}

}  // namespace novelbox::scene
