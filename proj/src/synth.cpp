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

#include "novelbox/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "novelbox/config.hpp"
#include "novelbox/errors.hpp"
#include "novelbox/io.hpp"

namespace novelbox::synth {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string frame_name(int index) {
  std::ostringstream ss;
  ss << std::setw(6) << std::setfill('0') << index;
  return ss.str();
}

Point3 local_to_ego(const BoxParams& box, double lx, double ly, double lz) {
  const double c = std::cos(box.ry);
  const double s = std::sin(box.ry);
  return {box.x + c * lx - s * ly, box.y + s * lx + c * ly, box.z + lz};
}

double footprint_radius(const BoxParams& box) { return 0.5 * std::hypot(box.l, box.w); }

template <typename T>
void read_into(const json& obj, const char* key, T& field) {
  if (obj.contains(key) && !obj.at(key).is_null()) field = obj.at(key).get<T>();
}

}  // namespace

std::vector<CameraCalib> make_camera_ring(const CameraRig& rig) {
  std::vector<CameraCalib> cams;
  for (int i = 0; i < rig.count; ++i) {
    const double a = 2.0 * geom::kPi * i / rig.count;
    const Eigen::Vector3d forward(std::cos(a), std::sin(a), 0.0);
    const Eigen::Vector3d right(std::sin(a), -std::cos(a), 0.0);
    const Eigen::Vector3d down(0.0, 0.0, -1.0);
    Eigen::Matrix3d r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = forward.transpose();
    const Eigen::Vector3d center(rig.mount_radius * std::cos(a), rig.mount_radius * std::sin(a),
                                 rig.mount_z);
    CameraCalib c;
    c.camera_id = "CAM_" + std::to_string(i);
    c.extrinsic.setIdentity();
    c.extrinsic.topLeftCorner<3, 3>() = r;
    c.extrinsic.topRightCorner<3, 1>() = -r * center;
    c.intrinsic << rig.focal, 0.0, 0.5 * rig.image_width, 0.0, rig.focal, 0.5 * rig.image_height,
        0.0, 0.0, 1.0;
    c.image_width = rig.image_width;
    c.image_height = rig.image_height;
    cams.push_back(std::move(c));
  }
  return cams;
}

SynthSpec SynthSpec::defaults() {
  SynthSpec s;
  s.anchors = pipeline::default_anchors();
  return s;
}

void SynthSpec::validate() const {
  if (frames < 0 || instances_per_frame < 0) throw ValidationError("synth: counts must be >= 0");
  if (!(range_min > 0.0 && range_min <= range_max)) {
    throw ValidationError("synth: range must satisfy 0 < min <= max");
  }
  if (!(mask_ratio_min >= 0.0 && mask_ratio_min <= mask_ratio_max && mask_ratio_max <= 1.0)) {
    throw ValidationError("synth: mask ratio range must lie in [0, 1]");
  }
  if (!(surface.min_spacing > 0.0 && surface.min_spacing <= surface.max_spacing)) {
    throw ValidationError("synth: surface spacing bounds invalid");
  }
  if (!(ground_spacing > 0.0) || embedding_dim < 0 || rig.count < 1) {
    throw ValidationError("synth: invalid ground spacing, embedding dim or camera count");
  }
  double total = 0.0;
  for (const auto& [cls, w] : class_mix) {
    if (!anchors.contains(cls)) throw ValidationError("synth: no anchor for class '" + cls + "'");
    if (!(w >= 0.0)) throw ValidationError("synth: class weights must be non-negative");
    total += w;
  }
  if (instances_per_frame > 0 && !(total > 0.0)) throw ValidationError("synth: empty class mix");
  for (const auto& inst : instances) {
    if (!anchors.contains(inst.class_id)) {
      throw ValidationError("synth: no anchor for class '" + inst.class_id + "'");
    }
    if (!inst.box.valid()) throw ValidationError("synth: explicit instance box is invalid");
  }
}

nlohmann::json box_to_json(const BoxParams& b) {
  return {{"x", b.x}, {"y", b.y}, {"z", b.z}, {"l", b.l}, {"w", b.w}, {"h", b.h}, {"ry", b.ry}};
}

BoxParams box_from_json(const nlohmann::json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>(),
          j.at("l").get<double>(), j.at("w").get<double>(), j.at("h").get<double>(),
          j.at("ry").get<double>()};
}

SynthSpec spec_from_json(const json& j) {
  SynthSpec s = SynthSpec::defaults();
  try {
    read_into(j, "seed", s.seed);
    read_into(j, "frames", s.frames);
    read_into(j, "instances_per_frame", s.instances_per_frame);
    if (j.contains("class_mix")) s.class_mix = j["class_mix"].get<std::map<std::string, double>>();
    if (j.contains("range")) {
      const auto r = j["range"].get<std::vector<double>>();
      if (r.size() != 2) throw ValidationError("synth: range needs two entries");
      s.range_min = r[0];
      s.range_max = r[1];
    }
    read_into(j, "ground_z", s.ground_z);
    read_into(j, "ground_extent", s.ground_extent);
    read_into(j, "ground_spacing", s.ground_spacing);
    if (j.contains("mask_ratio")) {
      const auto r = j["mask_ratio"].get<std::vector<double>>();
      if (r.size() != 2) throw ValidationError("synth: mask_ratio needs two entries");
      s.mask_ratio_min = r[0];
      s.mask_ratio_max = r[1];
    }
    read_into(j, "embedding_dim", s.embedding_dim);
    if (j.contains("surface")) {
      const auto& o = j["surface"];
      read_into(o, "spacing_per_meter", s.surface.spacing_per_meter);
      read_into(o, "min_spacing", s.surface.min_spacing);
      read_into(o, "max_spacing", s.surface.max_spacing);
      read_into(o, "noise", s.surface.noise);
      read_into(o, "sample_top", s.surface.sample_top);
      read_into(o, "bottom_clearance", s.surface.bottom_clearance);
    }
    if (j.contains("rig")) {
      const auto& o = j["rig"];
      read_into(o, "count", s.rig.count);
      read_into(o, "image_width", s.rig.image_width);
      read_into(o, "image_height", s.rig.image_height);
      read_into(o, "focal", s.rig.focal);
      read_into(o, "mount_radius", s.rig.mount_radius);
      read_into(o, "mount_z", s.rig.mount_z);
    }
    if (j.contains("anchors")) {
      for (const auto& [cls, a] : j["anchors"].items()) {
        const auto lo = a.at("min").get<std::vector<double>>();
        const auto hi = a.at("max").get<std::vector<double>>();
        if (lo.size() != 3 || hi.size() != 3) throw ValidationError("synth: anchor dims need 3 entries");
        s.anchors[cls] = {cls, {lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}};
      }
    }
    if (j.contains("instances")) {
      for (const auto& inst : j["instances"]) {
        s.instances.push_back({inst.value("frame", 0), inst.at("class").get<std::string>(),
                               box_from_json(inst.at("box"))});
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<Eigen::Vector2d> poisson_disk(double width, double height, double radius, Rng& rng) {
  std::vector<Eigen::Vector2d> samples;
  if (!(width > 0.0) || !(height > 0.0) || !(radius > 0.0)) return samples;
  constexpr int kAttempts = 30;
  const double cell = radius / std::sqrt(2.0);
  const int gw = static_cast<int>(std::ceil(width / cell)) + 1;
  const int gh = static_cast<int>(std::ceil(height / cell)) + 1;
  std::vector<int> grid(static_cast<std::size_t>(gw) * gh, -1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto cell_of = [&](const Eigen::Vector2d& p) {
    return std::pair{std::min(gw - 1, static_cast<int>(p.x() / cell)),
                     std::min(gh - 1, static_cast<int>(p.y() / cell))};
  };
  const auto insert = [&](const Eigen::Vector2d& p) {
    const auto [cx, cy] = cell_of(p);
    grid[static_cast<std::size_t>(cy) * gw + cx] = static_cast<int>(samples.size());
    samples.push_back(p);
  };
  const auto fits = [&](const Eigen::Vector2d& p) {
    if (p.x() < 0.0 || p.x() > width || p.y() < 0.0 || p.y() > height) return false;
    const auto [cx, cy] = cell_of(p);
    for (int y = std::max(0, cy - 2); y <= std::min(gh - 1, cy + 2); ++y) {
      for (int x = std::max(0, cx - 2); x <= std::min(gw - 1, cx + 2); ++x) {
        const int k = grid[static_cast<std::size_t>(y) * gw + x];
        if (k >= 0 && (samples[static_cast<std::size_t>(k)] - p).squaredNorm() < radius * radius) {
          return false;
        }
      }
    }
    return true;
  };

  insert({unit(rng) * width, unit(rng) * height});
  std::vector<std::size_t> active = {0};
  while (!active.empty()) {
    const std::size_t pick = static_cast<std::size_t>(unit(rng) * active.size()) % active.size();
    const Eigen::Vector2d base = samples[active[pick]];
    bool placed = false;
    for (int k = 0; k < kAttempts; ++k) {
      const double ang = 2.0 * geom::kPi * unit(rng);
      const double rad = radius * (1.0 + unit(rng));
      const Eigen::Vector2d cand = base + rad * Eigen::Vector2d(std::cos(ang), std::sin(ang));
      if (fits(cand)) {
        active.push_back(samples.size());
        insert(cand);
        placed = true;
        break;
      }
    }
    if (!placed) {
      active[pick] = active.back();
      active.pop_back();
    }
  }
  return samples;
}

PointCloud sample_visible_faces(const BoxParams& box, const Point3& sensor, double ground_z,
                                const SurfaceSampling& sampling, Rng& rng) {
  const double range = std::hypot(box.x - sensor.x(), box.y - sensor.y());
  const double spacing =
      std::clamp(sampling.spacing_per_meter * range, sampling.min_spacing, sampling.max_spacing);
  const double hl = 0.5 * box.l;
  const double hw = 0.5 * box.w;
  const double hh = 0.5 * box.h;
  const double bottom = std::min(hh, std::max(-hh, ground_z + sampling.bottom_clearance - box.z));
  const Point3 sensor_local = geom::to_box_frame(sensor, box);
  std::normal_distribution<double> jitter(0.0, 1.0);

  PointCloud points;
  const auto emit = [&](double lx, double ly, double lz) {
    Point3 p = local_to_ego(box, lx, ly, lz);
    if (sampling.noise > 0.0) {
      p += sampling.noise * Point3(jitter(rng), jitter(rng), jitter(rng));
    }
    points.push_back(p);
  };

  // Side faces: +x, -x (spanning w), +y, -y (spanning l).
  for (int axis = 0; axis < 2; ++axis) {
    for (const double sign : {1.0, -1.0}) {
      const double offset = axis == 0 ? hl : hw;
      const double along = axis == 0 ? hw : hl;
      const double sensor_coord = axis == 0 ? sensor_local.x() : sensor_local.y();
      if (sign * (sensor_coord - sign * offset) <= 0.0) continue;
      for (const auto& s : poisson_disk(2.0 * along, hh - bottom, spacing, rng)) {
        const double t = s.x() - along;
        const double lz = bottom + s.y();
        if (axis == 0) {
          emit(sign * hl, t, lz);
        } else {
          emit(t, sign * hw, lz);
        }
      }
    }
  }
  if (sampling.sample_top && sensor_local.z() > hh) {
    for (const auto& s : poisson_disk(box.l, box.w, spacing, rng)) emit(s.x() - hl, s.y() - hw, hh);
  }
  return points;
}

BoxParams sample_box(const cost::AnchorRange& anchor, double range_min, double range_max,
                     double ground_z, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BoxParams b;
  b.l = anchor.dims_min.x() + unit(rng) * (anchor.dims_max.x() - anchor.dims_min.x());
  b.w = anchor.dims_min.y() + unit(rng) * (anchor.dims_max.y() - anchor.dims_min.y());
  b.h = anchor.dims_min.z() + unit(rng) * (anchor.dims_max.z() - anchor.dims_min.z());
  const double range = range_min + unit(rng) * (range_max - range_min);
  const double azimuth = 2.0 * geom::kPi * unit(rng);
  b.x = range * std::cos(azimuth);
  b.y = range * std::sin(azimuth);
  b.z = ground_z + 0.5 * b.h;
  b.ry = geom::kPi * unit(rng);
  return b;
}

std::vector<assoc::Proposal2D> proposals_for_box(const BoxParams& box, const std::string& class_id,
                                                 const std::vector<CameraCalib>& cameras,
                                                 double mask_ratio, int embedding_dim, Rng& rng) {
  std::vector<assoc::Proposal2D> out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& cam : cameras) {
    const auto projected = geom::project_box_to_2d(box, cam);
    if (!projected) continue;
    assoc::Proposal2D p;
    p.box = *projected;
    p.camera_id = cam.camera_id;
    p.class_id = class_id;
    p.score = 0.5 + 0.5 * unit(rng);
    p.crop_w = std::max(1, static_cast<int>(std::lround(projected->width())));
    p.crop_h = std::max(1, static_cast<int>(std::lround(projected->height())));
    const long area = static_cast<long>(p.crop_w) * p.crop_h;
    p.mask_pixel_count = std::clamp<long>(std::lround(mask_ratio * static_cast<double>(area)), 0, area);
    if (embedding_dim > 0) {
      std::vector<double> e(static_cast<std::size_t>(embedding_dim));
      double norm = 0.0;
      for (auto& v : e) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (auto& v : e) v /= norm;
      p.embedding = std::move(e);
    }
    out.push_back(std::move(p));
  }
  return out;
}

SynthFrame synth_frame(const SynthSpec& spec, int frame_index) {
  spec.validate();
  Rng rng(splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(frame_index))));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto cameras = make_camera_ring(spec.rig);
  const Point3 sensor = Point3::Zero();

  SynthFrame frame;
  frame.scene.frame_id = frame_name(frame_index);
  frame.scene.cameras = cameras;

  const auto overlaps = [&frame](const BoxParams& b) {
    for (const auto& o : frame.objects) {
      const double gap = std::hypot(o.box.x - b.x, o.box.y - b.y);
      if (gap < footprint_radius(o.box) + footprint_radius(b) + 0.5) return true;
    }
    return false;
  };
  const auto mask_ratio = [&] {
    return spec.mask_ratio_min + unit(rng) * (spec.mask_ratio_max - spec.mask_ratio_min);
  };

  for (std::size_t k = 0; k < spec.instances.size(); ++k) {
    const auto& inst = spec.instances[k];
    if (inst.frame != frame_index) continue;
    const int id = static_cast<int>(frame.objects.size());
    auto props = proposals_for_box(inst.box, inst.class_id, cameras, mask_ratio(),
                                   spec.embedding_dim, rng);
    if (props.empty()) {
      throw ValidationError("synth: instance " + std::to_string(k) + " (" + inst.class_id +
                            ", frame " + std::to_string(frame_index) +
                            ") is outside every camera view");
    }
    frame.objects.push_back({id, inst.class_id, inst.box, 0});
    frame.proposals.insert(frame.proposals.end(), props.begin(), props.end());
  }

  std::vector<std::string> classes;
  std::vector<double> weights;
  for (const auto& [cls, w] : spec.class_mix) {
    classes.push_back(cls);
    weights.push_back(w);
  }
  for (int n = 0; n < spec.instances_per_frame; ++n) {
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    const std::string& cls = classes[pick(rng)];
    const auto& anchor = spec.anchors.at(cls);
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const BoxParams b = sample_box(anchor, spec.range_min, spec.range_max, spec.ground_z, rng);
      if (overlaps(b)) continue;
      auto props = proposals_for_box(b, cls, cameras, mask_ratio(), spec.embedding_dim, rng);
      if (props.empty()) continue;
      frame.objects.push_back({static_cast<int>(frame.objects.size()), cls, b, 0});
      frame.proposals.insert(frame.proposals.end(), props.begin(), props.end());
      placed = true;
    }
    if (!placed) {
      throw ValidationError("synth: no free space for random instance " + std::to_string(n) +
                            " in frame " + std::to_string(frame_index));
    }
  }

  for (auto& obj : frame.objects) {
    const auto pts = sample_visible_faces(obj.box, sensor, spec.ground_z, spec.surface, rng);
    obj.num_points = pts.size();
    frame.scene.cloud.insert(frame.scene.cloud.end(), pts.begin(), pts.end());
    frame.point_labels.insert(frame.point_labels.end(), pts.size(), obj.instance_id);
  }

  // Ground rings, spacing growing with range, skipping object footprints.
  std::normal_distribution<double> ground_noise(0.0, 0.02);
  for (double r = 2.0; r <= spec.ground_extent;
       r += std::max(spec.ground_spacing, 0.02 * r)) {
    const double step = std::max(spec.ground_spacing, 0.02 * r);
    const int n = std::max(8, static_cast<int>(2.0 * geom::kPi * r / step));
    const double phase = unit(rng) * 2.0 * geom::kPi;
    for (int i = 0; i < n; ++i) {
      const double a = phase + 2.0 * geom::kPi * i / n;
      const Point3 p(r * std::cos(a), r * std::sin(a), spec.ground_z + ground_noise(rng));
      bool covered = false;
      for (const auto& obj : frame.objects) {
        const Point3 local = geom::to_box_frame(p, obj.box);
        if (std::abs(local.x()) <= 0.5 * obj.box.l + 0.2 &&
            std::abs(local.y()) <= 0.5 * obj.box.w + 0.2) {
          covered = true;
          break;
        }
      }
      if (covered) continue;
      frame.scene.cloud.push_back(p);
      frame.point_labels.push_back(-1);
    }
  }
  return frame;
}

SynthInstance synth_instance(const std::string& class_id, const cost::AnchorRange& anchor,
                             double range_min, double range_max,
                             const std::vector<CameraCalib>& cameras,
                             const SurfaceSampling& sampling, double ground_z, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const BoxParams gt = sample_box(anchor, range_min, range_max, ground_z, rng);
    auto props = proposals_for_box(gt, class_id, cameras, 1.0, 0, rng);
    if (props.empty()) continue;
    auto points = sample_visible_faces(gt, Point3::Zero(), ground_z, sampling, rng);
    if (points.empty()) continue;
    const auto best = std::max_element(props.begin(), props.end(), [](const auto& a, const auto& b) {
      return a.box.area() < b.box.area();
    });

    SynthInstance inst;
    inst.ground_truth = gt;
    auto& pair = inst.pair;
    pair.proposal = *best;
    pair.calib = *std::find_if(cameras.begin(), cameras.end(), [&](const CameraCalib& c) {
      return c.camera_id == best->camera_id;
    });
    std::vector<std::size_t> idx(points.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    pair.cluster = scene::make_cluster(points, std::move(idx));
    pair.obj_points = std::move(points);
    pair.center_ray = assoc::center_ray(assoc::frustum_from_box(best->box, pair.calib, 0.5, 60.0));
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& p : pair.obj_points) {
      const double d = assoc::point_to_ray_distance(p, pair.center_ray);
      if (d < best_dist) {
        best_dist = d;
        pair.closest_point = p;
      }
    }
    pair.distance_to_ray = best_dist;
    pair.frame_id = "synthetic";
    return inst;
  }
  throw ValidationError("synth: could not place a visible '" + class_id + "' instance");
}

std::filesystem::path write_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  io::Manifest manifest;
  manifest.cameras = make_camera_ring(spec.rig);
  for (int f = 0; f < spec.frames; ++f) {
    const SynthFrame frame = synth_frame(spec, f);
    const std::string id = frame.scene.frame_id;
    io::FrameEntry entry;
    entry.id = id;
    entry.cloud = out_dir / (id + ".bin");
    entry.format = scene::CloudFormat::kBinaryXYZI;
    entry.proposals = out_dir / (id + ".proposals.json");
    entry.ground_truth = out_dir / (id + ".gt.json");
    scene::write_cloud(entry.cloud, frame.scene.cloud, entry.format);
    io::write_proposals(entry.proposals, frame.proposals);

    json gt = json::array();
    for (const auto& obj : frame.objects) {
      gt.push_back({{"instance", obj.instance_id},
                    {"class", obj.class_id},
                    {"box", box_to_json(obj.box)},
                    {"num_points", obj.num_points}});
    }
    io::write_json(*entry.ground_truth, gt);

    std::ofstream labels(out_dir / (id + ".labels.txt"));
    if (!labels) throw IoError("cannot write labels for frame " + id);
    for (const int l : frame.point_labels) labels << l << '\n';
    manifest.frames.push_back(std::move(entry));
  }
  const auto manifest_path = out_dir / "scenes.json";
  io::write_manifest(manifest_path, manifest);
  return manifest_path;
}

}  // namespace novelbox::synth
