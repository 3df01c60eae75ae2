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
/// \brief Rotated-box geometry, pinhole projection and IoU primitives.
///
/// Frames: the ego/LiDAR frame is right-handed with +z up. Camera frames are
/// right-handed with +z forward (optical axis), +x right and +y down.
#ifndef NOVELBOX_GEOMETRY_HPP_
#define NOVELBOX_GEOMETRY_HPP_

#include <Eigen/Core>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace novelbox::geom {

using Point3 = Eigen::Vector3d;
using PointCloud = std::vector<Point3>;

inline constexpr double kPi = 3.14159265358979323846;

/// Inclusive boundary tolerance for point_in_box, meters.
inline constexpr double kInsideTolerance = 1e-9;

/// Seven-parameter amodal box. (x, y, z) is the center; l extends along the
/// heading given by yaw `ry` about +z, w across it, h vertically.
struct BoxParams {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double l = 1.0;
  double w = 1.0;
  double h = 1.0;
  double ry = 0.0;

  Point3 center() const { return {x, y, z}; }
  Point3 dims() const { return {l, w, h}; }
  bool valid() const;
};

/// Axis-aligned image rectangle in pixels.
struct Box2D {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;

  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  double area() const { return width() * height(); }
  bool valid() const { return u_min < u_max && v_min < v_max; }
};

struct EgoPose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3 position() const { return {x, y, z}; }
};

/// LiDAR-to-camera extrinsic plus pinhole intrinsic.
struct CameraCalib {
  std::string camera_id;
  Eigen::Matrix4d extrinsic = Eigen::Matrix4d::Identity();
  Eigen::Matrix3d intrinsic = Eigen::Matrix3d::Identity();
  int image_width = 0;
  int image_height = 0;

  /// Throws ValidationError unless the rotation block is orthonormal with
  /// det +1 (within 1e-6), the intrinsic is upper-triangular with positive
  /// focal entries and the image extent is positive.
  void validate() const;

  Point3 to_camera(const Point3& p) const {
    return extrinsic.topLeftCorner<3, 3>() * p + extrinsic.topRightCorner<3, 1>();
  }
  Point3 to_ego(const Point3& p_cam) const {
    const Eigen::Matrix3d r = extrinsic.topLeftCorner<3, 3>();
    return r.transpose() * (p_cam - extrinsic.topRightCorner<3, 1>());
  }
  /// Optical center expressed in the ego frame.
  Point3 center_in_ego() const { return to_ego(Point3::Zero()); }
  Box2D image_extent() const {
    return {0.0, 0.0, static_cast<double>(image_width), static_cast<double>(image_height)};
  }
};

struct ProjectedPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool valid = false;  ///< false when depth <= 0 (u, v left at zero)
};

/// Corner order: bottom face 0..3 counter-clockwise seen from above starting
/// at the (+l/2, +w/2) box-local corner, then the top face 4..7 directly
/// above 0..3.
/// In box-local (x, y): 0 = (+l/2, +w/2), 1 = (-l/2, +w/2),
/// 2 = (-l/2, -w/2), 3 = (+l/2, -w/2).
std::array<Point3, 8> box_corners(const BoxParams& box);

/// Box-local coordinates of `p` (heading along +x).
Point3 to_box_frame(const Point3& p, const BoxParams& box);

/// Inclusive containment test with kInsideTolerance slack on every face.
bool point_in_box(const Point3& p, const BoxParams& box);

/// Pinhole projection. Output is index-aligned with `points`; points with
/// camera depth <= 0 are flagged invalid.
std::vector<ProjectedPoint> project_points(std::span<const Point3> points,
                                           const CameraCalib& calib);

/// Axis-aligned hull of the projected box, clipped to the image. Edges that
/// cross the near plane contribute their crossing point so boxes straddling
/// the camera are not truncated. Returns nullopt when fewer than two corners
/// have positive depth or the clipped hull is degenerate.
std::optional<Box2D> project_box_to_2d(const BoxParams& box, const CameraCalib& calib);

/// Clip a rectangle to the image extent; nullopt if nothing remains.
std::optional<Box2D> clip_to_image(const Box2D& box, int image_width, int image_height);

double iou_2d(const Box2D& a, const Box2D& b);

/// Bird's-eye-view footprint polygon (counter-clockwise).
std::array<Eigen::Vector2d, 4> bev_footprint(const BoxParams& box);

/// Area of the intersection of two convex counter-clockwise polygons.
double convex_intersection_area(std::span<const Eigen::Vector2d> a,
                                std::span<const Eigen::Vector2d> b);

/// Rotated-rectangle IoU of the two BEV footprints.
double iou_bev(const BoxParams& a, const BoxParams& b);

/// Wrap an angle into [0, pi). Rectangle footprints are pi-periodic in yaw.
double wrap_yaw(double ry);

/// Signed yaw difference a - b reduced to [-pi/2, pi/2).
double yaw_difference(double a, double b);

}  // namespace novelbox::geom

#endif  // NOVELBOX_GEOMETRY_HPP_
