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

#include "novelbox/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "novelbox/errors.hpp"

namespace novelbox::geom {

namespace {

// Depth of the near plane used when clipping box edges that cross behind the
// camera.
constexpr double kNearDepth = 1e-3;

constexpr std::array<std::array<int, 2>, 12> kBoxEdges = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0},
    {4, 5}, {5, 6}, {6, 7}, {7, 4},
    {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    twice += cross2(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * std::abs(twice);
}

}  // namespace

bool BoxParams::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(ry) &&
         std::isfinite(l) && std::isfinite(w) && std::isfinite(h) && l > 0.0 && w > 0.0 &&
         h > 0.0;
}

void CameraCalib::validate() const {
  if (!extrinsic.allFinite() || !intrinsic.allFinite()) {
    throw ValidationError("camera '" + camera_id + "': non-finite calibration");
  }
  const Eigen::Matrix3d r = extrinsic.topLeftCorner<3, 3>();
  if (!(r * r.transpose()).isApprox(Eigen::Matrix3d::Identity(), 1e-6) ||
      std::abs(r.determinant() - 1.0) > 1e-6) {
    throw ValidationError("camera '" + camera_id + "': extrinsic rotation is not proper orthonormal");
  }
  if (extrinsic.row(3) != Eigen::RowVector4d(0, 0, 0, 1)) {
    throw ValidationError("camera '" + camera_id + "': extrinsic bottom row must be [0 0 0 1]");
  }
  if (intrinsic(1, 0) != 0.0 || intrinsic(2, 0) != 0.0 || intrinsic(2, 1) != 0.0 ||
      intrinsic(2, 2) != 1.0) {
    throw ValidationError("camera '" + camera_id + "': intrinsic must be upper-triangular with K22 = 1");
  }
  if (!(intrinsic(0, 0) > 0.0) || !(intrinsic(1, 1) > 0.0)) {
    throw ValidationError("camera '" + camera_id + "': focal lengths must be positive");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw ValidationError("camera '" + camera_id + "': image extent must be positive");
  }
}

std::array<Point3, 8> box_corners(const BoxParams& box) {
  const double c = std::cos(box.ry);
  const double s = std::sin(box.ry);
  const double hl = 0.5 * box.l;
  const double hw = 0.5 * box.w;
  const double hh = 0.5 * box.h;
  constexpr std::array<std::array<double, 2>, 4> kSigns = {{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};

  std::array<Point3, 8> corners;
  for (int i = 0; i < 4; ++i) {
    const double lx = kSigns[i][0] * hl;
    const double ly = kSigns[i][1] * hw;
    const double ex = box.x + c * lx - s * ly;
    const double ey = box.y + s * lx + c * ly;
    corners[i] = Point3(ex, ey, box.z - hh);
    corners[i + 4] = Point3(ex, ey, box.z + hh);
  }
  return corners;
}

Point3 to_box_frame(const Point3& p, const BoxParams& box) {
  const double c = std::cos(box.ry);
  const double s = std::sin(box.ry);
  const double dx = p.x() - box.x;
  const double dy = p.y() - box.y;
  return {c * dx + s * dy, -s * dx + c * dy, p.z() - box.z};
}

bool point_in_box(const Point3& p, const BoxParams& box) {
  const Point3 local = to_box_frame(p, box);
  return std::abs(local.x()) <= 0.5 * box.l + kInsideTolerance &&
         std::abs(local.y()) <= 0.5 * box.w + kInsideTolerance &&
         std::abs(local.z()) <= 0.5 * box.h + kInsideTolerance;
}

std::vector<ProjectedPoint> project_points(std::span<const Point3> points,
                                           const CameraCalib& calib) {
  std::vector<ProjectedPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const Point3 cam = calib.to_camera(p);
    ProjectedPoint proj;
    proj.depth = cam.z();
    if (cam.z() > 0.0) {
      const Point3 pix = calib.intrinsic * cam;
      proj.u = pix.x() / pix.z();
      proj.v = pix.y() / pix.z();
      proj.valid = true;
    }
    out.push_back(proj);
  }
  return out;
}

std::optional<Box2D> clip_to_image(const Box2D& box, int image_width, int image_height) {
  Box2D clipped{std::max(box.u_min, 0.0), std::max(box.v_min, 0.0),
                std::min(box.u_max, static_cast<double>(image_width)),
                std::min(box.v_max, static_cast<double>(image_height))};
  if (!clipped.valid()) return std::nullopt;
  return clipped;
}

std::optional<Box2D> project_box_to_2d(const BoxParams& box, const CameraCalib& calib) {
  const auto corners = box_corners(box);
  std::array<Point3, 8> cam;
  int in_front = 0;
  for (int i = 0; i < 8; ++i) {
    cam[i] = calib.to_camera(corners[i]);
    if (cam[i].z() > 0.0) ++in_front;
  }
  if (in_front < 2) return std::nullopt;

  double u_min = std::numeric_limits<double>::infinity();
  double v_min = u_min;
  double u_max = -u_min;
  double v_max = -u_min;
  const auto extend = [&](const Point3& c) {
    const Point3 pix = calib.intrinsic * c;
    const double u = pix.x() / pix.z();
    const double v = pix.y() / pix.z();
    u_min = std::min(u_min, u);
    v_min = std::min(v_min, v);
    u_max = std::max(u_max, u);
    v_max = std::max(v_max, v);
  };
  for (const auto& c : cam) {
    if (c.z() >= kNearDepth) extend(c);
  }
  for (const auto& [a, b] : kBoxEdges) {
    const double za = cam[a].z() - kNearDepth;
    const double zb = cam[b].z() - kNearDepth;
    if ((za < 0.0) != (zb < 0.0)) {
      const double t = za / (za - zb);
      extend(cam[a] + t * (cam[b] - cam[a]));
    }
  }
  if (!std::isfinite(u_min) || !std::isfinite(u_max)) return std::nullopt;
  return clip_to_image({u_min, v_min, u_max, v_max}, calib.image_width, calib.image_height);
}

double iou_2d(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.u_max, b.u_max) - std::max(a.u_min, b.u_min);
  const double ih = std::min(a.v_max, b.v_max) - std::max(a.v_min, b.v_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::array<Eigen::Vector2d, 4> bev_footprint(const BoxParams& box) {
  const auto corners = box_corners(box);
  return {corners[0].head<2>(), corners[1].head<2>(), corners[2].head<2>(),
          corners[3].head<2>()};
}

double convex_intersection_area(std::span<const Eigen::Vector2d> a,
                                std::span<const Eigen::Vector2d> b) {
  // Sutherland-Hodgman: clip polygon a against each edge of b.
  std::vector<Eigen::Vector2d> poly(a.begin(), a.end());
  for (std::size_t i = 0; i < b.size() && !poly.empty(); ++i) {
    const Eigen::Vector2d& e0 = b[i];
    const Eigen::Vector2d& e1 = b[(i + 1) % b.size()];
    const Eigen::Vector2d edge = e1 - e0;
    const auto side = [&](const Eigen::Vector2d& p) { return cross2(edge, p - e0); };

    std::vector<Eigen::Vector2d> next;
    next.reserve(poly.size() + 2);
    for (std::size_t j = 0; j < poly.size(); ++j) {
      const Eigen::Vector2d& cur = poly[j];
      const Eigen::Vector2d& nxt = poly[(j + 1) % poly.size()];
      const double sc = side(cur);
      const double sn = side(nxt);
      if (sc >= 0.0) next.push_back(cur);
      if ((sc >= 0.0) != (sn >= 0.0)) {
        const double t = sc / (sc - sn);
        next.push_back(cur + t * (nxt - cur));
      }
    }
    poly = std::move(next);
  }
  return polygon_area(poly);
}

double iou_bev(const BoxParams& a, const BoxParams& b) {
  const auto pa = bev_footprint(a);
  const auto pb = bev_footprint(b);
  const double inter = convex_intersection_area(pa, pb);
  const double uni = a.l * a.w + b.l * b.w - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double wrap_yaw(double ry) {
  double r = std::fmod(ry, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r -= kPi;
  return r;
}

double yaw_difference(double a, double b) {
  double d = std::fmod(a - b + 0.5 * kPi, kPi);
  if (d < 0.0) d += kPi;
  return d - 0.5 * kPi;
}

}  // namespace novelbox::geom
