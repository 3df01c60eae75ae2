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

// Shared fixtures for the unit tests.
#ifndef NOVELBOX_TESTS_TEST_UTIL_HPP_
#define NOVELBOX_TESTS_TEST_UTIL_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "novelbox/geometry.hpp"

namespace novelbox::testing {

/// Camera frame equals the ego frame (+z forward).
inline geom::CameraCalib identity_camera(double f = 100.0, double cx = 50.0, double cy = 50.0,
                                         int width = 100, int height = 100) {
  geom::CameraCalib c;
  c.camera_id = "CAM";
  c.intrinsic << f, 0.0, cx, 0.0, f, cy, 0.0, 0.0, 1.0;
  c.image_width = width;
  c.image_height = height;
  return c;
}

/// Camera at the ego origin looking along ego +x (x right = -y, y down = -z).
inline geom::CameraCalib forward_camera(double f = 1000.0, int width = 1600, int height = 900) {
  geom::CameraCalib c;
  c.camera_id = "FRONT";
  Eigen::Matrix3d r;
  r << 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0;
  c.extrinsic.topLeftCorner<3, 3>() = r;
  c.intrinsic << f, 0.0, 0.5 * width, 0.0, f, 0.5 * height, 0.0, 0.0, 1.0;
  c.image_width = width;
  c.image_height = height;
  return c;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline geom::BoxParams random_box(std::mt19937_64& rng, double extent = 10.0) {
  std::uniform_real_distribution<double> pos(-extent, extent);
  std::uniform_real_distribution<double> dim(0.2, 5.0);
  std::uniform_real_distribution<double> yaw(-2.0 * geom::kPi, 2.0 * geom::kPi);
  return {pos(rng), pos(rng), pos(rng), dim(rng), dim(rng), dim(rng), yaw(rng)};
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("novelbox_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace novelbox::testing

#endif  // NOVELBOX_TESTS_TEST_UTIL_HPP_
