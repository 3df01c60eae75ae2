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

// Loader for the hand-labelled selective-alignment fixture.
#ifndef NOVELBOX_TESTS_FILTER_FIXTURE_HPP_
#define NOVELBOX_TESTS_FILTER_FIXTURE_HPP_

#include <string>
#include <vector>

#include "novelbox/alignment_filter.hpp"
#include "novelbox/io.hpp"
#include "test_util.hpp"

namespace novelbox::testing {

struct FilterCase {
  int id = 0;
  assoc::Proposal2D proposal;
  geom::BoxParams box;
  geom::CameraCalib calib;
  align::AlignmentVerdict expected;
};

inline std::vector<FilterCase> load_filter_fixture(const std::string& path) {
  const auto j = io::read_json(path);
  const auto calib = forward_camera();
  std::vector<FilterCase> out;
  for (const auto& c : j.at("cases")) {
    FilterCase fc;
    fc.id = c.at("id").get<int>();
    fc.calib = calib;
    const bool behind = c.value("behind", false);
    fc.box = {behind ? -15.0 : 15.0, 0.0, -1.0, 4.5, 1.8, 1.5, 0.3};
    fc.proposal.camera_id = calib.camera_id;
    fc.proposal.class_id = c.at("class").get<std::string>();
    fc.proposal.score = 0.9;
    fc.proposal.mask_pixel_count = c.at("mask").get<long>();
    fc.proposal.crop_w = c.at("crop_w").get<int>();
    fc.proposal.crop_h = c.at("crop_h").get<int>();
    if (behind) {
      fc.proposal.box = {700, 350, 900, 550};
    } else {
      const auto projected = geom::project_box_to_2d(fc.box, calib);
      const double shift = c.value("shift", 0.0) * projected->width();
      fc.proposal.box = {projected->u_min + shift, projected->v_min, projected->u_max + shift,
                         projected->v_max};
    }
    const auto& e = c.at("expected");
    fc.expected = {e.at("not_occluded").get<bool>(), e.at("high_res").get<bool>(),
                   e.at("mv_aligned").get<bool>(), e.at("fit").get<bool>()};
    out.push_back(fc);
  }
  return out;
}

}  // namespace novelbox::testing

#endif  // NOVELBOX_TESTS_FILTER_FIXTURE_HPP_
