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

#include "novelbox/alignment_filter.hpp"

#include <gtest/gtest.h>

#include <random>

#include "filter_fixture.hpp"
#include "novelbox/errors.hpp"
#include "test_util.hpp"

namespace novelbox::align {
namespace {

const FilterThresholds kDefaults = FilterThresholds::defaults();

TEST(Thresholds, PublishedTable) {
  EXPECT_EQ(kDefaults.occlusion_threshold("car"), 0.5);
  EXPECT_EQ(kDefaults.occlusion_threshold("truck"), 0.5);
  EXPECT_EQ(kDefaults.occlusion_threshold("pedestrian"), 0.25);
  EXPECT_EQ(kDefaults.occlusion_threshold("bicycle"), 0.4);
  EXPECT_EQ(kDefaults.occlusion_threshold("motorcycle"), 0.4);
  EXPECT_EQ(kDefaults.occlusion_threshold("bus"), 0.5);
  EXPECT_EQ(kDefaults.occlusion_threshold("traffic_cone"), 0.25);
  EXPECT_EQ(kDefaults.occlusion_threshold("barrier"), 0.35);
  EXPECT_EQ(kDefaults.occlusion_threshold("construction_vehicle"), 0.5);
  EXPECT_EQ(kDefaults.tau_res, 4000.0);
  EXPECT_EQ(kDefaults.tau_mv, 0.5);
  EXPECT_THROW(kDefaults.occlusion_threshold("unicorn"), ValidationError);
}

TEST(Occlusion, Examples) {
  EXPECT_FALSE(occlusion_filter(4000, 100, 100, "car", kDefaults));
  EXPECT_TRUE(occlusion_filter(30, 10, 10, "pedestrian", kDefaults));
  EXPECT_FALSE(occlusion_filter(5000, 100, 100, "car", kDefaults));  // ratio exactly tau
  for (const auto& [cls, tau] : kDefaults.tau_occ) {
    EXPECT_TRUE(occlusion_filter(64 * 48, 64, 48, cls, kDefaults)) << cls;
  }
  EXPECT_THROW(occlusion_filter(10, 10, 10, "unicorn", kDefaults), ValidationError);
  EXPECT_THROW(occlusion_filter(10, 0, 10, "car", kDefaults), ValidationError);
}

TEST(Resolution, Examples) {
  EXPECT_FALSE(resolution_filter(50, 50, kDefaults));
  EXPECT_TRUE(resolution_filter(100, 100, kDefaults));
  EXPECT_FALSE(resolution_filter(40, 100, kDefaults));  // exactly 4000
  EXPECT_TRUE(resolution_filter(4001, 1, kDefaults));
}

TEST(MultiView, Examples) {
  const auto cam = testing::forward_camera();
  const geom::BoxParams box{15, 0, -1, 4.5, 1.8, 1.5, 0.3};
  const auto projected = *geom::project_box_to_2d(box, cam);
  EXPECT_TRUE(multiview_filter(box, projected, cam, kDefaults));
  EXPECT_FALSE(multiview_filter({-15, 0, -1, 4.5, 1.8, 1.5, 0.3}, projected, cam, kDefaults));
  // IoU = (1 - s) / (1 + s) = 0.45 at s = 0.55 / 1.45.
  const double s = 0.55 / 1.45;
  geom::Box2D shifted = projected;
  shifted.u_min += s * projected.width();
  shifted.u_max += s * projected.width();
  EXPECT_NEAR(geom::iou_2d(projected, shifted), 0.45, 1e-9);
  EXPECT_FALSE(multiview_filter(box, shifted, cam, kDefaults));
}

TEST(Verdict, HandLabelledFixture) {
  const auto cases = testing::load_filter_fixture(NOVELBOX_FIXTURES "/filter_fixture.json");
  ASSERT_EQ(cases.size(), 20u);
  for (const auto& c : cases) {
    const auto v = verdict(c.proposal, c.box, c.calib, kDefaults);
    EXPECT_EQ(v.not_occluded, c.expected.not_occluded) << "case " << c.id;
    EXPECT_EQ(v.high_res, c.expected.high_res) << "case " << c.id;
    EXPECT_EQ(v.mv_aligned, c.expected.mv_aligned) << "case " << c.id;
    EXPECT_EQ(v.fit_for_alignment, c.expected.fit_for_alignment) << "case " << c.id;
    EXPECT_EQ(v.fit_for_alignment, v.not_occluded && v.high_res && v.mv_aligned);
  }
}

TEST(Filters, Monotone) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> dim(1, 300);
  for (int i = 0; i < 2000; ++i) {
    const int w = dim(rng);
    const int h = dim(rng);
    std::uniform_int_distribution<long> mask(0, static_cast<long>(w) * h);
    const long m1 = mask(rng);
    const long m2 = std::max(m1, mask(rng));
    if (occlusion_filter(m1, w, h, "barrier", kDefaults)) {
      EXPECT_TRUE(occlusion_filter(m2, w, h, "barrier", kDefaults));
    }
    if (resolution_filter(w, h, kDefaults)) EXPECT_TRUE(resolution_filter(w + 1, h, kDefaults));
  }
}

TEST(Thresholds, Validation) {
  auto t = kDefaults;
  t.tau_occ["car"] = 1.0;
  EXPECT_THROW(t.validate(), ValidationError);
  t = kDefaults;
  t.tau_res = 0;
  EXPECT_THROW(t.validate(), ValidationError);
  t = kDefaults;
  t.tau_mv = 0;
  EXPECT_THROW(t.validate(), ValidationError);
}

}  // namespace
}  // namespace novelbox::align
