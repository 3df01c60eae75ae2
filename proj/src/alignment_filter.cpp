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

#include "novelbox/errors.hpp"

namespace novelbox::align {

FilterThresholds FilterThresholds::defaults() {
  FilterThresholds t;
  t.tau_occ = {
      {"car", 0.5},          {"truck", 0.5},        {"pedestrian", 0.25},
      {"bicycle", 0.4},      {"motorcycle", 0.4},   {"bus", 0.5},
      {"traffic_cone", 0.25}, {"barrier", 0.35},    {"construction_vehicle", 0.5},
  };
  t.tau_res = 4000.0;
  t.tau_mv = 0.5;
  return t;
}

void FilterThresholds::validate() const {
  for (const auto& [cls, tau] : tau_occ) {
    if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("tau_occ for '" + cls + "' must lie in (0, 1)");
  }
  if (!(tau_res > 0.0)) throw ValidationError("tau_res must be positive");
  if (!(tau_mv > 0.0 && tau_mv < 1.0)) throw ValidationError("tau_mv must lie in (0, 1)");
}

double FilterThresholds::occlusion_threshold(const std::string& class_id) const {
  const auto it = tau_occ.find(class_id);
  if (it == tau_occ.end()) throw ValidationError("no occlusion threshold for class '" + class_id + "'");
  return it->second;
}

bool occlusion_filter(long mask_pixel_count, int crop_w, int crop_h, const std::string& class_id,
                      const FilterThresholds& thresholds) {
  if (crop_w < 1 || crop_h < 1) throw ValidationError("crop dimensions must be >= 1");
  const double tau = thresholds.occlusion_threshold(class_id);
  const double ratio = static_cast<double>(mask_pixel_count) /
                       (static_cast<double>(crop_w) * static_cast<double>(crop_h));
  return ratio > tau;
}

bool resolution_filter(int crop_w, int crop_h, const FilterThresholds& thresholds) {
  if (crop_w < 1 || crop_h < 1) throw ValidationError("crop dimensions must be >= 1");
  return static_cast<double>(crop_w) * static_cast<double>(crop_h) > thresholds.tau_res;
}

bool multiview_filter(const BoxParams& box, const Box2D& proposal, const CameraCalib& calib,
                      const FilterThresholds& thresholds) {
  const auto projected = geom::project_box_to_2d(box, calib);
  if (!projected) return false;
  return geom::iou_2d(*projected, proposal) >= thresholds.tau_mv;
}

AlignmentVerdict verdict(const assoc::Proposal2D& proposal, const BoxParams& box,
                         const CameraCalib& calib, const FilterThresholds& thresholds) {
  AlignmentVerdict v;
  v.not_occluded = occlusion_filter(proposal.mask_pixel_count, proposal.crop_w, proposal.crop_h,
                                    proposal.class_id, thresholds);
  v.high_res = resolution_filter(proposal.crop_w, proposal.crop_h, thresholds);
  v.mv_aligned = multiview_filter(box, proposal.box, calib, thresholds);
  v.fit_for_alignment = v.not_occluded && v.high_res && v.mv_aligned;
  return v;
}

}  // namespace novelbox::align
