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
/// \brief Selective alignment: decides whether a generated annotation's 2D
/// embedding is trustworthy enough to supervise cross-modal alignment.
///
/// Filters only clear the alignment flag; annotations are never dropped.
#ifndef NOVELBOX_ALIGNMENT_FILTER_HPP_
#define NOVELBOX_ALIGNMENT_FILTER_HPP_

#include <map>
#include <string>

#include "novelbox/association.hpp"
#include "novelbox/geometry.hpp"

namespace novelbox::align {

using geom::BoxParams;
using geom::Box2D;
using geom::CameraCalib;

struct FilterThresholds {
  /// Instance-pixel ratio threshold per class.
  std::map<std::string, double> tau_occ;
  /// Crop area threshold in pixels.
  double tau_res = 4000.0;
  /// Projected-box IoU threshold for multi-view consistency.
  double tau_mv = 0.5;

  /// Published per-class occlusion thresholds with tau_res = 4000.
  static FilterThresholds defaults();
  void validate() const;
  /// Throws ValidationError for a class without a threshold.
  double occlusion_threshold(const std::string& class_id) const;
};

/// Passes iff mask_pixel_count / (crop_w * crop_h) > tau_occ(class).
bool occlusion_filter(long mask_pixel_count, int crop_w, int crop_h, const std::string& class_id,
                      const FilterThresholds& thresholds);

/// Passes iff crop_w * crop_h > tau_res.
bool resolution_filter(int crop_w, int crop_h, const FilterThresholds& thresholds);

/// Passes iff IoU(projected box, proposal) >= tau_mv; a box that does not
/// project fails.
bool multiview_filter(const BoxParams& box, const Box2D& proposal, const CameraCalib& calib,
                      const FilterThresholds& thresholds);

struct AlignmentVerdict {
  bool not_occluded = false;
  bool high_res = false;
  bool mv_aligned = false;
  bool fit_for_alignment = false;
};

AlignmentVerdict verdict(const assoc::Proposal2D& proposal, const BoxParams& box,
                         const CameraCalib& calib, const FilterThresholds& thresholds);

}  // namespace novelbox::align

#endif  // NOVELBOX_ALIGNMENT_FILTER_HPP_
