#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sacc/fixation.hpp"
#include "sacc/grid.hpp"

namespace sacc::eyedata {

/// Parses a fixation log CSV (header: observer_id,image_id,group_id,index,x,y,duration_ms).
/// Rows are grouped by (observer, image) into sequences ordered by index and the
/// first fixation of every trial is dropped. Out-of-bounds rows throw.
std::vector<FixationSequence> parse_fixation_log(std::string_view text, int width, int height);

/// Inverse of parse_fixation_log for the retained rows.
std::string serialize_fixation_log(const std::vector<FixationSequence>& sequences);

/// One sample per consecutive fixation pair. amplitude = pixel distance / ppd;
/// orientation = atan2(-dy, dx) folded to [0, 360), so upward on screen is 90.
/// Zero-length saccades come out as (0, 0).
std::vector<SaccadeSample> saccades_from_sequence(const FixationSequence& seq, double ppd);

/// Sum of isotropic Gaussians (std = sigma pixels, truncated at 4 sigma) centered
/// at each fixation, normalized sum-to-one.
SaliencyGrid fixation_saliency_map(const std::vector<FixationPoint>& fixations,
                                   int width, int height, double sigma = 28.0);

/// Crown radii are 10%..100% of the distance between the image center and the
/// top-left corner. Fixations beyond the outermost circle count in crown 10.
CrownHistogram center_bias_crowns(const std::vector<FixationPoint>& fixations,
                                  int width, int height);

namespace serial {
/// Reference splat loop kept for testing the parallel kernel.
SaliencyGrid fixation_saliency_map(const std::vector<FixationPoint>& fixations,
                                   int width, int height, double sigma);
} // namespace serial

} // namespace sacc::eyedata
