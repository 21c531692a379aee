#pragma once

#include <span>
#include <vector>

#include "sacc/distribution.hpp"
#include "sacc/fixation.hpp"

namespace sacc::kde {

struct Bandwidth {
    double h_d = 0.0;
    double h_phi = 0.0;
    bool fallback = false; // set when the diffusion fixed point failed to converge
};

enum class BandwidthRule { Silverman, Botev };

struct KdeParams {
    int amp_bins = 80;
    double amp_max_deg = 20.0;
    int ori_bins = 120;
    BandwidthRule rule = BandwidthRule::Silverman;
    bool explicit_bandwidth = false;
    double h_d = 0.0;
    double h_phi = 0.0;
};

/// Per-dimension rule-of-thumb h_k = sigma_k * n^(-1/6) (2D case), circular
/// std for the orientation. Floors: 0.1 deg amplitude, 1 deg orientation.
Bandwidth silverman_bandwidth(std::span<const SaccadeSample> samples);

/// Per-dimension diffusion (improved Sheather-Jones) plug-in bandwidth.
/// Needs >= 50 samples; falls back to silverman_bandwidth on fixed-point
/// non-convergence, flagged in the result.
Bandwidth botev_bandwidth(std::span<const SaccadeSample> samples);

/// Product-Gaussian KDE on the bin-center grid. Orientation is treated as
/// circular by replicating each sample at phi +/- 360; amplitude mass below
/// zero is reflected at the d=0 boundary. Zero-amplitude samples are dropped.
JointSaccadeDistribution estimate_joint(std::span<const SaccadeSample> samples,
                                        const KdeParams& params);

/// Nine independent estimates, one per 3x3 pixel block; a saccade belongs
/// to the cell containing its origin fixation.
SpatialDistributionSet estimate_spatial_set(const std::vector<FixationSequence>& sequences,
                                            double ppd, const KdeParams& params);

/// Per-cell usable-sample counts laid out [row][col], for reporting.
std::array<std::array<long, 3>, 3> spatial_sample_counts(
    const std::vector<FixationSequence>& sequences, double ppd);

namespace serial {
JointSaccadeDistribution estimate_joint(std::span<const SaccadeSample> samples,
                                        const KdeParams& params);
} // namespace serial

} // namespace sacc::kde
