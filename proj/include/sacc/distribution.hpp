#pragma once

#include <array>
#include <string>
#include <vector>

#include "sacc/errors.hpp"

namespace sacc {

/// Discretized joint density over (amplitude deg, orientation deg).
/// density is amp_bins x ori_bins row-major (amplitude-major) and integrates
/// to one: sum(density) * cell_area() == 1.
struct JointSaccadeDistribution {
    int amp_bins = 0;
    double amp_max_deg = 0.0;
    int ori_bins = 0;
    std::vector<double> density;
    double bandwidth_d_deg = 0.0;
    double bandwidth_phi_deg = 0.0;
    long sample_count = 0;
    bool bandwidth_fallback = false;

    double amp_step() const { return amp_max_deg / amp_bins; }
    double ori_step() const { return 360.0 / ori_bins; }
    double cell_area() const { return amp_step() * ori_step(); }
    double amp_center(int i) const { return (i + 0.5) * amp_step(); }
    double ori_center(int j) const { return (j + 0.5) * ori_step(); }
    double& at(int i, int j) { return density[static_cast<std::size_t>(i) * ori_bins + j]; }
    double at(int i, int j) const { return density[static_cast<std::size_t>(i) * ori_bins + j]; }
};

/// 3x3 grid of joint distributions; cells[row][col] governs the pixel block
/// [col*W/3,(col+1)*W/3) x [row*H/3,(row+1)*H/3).
struct SpatialDistributionSet {
    std::array<std::array<JointSaccadeDistribution, 3>, 3> cells;
    int width = 0;
    int height = 0;

    const JointSaccadeDistribution& cell_at(double x, double y) const {
        int col = std::min(2, static_cast<int>(x * 3.0 / width));
        int row = std::min(2, static_cast<int>(y * 3.0 / height));
        return cells[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    }
};

/// Bilinear lookup on the bin grid, circular in phi. d past amp_max returns 0;
/// negative d throws.
double evaluate_density(const JointSaccadeDistribution& dist, double d, double phi);

std::string to_json_string(const JointSaccadeDistribution& dist);
std::string to_json_string(const SpatialDistributionSet& set);
JointSaccadeDistribution joint_from_json(const std::string& text);
SpatialDistributionSet spatial_set_from_json(const std::string& text);

} // namespace sacc
