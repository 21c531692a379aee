#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sacc/engine.hpp"
#include "sacc/kde.hpp"

namespace sacc::cli {

struct EstimateOptions {
    std::filesystem::path log_path;
    int width = 0;
    int height = 0;
    double ppd = 28.0;
    std::string group_filter; // empty = all groups
    bool spatial = true;      // --grid 3x3 vs 1x1
    kde::KdeParams kde;
    bool auto_amp_max = true; // grow amp_max to cover the data
    std::filesystem::path out_dir;
};

struct GenerateOptions {
    std::filesystem::path saliency_path;
    std::filesystem::path profile_path;
    int n_scanpaths = 20;
    int n_fixations = 15;
    std::uint64_t seed = 0;
    bool uniform_prior = false;
    std::optional<int> candidate_count;
    std::optional<int> memory_span;
    std::optional<bool> jacobian_correction;
    std::filesystem::path out_dir;
};

struct EvaluateOptions {
    std::filesystem::path predicted_path; // saliency map or scanpath CSV
    std::filesystem::path human_map_path;
    std::filesystem::path log_path;
    int width = 0;
    int height = 0;
    double ppd = 28.0;
    std::string model_label = "model";
    std::filesystem::path reference_dist_path; // optional, adds KL columns
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

struct SweepNcOptions {
    std::filesystem::path saliency_path;
    std::filesystem::path profile_path;
    int nc_min = 1;
    int nc_max = 9;
    int repetitions = 1;
    int n_scanpaths = 20;
    int n_fixations = 15;
    std::uint64_t seed = 0;
    std::filesystem::path human_map_path; // optional, adds metric means
    std::filesystem::path log_path;       // optional, for fixation metrics
    std::filesystem::path out_dir;
};

struct AnalyzeOptions {
    std::filesystem::path log_path;
    int width = 0;
    int height = 0;
    double ppd = 28.0;
    std::size_t ks_draws = 5000;
    kde::KdeParams kde;
    std::filesystem::path out_dir;
};

int cmd_estimate(const EstimateOptions& opt);
int cmd_generate(const GenerateOptions& opt);
int cmd_evaluate(const EvaluateOptions& opt);
int cmd_sweep_nc(const SweepNcOptions& opt);
int cmd_analyze(const AnalyzeOptions& opt);

/// Profile JSON: {candidate_count, memory_span, ppd, inhibition_radius_deg,
/// distribution_path, jacobian_correction}. distribution_path may name a
/// spatial-set JSON, a single-distribution JSON, or "uniform".
engine::ViewerProfile load_profile(const std::filesystem::path& path);

/// Pools a spatial set into one distribution, weighting cells by their
/// sample counts.
JointSaccadeDistribution pool_spatial_set(const SpatialDistributionSet& set);

} // namespace sacc::cli
