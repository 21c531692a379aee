#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sacc/fixation.hpp"
#include "sacc/grid.hpp"

namespace sacc::metrics {

struct MetricReport {
    std::optional<double> cc;
    std::optional<double> sim;
    std::optional<double> emd;
    std::optional<double> auc_judd;
    std::optional<double> auc_borji;
    std::optional<double> nss;
    std::vector<std::string> errors; // per-field failure notes
};

/// Pearson correlation over all pixels. Throws on a constant map.
double cc(const SaliencyGrid& a, const SaliencyGrid& b);

/// Histogram intersection: sum of pixelwise minima after sum-to-one
/// normalization of both maps.
double sim(const SaliencyGrid& a, const SaliencyGrid& b);

/// Exact optimal-transport cost with Euclidean ground distance, after
/// area-average downsampling to at most `downsample` cells per side.
/// Cost is reported in downsampled-cell units.
double emd(const SaliencyGrid& a, const SaliencyGrid& b, int downsample = 32);

/// Mean of the z-scored map at the fixation pixels.
double nss(const SaliencyGrid& s, const std::vector<FixationPoint>& fixations);

/// AUC with all non-fixated pixels as negatives, thresholds swept over the
/// saliency values at the fixations; ties count as above threshold.
double auc_judd(const SaliencyGrid& s, const std::vector<FixationPoint>& fixations);

/// AUC averaged over n_splits draws of as many uniformly random negative
/// pixels as there are fixations.
double auc_borji(const SaliencyGrid& s, const std::vector<FixationPoint>& fixations,
                 int n_splits = 100, std::uint64_t seed = 0xb0a1'5eed);

/// Full battery: map-vs-map metrics against human_map, fixation metrics
/// against fixations. Degenerate inputs mark fields unavailable instead of
/// failing the report.
MetricReport evaluate_all(const SaliencyGrid& s, const SaliencyGrid& human_map,
                          const std::vector<FixationPoint>& fixations);

/// Exact transportation problem on explicit supplies/demands; exposed for
/// the EMD path and its tests. cost is row-major supply x demand.
double solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                       const std::vector<double>& cost);

std::string report_csv_header();
std::string report_csv_row(const std::string& image_id, const std::string& group_id,
                           const std::string& model, const MetricReport& r);
std::string report_json(const MetricReport& r);

} // namespace sacc::metrics
