#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "sacc/distribution.hpp"
#include "sacc/fixation.hpp"
#include "sacc/grid.hpp"

namespace sacc::engine {

/// The saccade-amplitude/orientation prior queried at the previous fixation:
/// the full 3x3 spatially-variant set, a single pooled distribution, or the
/// uniform ablation (density identically one).
class SaccadePrior {
public:
    static SaccadePrior uniform();
    static SaccadePrior single(JointSaccadeDistribution dist);
    static SaccadePrior spatial(SpatialDistributionSet set);

    /// Density at (d, phi) for a saccade originating at (x_prev, y_prev).
    double density(double x_prev, double y_prev, double d, double phi) const;
    bool is_uniform() const { return kind_ == Kind::Uniform; }

    /// Density over every integer pixel offset from a pixel-aligned origin,
    /// row-major over dy in [-(h-1), h-1] then dx in [-(w-1), w-1]. Built
    /// lazily per spatial cell and cached; the cache is rebuilt when the grid
    /// shape or ppd changes, so keep one shape per concurrent batch. Returns
    /// nullptr for the uniform prior or a non-pixel-aligned origin.
    const std::vector<double>* offset_table(double x_prev, double y_prev, int w, int h,
                                            double ppd) const;

private:
    enum class Kind { Uniform, Single, Spatial };
    Kind kind_ = Kind::Uniform;
    JointSaccadeDistribution single_;
    SpatialDistributionSet spatial_;

    struct TableCache {
        std::mutex mu;
        int w = 0, h = 0;
        double ppd = 0.0;
        std::array<std::vector<double>, 9> cells;
    };
    mutable std::shared_ptr<TableCache> cache_{new TableCache};
};

struct ViewerProfile {
    SaccadePrior prior;
    int candidate_count = 5;        // N_c
    int memory_span = 5;            // T, fixations until full recovery
    double ppd = 28.0;              // pixels per degree
    double inhibition_radius_deg = 2.0;
    bool jacobian_correction = false;
};

/// Recently attended locations with their age in fixations; newest first.
class MemoryState {
public:
    explicit MemoryState(int capacity) : capacity_(capacity) {}

    /// Ages everything by one fixation, drops fully recovered entries, then
    /// records the new location at age 0. Re-attending a remembered location
    /// resets its age.
    void push(const FixationPoint& p);

    struct Entry {
        double x, y;
        int age;
    };
    const std::vector<Entry>& entries() const { return entries_; }
    int capacity() const { return capacity_; }

private:
    int capacity_;
    std::vector<Entry> entries_;
};

struct Scanpath {
    std::string image_id;
    std::uint64_t seed = 0;
    std::vector<FixationPoint> fixations;
};

/// Residual-salience factor at pixel (x, y): product over remembered
/// locations of 1 - rho(age) * G(distance), with G a unit-peak Gaussian of
/// std inhibition_radius * ppd pixels and rho(age) = max(0, 1 - age/T).
double memory_weight(double x, double y, const MemoryState& memory, const ViewerProfile& profile);

/// Per-pixel product of floored saliency, memory weight and the prior density
/// at that pixel's (d, phi) from x_prev, renormalized to sum one.
SaliencyGrid transition_map(const FixationPoint& x_prev, const SaliencyGrid& saliency,
                            const MemoryState& memory, const ViewerProfile& profile);

/// n i.i.d. inverse-CDF draws from a sum-to-one grid; duplicates allowed.
std::vector<FixationPoint> sample_candidates(const SaliencyGrid& map, int n, std::mt19937_64& rng);

/// Winner of saliency * prior density / max(distance, 0.25 deg); ties break
/// to the lowest row-major pixel index.
FixationPoint select_fixation(const std::vector<FixationPoint>& candidates,
                              const SaliencyGrid& saliency, const FixationPoint& x_prev,
                              const ViewerProfile& profile);

Scanpath generate_scanpath(const SaliencyGrid& saliency, const ViewerProfile& profile,
                           int n_fixations, std::uint64_t seed, const std::string& image_id = "");

/// Scanpath k is generated with seed = master_seed ^ k; output is independent
/// of scheduling.
std::vector<Scanpath> batch_generate(const SaliencyGrid& saliency, const ViewerProfile& profile,
                                     int n_scanpaths, int n_fixations, std::uint64_t master_seed,
                                     const std::string& image_id = "");

struct PlausibilityScores {
    double kl_amplitude = 0.0;
    double kl_joint = 0.0;
};

/// KL(reference || generated) for the 1D amplitude marginal and the 2D joint
/// distribution, both estimated on the reference's bin grid.
PlausibilityScores scanpath_plausibility(const std::vector<Scanpath>& generated,
                                         const JointSaccadeDistribution& reference, double ppd);

std::vector<SaccadeSample> saccades_from_scanpaths(const std::vector<Scanpath>& paths, double ppd);

std::string scanpaths_to_csv(const std::vector<Scanpath>& paths);
std::vector<Scanpath> scanpaths_from_csv(const std::string& text);

namespace serial {
SaliencyGrid transition_map(const FixationPoint& x_prev, const SaliencyGrid& saliency,
                            const MemoryState& memory, const ViewerProfile& profile);
} // namespace serial

} // namespace sacc::engine
