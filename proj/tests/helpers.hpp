#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "sacc/distribution.hpp"
#include "sacc/fixation.hpp"
#include "sacc/grid.hpp"

namespace sacc::testing {

inline std::vector<FixationPoint> random_fixations(std::size_t n, int w, int h,
                                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, std::nextafter(static_cast<double>(w), 0.0));
    std::uniform_real_distribution<double> uy(0.0, std::nextafter(static_cast<double>(h), 0.0));
    std::vector<FixationPoint> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = {ux(rng), uy(rng), static_cast<int>(i), std::nullopt};
    return out;
}

inline SaliencyGrid random_grid(int w, int h, std::uint64_t seed, bool normalize = true) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SaliencyGrid g(w, h);
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = u(rng);
    if (normalize)
        g.normalize_sum_to_one();
    return g;
}

/// Two-component (d, phi) mixture with an analytic density on the bin grid:
/// independent Gaussians in amplitude (reflected at 0) and wrapped Gaussians
/// in orientation.
struct MixtureComponent {
    double weight;
    double amp_mean, amp_std;
    double ori_mean, ori_std;
};

inline double mixture_density(const std::vector<MixtureComponent>& comps, double d, double phi) {
    double total = 0.0;
    for (const auto& c : comps) {
        // amplitude: Gaussian reflected at zero
        const double za = (d - c.amp_mean) / c.amp_std;
        const double zr = (d + c.amp_mean) / c.amp_std;
        const double fd = (std::exp(-0.5 * za * za) + std::exp(-0.5 * zr * zr)) /
                          (c.amp_std * std::sqrt(2.0 * M_PI));
        // orientation: wrapped Gaussian, three terms are plenty at these stds
        double fo = 0.0;
        for (int k = -2; k <= 2; ++k) {
            const double zo = (phi - c.ori_mean + 360.0 * k) / c.ori_std;
            fo += std::exp(-0.5 * zo * zo) / (c.ori_std * std::sqrt(2.0 * M_PI));
        }
        total += c.weight * fd * fo;
    }
    return total;
}

inline std::vector<SaccadeSample> sample_mixture(const std::vector<MixtureComponent>& comps,
                                                 std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<SaccadeSample> out;
    out.reserve(n);
    while (out.size() < n) {
        double pick = u(rng);
        const MixtureComponent* c = &comps.back();
        for (const auto& comp : comps) {
            if (pick < comp.weight) {
                c = &comp;
                break;
            }
            pick -= comp.weight;
        }
        double d = std::abs(c->amp_mean + c->amp_std * gauss(rng)); // reflect at 0
        double phi = std::fmod(c->ori_mean + c->ori_std * gauss(rng), 360.0);
        if (phi < 0.0)
            phi += 360.0;
        if (d <= 0.0)
            continue;
        out.push_back({d, phi});
    }
    return out;
}

/// Evaluates an analytic density at every bin center of the given geometry,
/// renormalized so sum * cell_area = 1.
inline JointSaccadeDistribution grid_from_density(
    int amp_bins, double amp_max, int ori_bins,
    const std::function<double(double, double)>& density) {
    JointSaccadeDistribution dist;
    dist.amp_bins = amp_bins;
    dist.amp_max_deg = amp_max;
    dist.ori_bins = ori_bins;
    dist.bandwidth_d_deg = 0.5;
    dist.bandwidth_phi_deg = 10.0;
    dist.sample_count = 1;
    dist.density.resize(static_cast<std::size_t>(amp_bins) * ori_bins);
    double total = 0.0;
    for (int i = 0; i < amp_bins; ++i)
        for (int j = 0; j < ori_bins; ++j) {
            const double v = density(dist.amp_center(i), dist.ori_center(j));
            dist.at(i, j) = v;
            total += v;
        }
    const double scale = 1.0 / (total * dist.cell_area());
    for (double& v : dist.density)
        v *= scale;
    return dist;
}

} // namespace sacc::testing
