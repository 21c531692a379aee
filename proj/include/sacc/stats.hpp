#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sacc/fixation.hpp"

namespace sacc::stats {

struct KsResult {
    double statistic = 0.0; // in [0,1]
    double p_value = 1.0;
};

/// Discrete KL divergence sum(P ln(P/Q)). Both sides are renormalized to sum
/// one; Q is floored at 1e-12 before the log; 0 ln(0/q) = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Two-sample two-dimensional Kolmogorov-Smirnov test in the (d, phi) plane.
/// Statistic: max over the four quadrant orientations, anchored at every data
/// point of both sets, of the empirical CDF difference. p-value from the
/// asymptotic formula with effective n = na*nb/(na+nb). Sets larger than
/// n_draw are subsampled without replacement (seeded).
KsResult ks2d_test(std::span<const SaccadeSample> a, std::span<const SaccadeSample> b,
                   std::size_t n_draw = 5000, std::uint64_t seed = 0x2d2d'5eed);

} // namespace sacc::stats
