#include "sacc/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sacc/eyedata.hpp"

namespace sacc::kde {

namespace {

constexpr double kFloorAmpDeg = 0.1;
constexpr double kFloorOriDeg = 1.0;
constexpr double kTruncSigmas = 8.0;

std::vector<SaccadeSample> usable(std::span<const SaccadeSample> samples) {
    std::vector<SaccadeSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        if (s.amplitude_deg > 0.0)
            out.push_back(s); // zero-length saccades carry no orientation
    return out;
}

double sample_std(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2)
        return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1));
}

double circular_std_deg(const std::vector<double>& deg) {
    double c = 0.0, s = 0.0;
    for (double a : deg) {
        c += std::cos(a * M_PI / 180.0);
        s += std::sin(a * M_PI / 180.0);
    }
    const double rbar = std::hypot(c, s) / deg.size();
    if (rbar >= 1.0)
        return 0.0;
    return std::sqrt(-2.0 * std::log(rbar)) * 180.0 / M_PI;
}

// ---- diffusion (improved Sheather-Jones) plug-in, one dimension ----

struct IsjResult {
    double bandwidth = 0.0;
    bool converged = false;
    bool degenerate = false; // zero variance, floor applies
};

double isj_fixed_point(double t, double n, const std::vector<double>& i2,
                       const std::vector<double>& a2) {
    const int l = 7;
    double f = 0.0;
    for (std::size_t k = 0; k < i2.size(); ++k)
        f += std::pow(i2[k], l) * a2[k] * std::exp(-i2[k] * M_PI * M_PI * t);
    f *= 2.0 * std::pow(M_PI, 2 * l);
    for (int s = l - 1; s >= 2; --s) {
        double k0 = 1.0;
        for (int j = 1; j <= 2 * s - 1; j += 2)
            k0 *= j;
        k0 /= std::sqrt(2.0 * M_PI);
        const double cst = (1.0 + std::pow(0.5, s + 0.5)) / 3.0;
        const double time = std::pow(2.0 * cst * k0 / (n * f), 2.0 / (3.0 + 2.0 * s));
        double fs = 0.0;
        for (std::size_t k = 0; k < i2.size(); ++k)
            fs += std::pow(i2[k], s) * a2[k] * std::exp(-i2[k] * M_PI * M_PI * time);
        f = 2.0 * std::pow(M_PI, 2 * s) * fs;
    }
    return t - std::pow(2.0 * n * std::sqrt(M_PI) * f, -0.4);
}

IsjResult isj_bandwidth(const std::vector<double>& data) {
    constexpr int kBins = 1024;
    const auto [mn_it, mx_it] = std::minmax_element(data.begin(), data.end());
    const double range0 = *mx_it - *mn_it;
    if (range0 <= 0.0)
        return {0.0, true, true};
    const double lo = *mn_it - range0 / 2.0;
    const double hi = *mx_it + range0 / 2.0;
    const double range = hi - lo;

    std::vector<double> hist(kBins, 0.0);
    for (double x : data) {
        int b = static_cast<int>((x - lo) / range * kBins);
        b = std::clamp(b, 0, kBins - 1);
        hist[static_cast<std::size_t>(b)] += 1.0;
    }
    for (double& h : hist)
        h /= static_cast<double>(data.size());

    // DCT-II of the binned density, direct evaluation
    std::vector<double> i2(kBins - 1), a2(kBins - 1);
    for (int k = 1; k < kBins; ++k) {
        double a = 0.0;
        for (int b = 0; b < kBins; ++b)
            a += hist[static_cast<std::size_t>(b)] *
                 std::cos(M_PI * k * (2.0 * b + 1.0) / (2.0 * kBins));
        i2[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) * k;
        a2[static_cast<std::size_t>(k - 1)] = a * a; // (2a/2)^2
    }

    // distinct points, as the plug-in derivation assumes
    std::vector<double> sorted = data;
    std::sort(sorted.begin(), sorted.end());
    const double n =
        static_cast<double>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());

    auto g = [&](double t) { return isj_fixed_point(t, n, i2, a2); };

    // expand the bracket until the root of t - xi*gamma(t) is enclosed
    double tol = 1e-12 + 0.01 * (std::clamp(n, 50.0, 1050.0) - 50.0) / 1000.0;
    double t_star = -1.0;
    for (int attempt = 0; attempt < 100 && tol <= 0.1; ++attempt, tol = std::min(tol * 2.0, 0.1)) {
        double a = tol * 1e-8, b = tol;
        double ga = g(a), gb = g(b);
        if (!std::isfinite(ga) || !std::isfinite(gb) || ga * gb > 0.0) {
            if (tol >= 0.1)
                break;
            continue;
        }
        for (int it = 0; it < 100; ++it) {
            const double m = 0.5 * (a + b);
            const double gm = g(m);
            if (!std::isfinite(gm))
                break;
            if (ga * gm <= 0.0) {
                b = m;
            } else {
                a = m;
                ga = gm;
            }
        }
        t_star = 0.5 * (a + b);
        break;
    }
    if (t_star <= 0.0)
        return {0.0, false};
    return {std::sqrt(t_star) * range, true};
}

} // namespace

Bandwidth silverman_bandwidth(std::span<const SaccadeSample> samples) {
    const auto use = usable(samples);
    if (use.size() < 2)
        throw EstimationError("silverman_bandwidth: need at least 2 usable samples");
    std::vector<double> amps, oris;
    amps.reserve(use.size());
    oris.reserve(use.size());
    for (const auto& s : use) {
        amps.push_back(s.amplitude_deg);
        oris.push_back(s.orientation_deg);
    }
    const double nf = std::pow(static_cast<double>(use.size()), -1.0 / 6.0);
    Bandwidth bw;
    bw.h_d = std::max(kFloorAmpDeg, sample_std(amps) * nf);
    bw.h_phi = std::max(kFloorOriDeg, circular_std_deg(oris) * nf);
    return bw;
}

Bandwidth botev_bandwidth(std::span<const SaccadeSample> samples) {
    const auto use = usable(samples);
    if (use.size() < 50)
        throw ValidationError("botev_bandwidth: need at least 50 usable samples, got " +
                              std::to_string(use.size()));
    std::vector<double> amps, oris;
    amps.reserve(use.size());
    oris.reserve(use.size());
    for (const auto& s : use) {
        amps.push_back(s.amplitude_deg);
        oris.push_back(s.orientation_deg);
    }
    const auto rd = isj_bandwidth(amps);
    const auto rphi = isj_bandwidth(oris);
    if (!rd.converged || !rphi.converged) {
        Bandwidth bw = silverman_bandwidth(samples);
        bw.fallback = true;
        return bw;
    }
    Bandwidth bw;
    bw.h_d = std::max(kFloorAmpDeg, rd.bandwidth);
    bw.h_phi = std::max(kFloorOriDeg, rphi.bandwidth);
    return bw;
}

namespace {

Bandwidth resolve_bandwidth(std::span<const SaccadeSample> samples, const KdeParams& p) {
    if (p.explicit_bandwidth) {
        if (p.h_d <= 0.0 || p.h_phi <= 0.0)
            throw ConfigError("estimate_joint: explicit bandwidths must be positive");
        return {p.h_d, p.h_phi, false};
    }
    return p.rule == BandwidthRule::Botev ? botev_bandwidth(samples) : silverman_bandwidth(samples);
}

// Accumulates the kernel of one sample replica onto the grid.
void splat_kernel(std::vector<double>& grid, const KdeParams& p, double d, double phi,
                  double h_d, double h_phi) {
    const double aw = p.amp_max_deg / p.amp_bins;
    const double ow = 360.0 / p.ori_bins;
    const double ra = kTruncSigmas * h_d;
    const double ro = kTruncSigmas * h_phi;

    int a0 = static_cast<int>(std::floor((d - ra) / aw - 0.5));
    int a1 = static_cast<int>(std::ceil((d + ra) / aw - 0.5));
    a0 = std::max(a0, 0);
    a1 = std::min(a1, p.amp_bins - 1);
    if (a0 > a1)
        return;
    int o0 = static_cast<int>(std::floor((phi - ro) / ow - 0.5));
    int o1 = static_cast<int>(std::ceil((phi + ro) / ow - 0.5));
    o0 = std::max(o0, 0);
    o1 = std::min(o1, p.ori_bins - 1);
    if (o0 > o1)
        return;

    const double inv2hd2 = 1.0 / (2.0 * h_d * h_d);
    const double inv2ho2 = 1.0 / (2.0 * h_phi * h_phi);
    for (int i = a0; i <= a1; ++i) {
        const double da = (i + 0.5) * aw - d;
        const double ka = std::exp(-da * da * inv2hd2);
        double* row = grid.data() + static_cast<std::size_t>(i) * p.ori_bins;
        for (int j = o0; j <= o1; ++j) {
            const double dp = (j + 0.5) * ow - phi;
            row[j] += ka * std::exp(-dp * dp * inv2ho2);
        }
    }
}

void splat_sample(std::vector<double>& grid, const KdeParams& p, const SaccadeSample& s,
                  double h_d, double h_phi) {
    for (double d : {s.amplitude_deg, -s.amplitude_deg}) { // reflect at d = 0
        for (double off : {-360.0, 0.0, 360.0})            // circular in phi
            splat_kernel(grid, p, d, s.orientation_deg + off, h_d, h_phi);
    }
}

JointSaccadeDistribution finalize(std::vector<double> grid, const KdeParams& p,
                                  const Bandwidth& bw, long n) {
    JointSaccadeDistribution dist;
    dist.amp_bins = p.amp_bins;
    dist.amp_max_deg = p.amp_max_deg;
    dist.ori_bins = p.ori_bins;
    dist.bandwidth_d_deg = bw.h_d;
    dist.bandwidth_phi_deg = bw.h_phi;
    dist.bandwidth_fallback = bw.fallback;
    dist.sample_count = n;
    dist.density = std::move(grid);
    const double total = std::accumulate(dist.density.begin(), dist.density.end(), 0.0);
    if (total <= 0.0)
        throw EstimationError("estimate_joint: all kernel mass fell outside the grid");
    const double scale = 1.0 / (total * dist.cell_area());
    for (double& v : dist.density)
        v *= scale;
    return dist;
}

void check_inputs(const std::vector<SaccadeSample>& use, const KdeParams& p) {
    if (p.amp_bins <= 0 || p.ori_bins <= 0 || p.amp_max_deg <= 0.0)
        throw ConfigError("estimate_joint: bad bin geometry");
    if (use.size() < 2)
        throw EstimationError("estimate_joint: need at least 2 usable samples, got " +
                              std::to_string(use.size()));
    const double mx =
        std::max_element(use.begin(), use.end(), [](const auto& a, const auto& b) {
            return a.amplitude_deg < b.amplitude_deg;
        })->amplitude_deg;
    if (p.amp_max_deg < mx)
        throw ValidationError("estimate_joint: amp_max " + std::to_string(p.amp_max_deg) +
                              " below largest sample amplitude " + std::to_string(mx));
}

} // namespace

JointSaccadeDistribution estimate_joint(std::span<const SaccadeSample> samples,
                                        const KdeParams& params) {
    const auto use = usable(samples);
    check_inputs(use, params);
    const Bandwidth bw = resolve_bandwidth(samples, params);

    const std::size_t cells = static_cast<std::size_t>(params.amp_bins) * params.ori_bins;
    std::vector<double> grid(cells, 0.0);
#pragma omp parallel
    {
        std::vector<double> local(cells, 0.0);
#pragma omp for nowait
        for (long i = 0; i < static_cast<long>(use.size()); ++i)
            splat_sample(local, params, use[static_cast<std::size_t>(i)], bw.h_d, bw.h_phi);
#pragma omp critical
        for (std::size_t k = 0; k < cells; ++k)
            grid[k] += local[k];
    }
    return finalize(std::move(grid), params, bw, static_cast<long>(use.size()));
}

JointSaccadeDistribution serial::estimate_joint(std::span<const SaccadeSample> samples,
                                                const KdeParams& params) {
    const auto use = usable(samples);
    check_inputs(use, params);
    const Bandwidth bw = resolve_bandwidth(samples, params);
    std::vector<double> grid(static_cast<std::size_t>(params.amp_bins) * params.ori_bins, 0.0);
    for (const auto& s : use)
        splat_sample(grid, params, s, bw.h_d, bw.h_phi);
    return finalize(std::move(grid), params, bw, static_cast<long>(use.size()));
}

namespace {

struct CellSamples {
    std::array<std::array<std::vector<SaccadeSample>, 3>, 3> s;
};

CellSamples collect_cells(const std::vector<FixationSequence>& sequences, double ppd) {
    CellSamples out;
    for (const auto& seq : sequences) {
        const auto saccades = eyedata::saccades_from_sequence(seq, ppd);
        for (std::size_t i = 0; i < saccades.size(); ++i) {
            const auto& origin = seq.fixations[i]; // prior is conditioned on x_{t-1}
            const int col = std::min(2, static_cast<int>(origin.x * 3.0 / seq.width));
            const int row = std::min(2, static_cast<int>(origin.y * 3.0 / seq.height));
            out.s[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)].push_back(
                saccades[i]);
        }
    }
    return out;
}

long usable_count(const std::vector<SaccadeSample>& v) {
    return std::count_if(v.begin(), v.end(),
                         [](const SaccadeSample& s) { return s.amplitude_deg > 0.0; });
}

} // namespace

std::array<std::array<long, 3>, 3> spatial_sample_counts(
    const std::vector<FixationSequence>& sequences, double ppd) {
    const auto cells = collect_cells(sequences, ppd);
    std::array<std::array<long, 3>, 3> counts{};
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            counts[r][c] = usable_count(cells.s[r][c]);
    return counts;
}

SpatialDistributionSet estimate_spatial_set(const std::vector<FixationSequence>& sequences,
                                            double ppd, const KdeParams& params) {
    if (sequences.empty())
        throw EstimationError("estimate_spatial_set: no sequences");
    const auto cells = collect_cells(sequences, ppd);

    std::ostringstream starved;
    int n_starved = 0;
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            const long n = usable_count(cells.s[r][c]);
            if (n < 2) {
                if (n_starved++)
                    starved << ", ";
                starved << "cell(" << r << "," << c << ")=" << n;
            }
        }
    }
    if (n_starved > 0)
        throw EstimationError("estimate_spatial_set: " + std::to_string(n_starved) +
                              " starved cell(s): " + starved.str());

    SpatialDistributionSet set;
    set.width = sequences.front().width;
    set.height = sequences.front().height;
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            set.cells[r][c] = estimate_joint(cells.s[r][c], params);
    return set;
}

} // namespace sacc::kde
