#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sacc/cli.hpp"
#include "sacc/errors.hpp"
#include "sacc/eyedata.hpp"
#include "sacc/kde.hpp"
#include "sacc/stats.hpp"
#include "helpers.hpp"

using namespace sacc;
using namespace sacc::kde;
using sacc::testing::MixtureComponent;

namespace {

const std::vector<MixtureComponent> kMixture = {
    {0.6, 3.0, 1.0, 45.0, 25.0},
    {0.4, 8.0, 1.5, 200.0, 30.0},
};

// leave-one-out cross-validated log-likelihood for a 1D Gaussian KDE
double loo_cv_score(const std::vector<double>& x, double h) {
    const double norm = 1.0 / (h * std::sqrt(2.0 * M_PI));
    double score = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (i == j)
                continue;
            const double z = (x[i] - x[j]) / h;
            if (std::abs(z) < 8.0)
                f += std::exp(-0.5 * z * z);
        }
        score += std::log(std::max(f * norm / (x.size() - 1), 1e-300));
    }
    return score;
}

double loo_cv_best(const std::vector<double>& x, double lo, double hi, int steps) {
    double best_h = lo, best_s = -1e300;
    for (int i = 0; i <= steps; ++i) {
        const double h = lo * std::pow(hi / lo, static_cast<double>(i) / steps);
        const double s = loo_cv_score(x, h);
        if (s > best_s) {
            best_s = s;
            best_h = h;
        }
    }
    return best_h;
}

} // namespace

TEST_CASE("silverman bandwidth") {
    SUBCASE("zero amplitude variance floors at 0.1 degrees") {
        const std::vector<SaccadeSample> s = {{2.0, 10.0}, {2.0, 50.0}};
        const auto bw = silverman_bandwidth(s);
        CHECK(bw.h_d == doctest::Approx(0.1));
    }
    SUBCASE("matches the direct formula on normal data") {
        std::mt19937_64 rng(1);
        std::normal_distribution<double> g(10.0, 1.0);
        std::vector<SaccadeSample> s(10000);
        std::vector<double> amps;
        for (auto& x : s) {
            x = {std::abs(g(rng)), 180.0};
            amps.push_back(x.amplitude_deg);
        }
        const double mean = std::accumulate(amps.begin(), amps.end(), 0.0) / amps.size();
        double ss = 0.0;
        for (double a : amps)
            ss += (a - mean) * (a - mean);
        const double sigma = std::sqrt(ss / (amps.size() - 1));
        const auto bw = silverman_bandwidth(s);
        CHECK(bw.h_d == doctest::Approx(sigma * std::pow(10000.0, -1.0 / 6.0)).epsilon(1e-9));
    }
    SUBCASE("doubling amplitudes doubles the bandwidth") {
        auto s = testing::sample_mixture(kMixture, 500, 3);
        const auto bw1 = silverman_bandwidth(s);
        for (auto& x : s)
            x.amplitude_deg *= 2.0;
        const auto bw2 = silverman_bandwidth(s);
        CHECK(bw2.h_d == doctest::Approx(2.0 * bw1.h_d).epsilon(1e-12));
        CHECK(bw2.h_phi == doctest::Approx(bw1.h_phi).epsilon(1e-12));
    }
}

TEST_CASE("botev bandwidth") {
    SUBCASE("fewer than 50 samples is a precondition error") {
        const auto s = testing::sample_mixture(kMixture, 40, 5);
        CHECK_THROWS_AS(botev_bandwidth(s), ValidationError);
    }
    SUBCASE("standard normal recovers the asymptotically optimal rate") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<SaccadeSample> s(10000);
        for (auto& x : s)
            x = {10.0 + g(rng), 180.0}; // amplitude slot carries the test data, kept positive
        const auto bw = botev_bandwidth(s);
        const double h_opt = 1.06 * std::pow(10000.0, -0.2);
        CHECK(bw.h_d > 0.8 * h_opt);
        CHECK(bw.h_d < 1.2 * h_opt);
        CHECK(!bw.fallback);
    }
    SUBCASE("well-separated bimodal data beats the rule of thumb") {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g(0.0, 0.5);
        std::vector<SaccadeSample> s(2000);
        std::vector<double> raw;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double x = g(rng) + (i % 2 == 0 ? 2.0 : 12.0);
            s[i] = {x, 180.0};
            raw.push_back(x);
        }
        const auto isj = botev_bandwidth(s);
        const auto rot = silverman_bandwidth(s);
        CHECK(isj.h_d < rot.h_d);
        // cross-validated scan confirms the rule of thumb over-smooths
        const double cv = loo_cv_best(raw, 0.05, 5.0, 40);
        CHECK(cv < rot.h_d);
        CHECK(isj.h_d < 2.0 * cv);
        CHECK(isj.h_d > 0.5 * cv);
    }
}

TEST_CASE("estimate_joint recovers an analytic mixture") {
    const auto samples = testing::sample_mixture(kMixture, 10000, 17);
    KdeParams p; // default 80 x 20deg x 120 grid
    p.rule = BandwidthRule::Botev;
    const auto est = estimate_joint(samples, p);

    const auto analytic = testing::grid_from_density(
        p.amp_bins, p.amp_max_deg, p.ori_bins,
        [](double d, double phi) { return testing::mixture_density(kMixture, d, phi); });

    const double kl = stats::kl_divergence(analytic.density, est.density);
    CHECK(kl < 0.05);
}

TEST_CASE("estimate_joint point mass with tiny bandwidth peaks at the datum") {
    std::vector<SaccadeSample> s(10, {2.0, 90.0});
    KdeParams p;
    p.explicit_bandwidth = true;
    p.h_d = 0.1;
    p.h_phi = 1.0;
    const auto est = estimate_joint(s, p);
    int bi = 0, bj = 0;
    for (int i = 0; i < est.amp_bins; ++i)
        for (int j = 0; j < est.ori_bins; ++j)
            if (est.at(i, j) > est.at(bi, bj)) {
                bi = i;
                bj = j;
            }
    CHECK(std::abs(est.amp_center(bi) - 2.0) <= est.amp_step());
    CHECK(std::abs(est.ori_center(bj) - 90.0) <= est.ori_step());
}

TEST_CASE("orientation wrap is continuous across the 0/360 seam") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> amp(5.0, 1.0);
    std::normal_distribution<double> ori(0.0, 15.0);
    std::vector<SaccadeSample> near_seam, rotated;
    for (int i = 0; i < 4000; ++i) {
        double a = std::abs(amp(rng));
        double o = std::fmod(ori(rng) + 360.0, 360.0);
        near_seam.push_back({a, o});
        rotated.push_back({a, std::fmod(o + 180.0, 360.0)});
    }
    KdeParams p;
    const auto e1 = estimate_joint(near_seam, p);
    const auto e2 = estimate_joint(rotated, p);
    const int half = p.ori_bins / 2;
    // compare against the same estimation rotated away from the seam
    double peak = *std::max_element(e1.density.begin(), e1.density.end());
    for (int i = 0; i < p.amp_bins; ++i)
        for (int j = 0; j < p.ori_bins; ++j) {
            const double a = e1.at(i, j);
            const double b = e2.at(i, (j + half) % p.ori_bins);
            if (a > 0.05 * peak)
                CHECK(std::abs(a - b) / a < 0.05);
        }
}

TEST_CASE("estimate_joint guards") {
    KdeParams p;
    SUBCASE("fewer than two usable samples") {
        const std::vector<SaccadeSample> s = {{0.0, 0.0}, {2.0, 10.0}};
        CHECK_THROWS_AS(estimate_joint(s, p), EstimationError);
    }
    SUBCASE("amp_max below the data") {
        const std::vector<SaccadeSample> s = {{2.0, 10.0}, {25.0, 50.0}};
        CHECK_THROWS_AS(estimate_joint(s, p), ValidationError);
    }
}

TEST_CASE("evaluate_density") {
    const auto samples = testing::sample_mixture(kMixture, 2000, 31);
    KdeParams p;
    const auto est = estimate_joint(samples, p);

    SUBCASE("bin center query returns the stored value") {
        CHECK(evaluate_density(est, est.amp_center(10), est.ori_center(40)) ==
              doctest::Approx(est.at(10, 40)).epsilon(1e-12));
    }
    SUBCASE("outside the support is zero") {
        CHECK(evaluate_density(est, est.amp_max_deg + 1.0, 10.0) == 0.0);
    }
    SUBCASE("negative amplitude throws") {
        CHECK_THROWS_AS(evaluate_density(est, -0.5, 10.0), ValidationError);
    }
    SUBCASE("quadrature integral is one") {
        const int na = 4 * est.amp_bins, no = 4 * est.ori_bins;
        const double da = est.amp_max_deg / na, dp = 360.0 / no;
        double integral = 0.0;
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < no; ++j)
                integral += evaluate_density(est, (i + 0.5) * da, (j + 0.5) * dp);
        integral *= da * dp;
        CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
    }
}

namespace {

std::vector<FixationSequence> center_pointing_sequences(int w, int h, int per_cell,
                                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::uniform_real_distribution<double> len(30.0, 90.0);
    std::vector<FixationSequence> seqs;
    for (int cr = 0; cr < 3; ++cr) {
        for (int cc = 0; cc < 3; ++cc) {
            for (int k = 0; k < per_cell; ++k) {
                FixationSequence s;
                s.observer_id = "o";
                s.image_id = "img";
                s.group_id = "g";
                s.width = w;
                s.height = h;
                const double ox = (cc + u(rng)) * w / 3.0;
                const double oy = (cr + u(rng)) * h / 3.0;
                double dx = w / 2.0 - ox, dy = h / 2.0 - oy;
                const double norm = std::hypot(dx, dy);
                if (norm < 1.0) {
                    dx = 1.0;
                    dy = 0.0;
                } else {
                    dx /= norm;
                    dy /= norm;
                }
                const double l = len(rng);
                const double tx = std::clamp(ox + dx * l, 0.0, w - 1.0);
                const double ty = std::clamp(oy + dy * l, 0.0, h - 1.0);
                s.fixations = {{ox, oy, 0, {}}, {tx, ty, 1, {}}};
                seqs.push_back(std::move(s));
            }
        }
    }
    return seqs;
}

double circular_mean_deg(const JointSaccadeDistribution& d) {
    double c = 0.0, s = 0.0;
    for (int i = 0; i < d.amp_bins; ++i)
        for (int j = 0; j < d.ori_bins; ++j) {
            c += d.at(i, j) * std::cos(d.ori_center(j) * M_PI / 180.0);
            s += d.at(i, j) * std::sin(d.ori_center(j) * M_PI / 180.0);
        }
    double a = std::atan2(s, c) * 180.0 / M_PI;
    return a < 0.0 ? a + 360.0 : a;
}

double angle_diff_deg(double a, double b) {
    double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

} // namespace

TEST_CASE("estimate_spatial_set") {
    const int w = 600, h = 450;
    SUBCASE("starved cells are named") {
        // all saccades originate inside cell (0,0)
        std::vector<FixationSequence> seqs;
        FixationSequence s;
        s.width = w;
        s.height = h;
        s.fixations = {{10, 10, 0, {}}, {300, 220, 1, {}}, {20, 20, 2, {}}, {350, 260, 3, {}}};
        // saccade origins: (10,10) cell(0,0); (300,220) cell(1,1); (20,20) cell(0,0)
        seqs.push_back(s);
        try {
            estimate_spatial_set(seqs, 28.0, KdeParams{});
            FAIL("expected EstimationError");
        } catch (const EstimationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("starved") != std::string::npos);
            CHECK(msg.find("cell(0,2)") != std::string::npos);
            CHECK(msg.find("cell(2,2)") != std::string::npos);
        }
    }
    SUBCASE("corner cells point toward the image center") {
        const auto seqs = center_pointing_sequences(w, h, 80, 41);
        KdeParams p;
        const auto set = estimate_spatial_set(seqs, 28.0, p);
        for (int cr : {0, 2}) {
            for (int cc : {0, 2}) {
                const double cx = (cc + 0.5) * w / 3.0;
                const double cy = (cr + 0.5) * h / 3.0;
                double expect = std::atan2(-(h / 2.0 - cy), w / 2.0 - cx) * 180.0 / M_PI;
                if (expect < 0.0)
                    expect += 360.0;
                const double got = circular_mean_deg(
                    set.cells[static_cast<std::size_t>(cr)][static_cast<std::size_t>(cc)]);
                CHECK(angle_diff_deg(got, expect) <= 15.0);
            }
        }
    }
    SUBCASE("count-weighted pooling matches direct pooled estimation") {
        const auto seqs = center_pointing_sequences(w, h, 60, 43);
        KdeParams p;
        p.explicit_bandwidth = true;
        p.h_d = 0.4;
        p.h_phi = 8.0;
        const auto set = estimate_spatial_set(seqs, 28.0, p);
        const auto pooled = cli::pool_spatial_set(set);

        std::vector<SaccadeSample> all;
        for (const auto& s : seqs) {
            const auto v = sacc::eyedata::saccades_from_sequence(s, 28.0);
            all.insert(all.end(), v.begin(), v.end());
        }
        const auto direct = estimate_joint(all, p);
        CHECK(stats::kl_divergence(direct.density, pooled.density) < 0.05);
    }
}

TEST_CASE("estimate_joint invariants") {
    auto samples = testing::sample_mixture(kMixture, 1500, 53);
    KdeParams p;

    SUBCASE("sample order does not matter") {
        const auto a = estimate_joint(samples, p);
        std::mt19937_64 rng(99);
        std::shuffle(samples.begin(), samples.end(), rng);
        const auto b = estimate_joint(samples, p);
        for (std::size_t i = 0; i < a.density.size(); ++i)
            CHECK(std::abs(a.density[i] - b.density[i]) < 1e-9);
    }
    SUBCASE("density integrates to one") {
        const auto a = estimate_joint(samples, p);
        double total = 0.0;
        for (double v : a.density) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(total * a.cell_area() == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("rotating orientations rotates the density") {
        KdeParams pe = p;
        pe.explicit_bandwidth = true;
        pe.h_d = 0.4;
        pe.h_phi = 8.0;
        const auto a = estimate_joint(samples, pe);
        const double shift = 10.0 * a.ori_step(); // exact bin multiple
        auto rotated = samples;
        for (auto& s : rotated)
            s.orientation_deg = std::fmod(s.orientation_deg + shift, 360.0);
        const auto b = estimate_joint(rotated, pe);
        for (int i = 0; i < a.amp_bins; ++i)
            for (int j = 0; j < a.ori_bins; ++j)
                CHECK(b.at(i, (j + 10) % a.ori_bins) ==
                      doctest::Approx(a.at(i, j)).epsilon(1e-6));
    }
    SUBCASE("parallel estimation matches the serial reference") {
        const auto a = estimate_joint(samples, p);
        const auto b = serial::estimate_joint(samples, p);
        for (std::size_t i = 0; i < a.density.size(); ++i)
            CHECK(std::abs(a.density[i] - b.density[i]) < 1e-9);
    }
}
