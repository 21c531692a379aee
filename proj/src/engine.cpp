#include "sacc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sacc/kde.hpp"
#include "sacc/stats.hpp"

namespace sacc::engine {

namespace {

constexpr double kSaliencyFloorRel = 1e-9;
constexpr double kDistanceFloorDeg = 0.25; // one amplitude bin

double fold_angle_deg(double a) {
    a = std::fmod(a, 360.0);
    if (a < 0.0)
        a += 360.0;
    return a;
}

} // namespace

SaccadePrior SaccadePrior::uniform() {
    return SaccadePrior{};
}

SaccadePrior SaccadePrior::single(JointSaccadeDistribution dist) {
    SaccadePrior p;
    p.kind_ = Kind::Single;
    p.single_ = std::move(dist);
    return p;
}

SaccadePrior SaccadePrior::spatial(SpatialDistributionSet set) {
    SaccadePrior p;
    p.kind_ = Kind::Spatial;
    p.spatial_ = std::move(set);
    return p;
}

double SaccadePrior::density(double x_prev, double y_prev, double d, double phi) const {
    switch (kind_) {
    case Kind::Uniform:
        return 1.0;
    case Kind::Single:
        return evaluate_density(single_, d, phi);
    case Kind::Spatial:
        return evaluate_density(spatial_.cell_at(x_prev, y_prev), d, phi);
    }
    return 1.0;
}

const std::vector<double>* SaccadePrior::offset_table(double x_prev, double y_prev, int w,
                                                      int h, double ppd) const {
    if (kind_ == Kind::Uniform)
        return nullptr;
    if (x_prev != std::floor(x_prev) || y_prev != std::floor(y_prev))
        return nullptr;

    int cell = 0;
    const JointSaccadeDistribution* dist = &single_;
    if (kind_ == Kind::Spatial) {
        const int col = std::min(2, static_cast<int>(x_prev * 3.0 / spatial_.width));
        const int row = std::min(2, static_cast<int>(y_prev * 3.0 / spatial_.height));
        cell = row * 3 + col;
        dist = &spatial_.cells[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    }

    std::lock_guard<std::mutex> lock(cache_->mu);
    if (cache_->w != w || cache_->h != h || cache_->ppd != ppd) {
        for (auto& c : cache_->cells)
            c.clear();
        cache_->w = w;
        cache_->h = h;
        cache_->ppd = ppd;
    }
    auto& table = cache_->cells[static_cast<std::size_t>(cell)];
    if (table.empty()) {
        const int tw = 2 * w - 1;
        table.resize(static_cast<std::size_t>(tw) * (2 * h - 1));
        const double inv_ppd = 1.0 / ppd;
        for (int dy = -(h - 1); dy <= h - 1; ++dy) {
            double* trow = table.data() + static_cast<std::size_t>(dy + h - 1) * tw;
            for (int dx = -(w - 1); dx <= w - 1; ++dx) {
                const double d = std::hypot(static_cast<double>(dx), static_cast<double>(dy)) *
                                 inv_ppd;
                const double phi = dx == 0 && dy == 0
                                       ? 0.0
                                       : fold_angle_deg(std::atan2(static_cast<double>(-dy),
                                                                   static_cast<double>(dx)) *
                                                        180.0 / M_PI);
                trow[dx + w - 1] = evaluate_density(*dist, d, phi);
            }
        }
    }
    return &table;
}

void MemoryState::push(const FixationPoint& p) {
    if (capacity_ <= 0)
        return;
    for (auto& e : entries_)
        ++e.age;
    std::erase_if(entries_, [this](const Entry& e) { return e.age >= capacity_; });
    std::erase_if(entries_, [&](const Entry& e) { return e.x == p.x && e.y == p.y; });
    entries_.insert(entries_.begin(), Entry{p.x, p.y, 0});
}

double memory_weight(double x, double y, const MemoryState& memory,
                     const ViewerProfile& profile) {
    if (profile.memory_span <= 0 || memory.entries().empty())
        return 1.0;
    const double sigma = profile.inhibition_radius_deg * profile.ppd;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const double span = profile.memory_span;
    double factor = 1.0;
    for (const auto& e : memory.entries()) {
        const double rho = std::max(0.0, 1.0 - e.age / span);
        if (rho <= 0.0)
            continue;
        const double dx = x - e.x, dy = y - e.y;
        factor *= 1.0 - rho * std::exp(-(dx * dx + dy * dy) * inv2s2);
    }
    return std::clamp(factor, 0.0, 1.0);
}

namespace {

template <bool Parallel>
SaliencyGrid transition_map_impl(const FixationPoint& x_prev, const SaliencyGrid& saliency,
                                 const MemoryState& memory, const ViewerProfile& profile) {
    if (!saliency.in_bounds(x_prev.x, x_prev.y))
        throw ValidationError("transition_map: previous fixation outside the image");
    const int w = saliency.width(), h = saliency.height();
    SaliencyGrid out(w, h);
    const double floor_val = kSaliencyFloorRel * saliency.max_value();
    const double inv_ppd = 1.0 / profile.ppd;
    const bool uniform = profile.prior.is_uniform();
    const std::vector<double>* table =
        uniform ? nullptr : profile.prior.offset_table(x_prev.x, x_prev.y, w, h, profile.ppd);

    // separable per-axis Gaussians: G(dx, dy) = gx[x] * gy[y], so the
    // inhibition factor needs no exp in the pixel loop
    struct Suppressor {
        double rho;
        std::vector<double> gx, gy;
    };
    std::vector<Suppressor> sup;
    if (profile.memory_span > 0) {
        const double sigma = profile.inhibition_radius_deg * profile.ppd;
        const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
        const double span = profile.memory_span;
        for (const auto& e : memory.entries()) {
            const double rho = std::max(0.0, 1.0 - e.age / span);
            if (rho <= 0.0)
                continue;
            Suppressor s;
            s.rho = rho;
            s.gx.resize(static_cast<std::size_t>(w));
            s.gy.resize(static_cast<std::size_t>(h));
            for (int x = 0; x < w; ++x)
                s.gx[static_cast<std::size_t>(x)] = std::exp(-(x - e.x) * (x - e.x) * inv2s2);
            for (int y = 0; y < h; ++y)
                s.gy[static_cast<std::size_t>(y)] = std::exp(-(y - e.y) * (y - e.y) * inv2s2);
            sup.push_back(std::move(s));
        }
    }

    const int px = static_cast<int>(x_prev.x), py = static_cast<int>(x_prev.y);
    double total = 0.0;
#pragma omp parallel for reduction(+ : total) schedule(static) if (Parallel)
    for (int y = 0; y < h; ++y) {
        double* orow = out.values().data() + static_cast<std::size_t>(y) * w;
        const double* srow = saliency.values().data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x)
            orow[x] = std::max(srow[x], floor_val);
        for (const auto& s : sup) {
            const double rg = s.rho * s.gy[static_cast<std::size_t>(y)];
            const double* gx = s.gx.data();
            for (int x = 0; x < w; ++x)
                orow[x] *= 1.0 - rg * gx[x];
        }
        if (table) {
            const double* trow = table->data() +
                                 static_cast<std::size_t>(y - py + h - 1) * (2 * w - 1) +
                                 (w - 1 - px);
            for (int x = 0; x < w; ++x)
                orow[x] *= trow[x];
        } else if (!uniform) {
            for (int x = 0; x < w; ++x) {
                const double dx = x - x_prev.x;
                const double dy = y - x_prev.y;
                const double d = std::hypot(dx, dy) * inv_ppd;
                const double phi = dx == 0.0 && dy == 0.0
                                       ? 0.0
                                       : fold_angle_deg(std::atan2(-dy, dx) * 180.0 / M_PI);
                orow[x] *= profile.prior.density(x_prev.x, x_prev.y, d, phi);
            }
        }
        if (profile.jacobian_correction) {
            const double dy = y - x_prev.y;
            for (int x = 0; x < w; ++x) {
                const double dx = x - x_prev.x;
                orow[x] /= std::max(std::hypot(dx, dy) * inv_ppd, kDistanceFloorDeg);
            }
        }
        double row_sum = 0.0;
        for (int x = 0; x < w; ++x)
            row_sum += orow[x];
        total += row_sum;
    }
    if (total <= 0.0)
        throw ValidationError("transition_map: all-zero product grid; use a larger amp_max or a "
                              "smaller inhibition_radius");
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] /= total;
    out.set_normalization(GridNorm::SumToOne);
    return out;
}

} // namespace

SaliencyGrid transition_map(const FixationPoint& x_prev, const SaliencyGrid& saliency,
                            const MemoryState& memory, const ViewerProfile& profile) {
    return transition_map_impl<true>(x_prev, saliency, memory, profile);
}

SaliencyGrid serial::transition_map(const FixationPoint& x_prev, const SaliencyGrid& saliency,
                                    const MemoryState& memory, const ViewerProfile& profile) {
    return transition_map_impl<false>(x_prev, saliency, memory, profile);
}

std::vector<FixationPoint> sample_candidates(const SaliencyGrid& map, int n,
                                             std::mt19937_64& rng) {
    if (n < 1)
        throw ConfigError("sample_candidates: n must be >= 1");
    std::vector<double> cdf(map.size());
    std::partial_sum(map.values().begin(), map.values().end(), cdf.begin());
    const double total = cdf.back();
    if (total <= 0.0)
        throw ValidationError("sample_candidates: empty distribution");

    std::uniform_real_distribution<double> uni(0.0, total);
    std::vector<FixationPoint> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), uni(rng));
        const std::size_t idx = std::min(static_cast<std::size_t>(it - cdf.begin()),
                                         map.size() - 1);
        FixationPoint p;
        p.x = static_cast<double>(idx % static_cast<std::size_t>(map.width()));
        p.y = static_cast<double>(idx / static_cast<std::size_t>(map.width()));
        out.push_back(p);
    }
    return out;
}

FixationPoint select_fixation(const std::vector<FixationPoint>& candidates,
                              const SaliencyGrid& saliency, const FixationPoint& x_prev,
                              const ViewerProfile& profile) {
    if (candidates.empty())
        throw ValidationError("select_fixation: no candidates");
    double best_score = -1.0;
    std::size_t best_idx = 0; // row-major tie break
    const FixationPoint* best = nullptr;
    for (const auto& c : candidates) {
        const double dx = c.x - x_prev.x;
        const double dy = c.y - x_prev.y;
        const double d = std::hypot(dx, dy) / profile.ppd;
        const double phi =
            dx == 0.0 && dy == 0.0 ? 0.0 : fold_angle_deg(std::atan2(-dy, dx) * 180.0 / M_PI);
        const double score = saliency.at(static_cast<int>(c.x), static_cast<int>(c.y)) *
                             profile.prior.density(x_prev.x, x_prev.y, d, phi) /
                             std::max(d, kDistanceFloorDeg);
        const std::size_t idx = static_cast<std::size_t>(c.y) * saliency.width() +
                                static_cast<std::size_t>(c.x);
        if (best == nullptr || score > best_score || (score == best_score && idx < best_idx)) {
            best_score = score;
            best_idx = idx;
            best = &c;
        }
    }
    return *best;
}

Scanpath generate_scanpath(const SaliencyGrid& saliency, const ViewerProfile& profile,
                           int n_fixations, std::uint64_t seed, const std::string& image_id) {
    if (n_fixations < 1)
        throw ConfigError("generate_scanpath: n_fixations must be >= 1");
    if (profile.candidate_count < 1 || profile.ppd <= 0.0 || profile.inhibition_radius_deg <= 0.0)
        throw ConfigError("generate_scanpath: invalid profile");
    if (saliency.max_value() <= 0.0)
        throw ValidationError("generate_scanpath: saliency map has no positive values");

    Scanpath path;
    path.image_id = image_id;
    path.seed = seed;
    std::mt19937_64 rng(seed);

    FixationPoint first;
    first.x = static_cast<double>(
        std::uniform_int_distribution<int>(0, saliency.width() - 1)(rng));
    first.y = static_cast<double>(
        std::uniform_int_distribution<int>(0, saliency.height() - 1)(rng));
    first.index = 0;
    path.fixations.push_back(first);

    MemoryState memory(profile.memory_span);
    memory.push(first);
    for (int t = 1; t < n_fixations; ++t) {
        const auto tm = transition_map(path.fixations.back(), saliency, memory, profile);
        const auto candidates = sample_candidates(tm, profile.candidate_count, rng);
        FixationPoint next = select_fixation(candidates, saliency, path.fixations.back(), profile);
        next.index = t;
        memory.push(next);
        path.fixations.push_back(next);
    }
    return path;
}

std::vector<Scanpath> batch_generate(const SaliencyGrid& saliency, const ViewerProfile& profile,
                                     int n_scanpaths, int n_fixations, std::uint64_t master_seed,
                                     const std::string& image_id) {
    if (n_scanpaths < 1)
        throw ConfigError("batch_generate: n_scanpaths must be >= 1");
    std::vector<Scanpath> out(static_cast<std::size_t>(n_scanpaths));
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n_scanpaths; ++k) {
        try {
            out[static_cast<std::size_t>(k)] =
                generate_scanpath(saliency, profile, n_fixations,
                                  master_seed ^ static_cast<std::uint64_t>(k), image_id);
        } catch (...) {
#pragma omp critical
            if (!err)
                err = std::current_exception();
        }
    }
    if (err)
        std::rethrow_exception(err);
    return out;
}

std::vector<SaccadeSample> saccades_from_scanpaths(const std::vector<Scanpath>& paths,
                                                   double ppd) {
    if (ppd <= 0.0)
        throw ConfigError("saccades_from_scanpaths: ppd must be positive");
    std::vector<SaccadeSample> out;
    for (const auto& p : paths) {
        for (std::size_t i = 1; i < p.fixations.size(); ++i) {
            const double dx = p.fixations[i].x - p.fixations[i - 1].x;
            const double dy = p.fixations[i].y - p.fixations[i - 1].y;
            SaccadeSample s;
            s.amplitude_deg = std::hypot(dx, dy) / ppd;
            s.orientation_deg = dx == 0.0 && dy == 0.0
                                    ? 0.0
                                    : fold_angle_deg(std::atan2(-dy, dx) * 180.0 / M_PI);
            out.push_back(s);
        }
    }
    return out;
}

PlausibilityScores scanpath_plausibility(const std::vector<Scanpath>& generated,
                                         const JointSaccadeDistribution& reference, double ppd) {
    auto samples = saccades_from_scanpaths(generated, ppd);
    if (samples.size() < 100)
        throw ValidationError("scanpath_plausibility: need at least 100 generated saccades, got " +
                              std::to_string(samples.size()));
    // saccades past the reference support carry zero reference mass anyway
    std::erase_if(samples, [&](const SaccadeSample& s) {
        return s.amplitude_deg > reference.amp_max_deg;
    });

    kde::KdeParams params;
    params.amp_bins = reference.amp_bins;
    params.amp_max_deg = reference.amp_max_deg;
    params.ori_bins = reference.ori_bins;
    params.explicit_bandwidth = true;
    params.h_d = reference.bandwidth_d_deg;
    params.h_phi = reference.bandwidth_phi_deg;
    const auto estimated = kde::estimate_joint(samples, params);

    PlausibilityScores scores;
    scores.kl_joint = stats::kl_divergence(reference.density, estimated.density);

    std::vector<double> ref_amp(static_cast<std::size_t>(reference.amp_bins), 0.0);
    std::vector<double> gen_amp(static_cast<std::size_t>(reference.amp_bins), 0.0);
    for (int i = 0; i < reference.amp_bins; ++i) {
        for (int j = 0; j < reference.ori_bins; ++j) {
            ref_amp[static_cast<std::size_t>(i)] += reference.at(i, j);
            gen_amp[static_cast<std::size_t>(i)] += estimated.at(i, j);
        }
    }
    scores.kl_amplitude = stats::kl_divergence(ref_amp, gen_amp);
    return scores;
}

std::string scanpaths_to_csv(const std::vector<Scanpath>& paths) {
    std::ostringstream out;
    out.precision(17);
    out << "scanpath_id,seed,index,x,y\n";
    for (std::size_t k = 0; k < paths.size(); ++k)
        for (const auto& f : paths[k].fixations)
            out << k << ',' << paths[k].seed << ',' << f.index << ',' << f.x << ',' << f.y << "\n";
    return out.str();
}

std::vector<Scanpath> scanpaths_from_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line))
        throw ParseError("scanpath CSV: empty input");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "scanpath_id,seed,index,x,y")
        throw ParseError("scanpath CSV: bad header '" + line + "'");

    std::vector<Scanpath> paths;
    int line_no = 1;
    while (std::getline(ss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::stringstream ls(line);
        std::string f[5];
        for (int i = 0; i < 5; ++i)
            if (!std::getline(ls, f[i], ','))
                throw ParseError("scanpath CSV line " + std::to_string(line_no) +
                                 ": expected 5 fields");
        try {
            const auto id = static_cast<std::size_t>(std::stoull(f[0]));
            if (id >= paths.size())
                paths.resize(id + 1);
            paths[id].seed = std::stoull(f[1]);
            FixationPoint p;
            p.index = std::stoi(f[2]);
            p.x = std::stod(f[3]);
            p.y = std::stod(f[4]);
            paths[id].fixations.push_back(p);
        } catch (const std::exception&) {
            throw ParseError("scanpath CSV line " + std::to_string(line_no) + ": bad value");
        }
    }
    return paths;
}

} // namespace sacc::engine
