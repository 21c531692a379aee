#include "sacc/cli.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

#include "sacc/eyedata.hpp"
#include "sacc/io.hpp"
#include "sacc/metrics.hpp"
#include "sacc/stats.hpp"

namespace sacc::cli {

namespace fs = std::filesystem;

namespace {

void ensure_out_dir(const fs::path& dir) {
    if (dir.empty())
        throw ConfigError("output directory not set");
    fs::create_directories(dir);
}

std::map<std::string, std::vector<FixationSequence>> group_sequences(
    const std::vector<FixationSequence>& seqs, const std::string& filter) {
    std::map<std::string, std::vector<FixationSequence>> groups;
    for (const auto& s : seqs)
        if (filter.empty() || s.group_id == filter)
            groups[s.group_id].push_back(s);
    return groups;
}

std::vector<SaccadeSample> pooled_saccades(const std::vector<FixationSequence>& seqs,
                                           double ppd) {
    std::vector<SaccadeSample> out;
    for (const auto& s : seqs) {
        auto v = eyedata::saccades_from_sequence(s, ppd);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

kde::KdeParams fit_amp_max(kde::KdeParams params, const std::vector<SaccadeSample>& samples,
                           bool auto_grow) {
    if (!auto_grow)
        return params;
    double mx = 0.0;
    for (const auto& s : samples)
        mx = std::max(mx, s.amplitude_deg);
    if (mx > params.amp_max_deg) {
        // keep the bin width, extend the support to cover the data
        const double step = params.amp_max_deg / params.amp_bins;
        params.amp_bins = static_cast<int>(std::ceil(mx / step));
        params.amp_max_deg = params.amp_bins * step;
    }
    return params;
}

} // namespace

JointSaccadeDistribution pool_spatial_set(const SpatialDistributionSet& set) {
    const auto& ref = set.cells[0][0];
    JointSaccadeDistribution pooled;
    pooled.amp_bins = ref.amp_bins;
    pooled.amp_max_deg = ref.amp_max_deg;
    pooled.ori_bins = ref.ori_bins;
    pooled.density.assign(ref.density.size(), 0.0);
    double wsum = 0.0;
    for (const auto& row : set.cells) {
        for (const auto& c : row) {
            if (c.amp_bins != ref.amp_bins || c.ori_bins != ref.ori_bins ||
                c.amp_max_deg != ref.amp_max_deg)
                throw ValidationError("pool_spatial_set: cells disagree on bin geometry");
            const double w = static_cast<double>(c.sample_count);
            for (std::size_t i = 0; i < c.density.size(); ++i)
                pooled.density[i] += w * c.density[i];
            pooled.bandwidth_d_deg += w * c.bandwidth_d_deg;
            pooled.bandwidth_phi_deg += w * c.bandwidth_phi_deg;
            pooled.sample_count += c.sample_count;
            wsum += w;
        }
    }
    if (wsum <= 0.0)
        throw ValidationError("pool_spatial_set: no samples in any cell");
    for (double& v : pooled.density)
        v /= wsum;
    pooled.bandwidth_d_deg /= wsum;
    pooled.bandwidth_phi_deg /= wsum;
    return pooled;
}

int cmd_estimate(const EstimateOptions& opt) {
    ensure_out_dir(opt.out_dir);
    const auto seqs =
        eyedata::parse_fixation_log(io::read_text_file(opt.log_path), opt.width, opt.height);
    const auto groups = group_sequences(seqs, opt.group_filter);
    if (groups.empty())
        throw ValidationError("estimate: no sequences" +
                              (opt.group_filter.empty() ? std::string()
                                                        : " for group " + opt.group_filter));

    for (const auto& [group, gseqs] : groups) {
        const auto samples = pooled_saccades(gseqs, opt.ppd);
        const auto params = fit_amp_max(opt.kde, samples, opt.auto_amp_max);

        const auto pooled = kde::estimate_joint(samples, params);
        io::write_text_file(opt.out_dir / (group + "_pooled.json"), to_json_string(pooled));

        if (opt.spatial) {
            const auto counts = kde::spatial_sample_counts(gseqs, opt.ppd);
            std::cout << group << " per-cell sample counts:\n";
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c)
                    std::cout << "  " << counts[static_cast<std::size_t>(r)]
                                               [static_cast<std::size_t>(c)];
                std::cout << "\n";
            }
            const auto set = kde::estimate_spatial_set(gseqs, opt.ppd, params);
            io::write_text_file(opt.out_dir / (group + "_spatial.json"), to_json_string(set));
        }
    }
    return 0;
}

engine::ViewerProfile load_profile(const fs::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("profile " + path.string() + ": " + e.what());
    }
    engine::ViewerProfile p;
    p.candidate_count = j.value("candidate_count", 5);
    p.memory_span = j.value("memory_span", 5);
    p.ppd = j.value("ppd", 28.0);
    p.inhibition_radius_deg = j.value("inhibition_radius_deg", 2.0);
    p.jacobian_correction = j.value("jacobian_correction", false);

    const std::string dist = j.value("distribution_path", "uniform");
    if (dist == "uniform" || dist.empty()) {
        p.prior = engine::SaccadePrior::uniform();
    } else {
        fs::path dp(dist);
        if (dp.is_relative())
            dp = path.parent_path() / dp;
        const auto text = io::read_text_file(dp);
        if (nlohmann::json::parse(text).contains("cells"))
            p.prior = engine::SaccadePrior::spatial(spatial_set_from_json(text));
        else
            p.prior = engine::SaccadePrior::single(joint_from_json(text));
    }
    return p;
}

namespace {

/// Re-reads the distribution behind a profile, pooled to a single joint
/// distribution, for KL reference use.
JointSaccadeDistribution load_profile_reference(const fs::path& profile_path) {
    const auto j = nlohmann::json::parse(io::read_text_file(profile_path));
    const std::string dist = j.value("distribution_path", "uniform");
    if (dist == "uniform" || dist.empty())
        throw ConfigError("profile has no distribution to use as a KL reference");
    fs::path dp(dist);
    if (dp.is_relative())
        dp = profile_path.parent_path() / dp;
    const auto text = io::read_text_file(dp);
    if (nlohmann::json::parse(text).contains("cells"))
        return pool_spatial_set(spatial_set_from_json(text));
    return joint_from_json(text);
}

engine::ViewerProfile apply_overrides(engine::ViewerProfile p, const GenerateOptions& opt) {
    if (opt.uniform_prior)
        p.prior = engine::SaccadePrior::uniform();
    if (opt.candidate_count)
        p.candidate_count = *opt.candidate_count;
    if (opt.memory_span)
        p.memory_span = *opt.memory_span;
    if (opt.jacobian_correction)
        p.jacobian_correction = *opt.jacobian_correction;
    return p;
}

std::vector<FixationPoint> all_fixations(const std::vector<engine::Scanpath>& paths) {
    std::vector<FixationPoint> out;
    for (const auto& p : paths)
        out.insert(out.end(), p.fixations.begin(), p.fixations.end());
    return out;
}

} // namespace

int cmd_generate(const GenerateOptions& opt) {
    ensure_out_dir(opt.out_dir);
    const auto saliency = io::load_grid(opt.saliency_path);
    const auto profile = apply_overrides(load_profile(opt.profile_path), opt);

    const auto paths = engine::batch_generate(saliency, profile, opt.n_scanpaths,
                                              opt.n_fixations, opt.seed);
    io::write_text_file(opt.out_dir / "scanpaths.csv", engine::scanpaths_to_csv(paths));

    const auto map = eyedata::fixation_saliency_map(all_fixations(paths), saliency.width(),
                                                    saliency.height(), profile.ppd);
    io::save_png(map, opt.out_dir / "scanpath_saliency.png");
    io::save_sgf(map, opt.out_dir / "scanpath_saliency.sgf");
    return 0;
}

int cmd_evaluate(const EvaluateOptions& opt) {
    ensure_out_dir(opt.out_dir);
    const auto human = io::load_grid(opt.human_map_path);
    const int w = opt.width > 0 ? opt.width : human.width();
    const int h = opt.height > 0 ? opt.height : human.height();

    std::vector<engine::Scanpath> paths;
    SaliencyGrid predicted;
    if (opt.predicted_path.extension() == ".csv") {
        paths = engine::scanpaths_from_csv(io::read_text_file(opt.predicted_path));
        predicted = eyedata::fixation_saliency_map(all_fixations(paths), w, h, opt.ppd);
    } else {
        predicted = io::load_grid(opt.predicted_path);
    }
    if (predicted.width() != human.width() || predicted.height() != human.height())
        throw ValidationError("evaluate: predicted " + std::to_string(predicted.width()) + "x" +
                              std::to_string(predicted.height()) + " vs human " +
                              std::to_string(human.width()) + "x" +
                              std::to_string(human.height()));

    const auto seqs = eyedata::parse_fixation_log(io::read_text_file(opt.log_path), w, h);
    std::map<std::pair<std::string, std::string>, std::vector<FixationPoint>> cells;
    for (const auto& s : seqs) {
        auto& fx = cells[{s.image_id, s.group_id}];
        fx.insert(fx.end(), s.fixations.begin(), s.fixations.end());
    }
    if (cells.empty())
        throw ValidationError("evaluate: fixation log is empty");

    const bool with_kl = !opt.reference_dist_path.empty();
    std::optional<engine::PlausibilityScores> kl;
    if (with_kl) {
        if (paths.empty())
            throw ConfigError("evaluate: --reference-dist needs a scanpath CSV input");
        const auto text = io::read_text_file(opt.reference_dist_path);
        const auto reference = nlohmann::json::parse(text).contains("cells")
                                   ? pool_spatial_set(spatial_set_from_json(text))
                                   : joint_from_json(text);
        kl = engine::scanpath_plausibility(paths, reference, opt.ppd);
    }

    std::ostringstream out;
    out << metrics::report_csv_header();
    if (with_kl)
        out << ",kl_amplitude,kl_joint";
    out << "\n";
    for (const auto& [key, fixations] : cells) {
        const auto report = metrics::evaluate_all(predicted, human, fixations);
        out << metrics::report_csv_row(key.first, key.second, opt.model_label, report);
        if (with_kl)
            out << ',' << kl->kl_amplitude << ',' << kl->kl_joint;
        out << "\n";
        for (const auto& e : report.errors)
            std::cerr << "evaluate " << key.first << "/" << key.second << ": " << e << "\n";
    }
    io::write_text_file(opt.out_dir / "metrics.csv", out.str());
    return 0;
}

int cmd_sweep_nc(const SweepNcOptions& opt) {
    ensure_out_dir(opt.out_dir);
    if (opt.nc_min < 1 || opt.nc_max > 64 || opt.nc_min > opt.nc_max)
        throw ConfigError("sweep-nc: range must lie within [1, 64]");
    const auto saliency = io::load_grid(opt.saliency_path);
    auto profile = load_profile(opt.profile_path);
    const auto reference = load_profile_reference(opt.profile_path);

    const bool with_metrics = !opt.human_map_path.empty() && !opt.log_path.empty();
    SaliencyGrid human;
    std::vector<FixationPoint> fixations;
    if (with_metrics) {
        human = io::load_grid(opt.human_map_path);
        const auto seqs = eyedata::parse_fixation_log(io::read_text_file(opt.log_path),
                                                      human.width(), human.height());
        for (const auto& s : seqs)
            fixations.insert(fixations.end(), s.fixations.begin(), s.fixations.end());
    }

    std::ostringstream out;
    out.precision(10);
    out << "nc,kl_amplitude,kl_joint,cc,sim,emd,auc_judd,auc_borji,nss\n";
    for (int nc = opt.nc_min; nc <= opt.nc_max; ++nc) {
        profile.candidate_count = nc;
        double kl_a = 0.0, kl_j = 0.0;
        std::array<double, 6> ms{};
        std::array<long, 6> mn{};
        for (int rep = 0; rep < opt.repetitions; ++rep) {
            const std::uint64_t seed =
                opt.seed ^ (static_cast<std::uint64_t>(nc) * 0x9e3779b97f4a7c15ULL) ^
                (static_cast<std::uint64_t>(rep) * 0xc2b2ae3d27d4eb4fULL);
            const auto paths = engine::batch_generate(saliency, profile, opt.n_scanpaths,
                                                      opt.n_fixations, seed);
            const auto kl = engine::scanpath_plausibility(paths, reference, profile.ppd);
            kl_a += kl.kl_amplitude;
            kl_j += kl.kl_joint;
            if (with_metrics) {
                const auto map = eyedata::fixation_saliency_map(
                    all_fixations(paths), human.width(), human.height(), profile.ppd);
                const auto r = metrics::evaluate_all(map, human, fixations);
                const std::array<std::optional<double>, 6> fields{r.cc,       r.sim,
                                                                  r.emd,      r.auc_judd,
                                                                  r.auc_borji, r.nss};
                for (std::size_t i = 0; i < 6; ++i)
                    if (fields[i]) {
                        ms[i] += *fields[i];
                        ++mn[i];
                    }
            }
        }
        out << nc << ',' << kl_a / opt.repetitions << ',' << kl_j / opt.repetitions;
        for (std::size_t i = 0; i < 6; ++i) {
            out << ',';
            if (mn[i] > 0)
                out << ms[i] / mn[i];
        }
        out << "\n";
    }
    io::write_text_file(opt.out_dir / "sweep_nc.csv", out.str());
    return 0;
}

int cmd_analyze(const AnalyzeOptions& opt) {
    ensure_out_dir(opt.out_dir);
    const auto seqs =
        eyedata::parse_fixation_log(io::read_text_file(opt.log_path), opt.width, opt.height);
    const auto groups = group_sequences(seqs, "");
    if (groups.empty())
        throw ValidationError("analyze: fixation log is empty");

    std::ostringstream crowns;
    crowns.precision(10);
    crowns << "group_id";
    for (int k = 1; k <= 10; ++k)
        crowns << ",crown" << k;
    crowns << "\n";

    std::map<std::string, std::vector<SaccadeSample>> samples;
    for (const auto& [group, gseqs] : groups) {
        std::vector<FixationPoint> fx;
        for (const auto& s : gseqs)
            fx.insert(fx.end(), s.fixations.begin(), s.fixations.end());
        const auto ch = eyedata::center_bias_crowns(fx, opt.width, opt.height);
        crowns << group;
        for (double s : ch.shares)
            crowns << ',' << s;
        crowns << "\n";

        samples[group] = pooled_saccades(gseqs, opt.ppd);
        const auto params = fit_amp_max(opt.kde, samples[group], true);
        const auto joint = kde::estimate_joint(samples[group], params);
        io::write_text_file(opt.out_dir / (group + "_joint.json"), to_json_string(joint));

        std::ostringstream amp;
        amp.precision(10);
        amp << "amplitude_deg,density\n";
        for (int i = 0; i < joint.amp_bins; ++i) {
            double marginal = 0.0;
            for (int j = 0; j < joint.ori_bins; ++j)
                marginal += joint.at(i, j);
            amp << joint.amp_center(i) << ',' << marginal * joint.ori_step() << "\n";
        }
        io::write_text_file(opt.out_dir / (group + "_amplitude.csv"), amp.str());
    }
    io::write_text_file(opt.out_dir / "crowns.csv", crowns.str());

    std::ostringstream ks;
    ks.precision(10);
    ks << "group_a,group_b,statistic,p_value\n";
    for (const auto& [ga, sa] : samples) {
        for (const auto& [gb, sb] : samples) {
            const auto r = stats::ks2d_test(sa, sb, opt.ks_draws);
            ks << ga << ',' << gb << ',' << r.statistic << ',' << r.p_value << "\n";
        }
    }
    io::write_text_file(opt.out_dir / "ks_matrix.csv", ks.str());
    return 0;
}

} // namespace sacc::cli
