#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

#include "sacc/cli.hpp"
#include "sacc/errors.hpp"

namespace {

void add_kde_flags(CLI::App* cmd, sacc::kde::KdeParams& kde, std::string& grid,
                   std::string& rule) {
    cmd->add_option("--amp-bins", kde.amp_bins, "Amplitude bins");
    cmd->add_option("--amp-max", kde.amp_max_deg, "Amplitude support in degrees");
    cmd->add_option("--ori-bins", kde.ori_bins, "Orientation bins over [0,360)");
    cmd->add_option("--bandwidth", rule, "Bandwidth rule: silverman or botev")
        ->check(CLI::IsMember({"silverman", "botev"}));
    cmd->add_option("--grid", grid, "Distribution grid: 3x3 or 1x1")
        ->check(CLI::IsMember({"3x3", "1x1"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Age-dependent saccadic scanpath simulation and evaluation"};
    app.require_subcommand(1);

    sacc::cli::EstimateOptions est;
    std::string est_grid = "3x3", est_rule = "silverman";
    auto* estimate = app.add_subcommand("estimate", "Estimate saccade distributions from a log");
    estimate->add_option("--log", est.log_path, "Fixation log CSV")->required();
    estimate->add_option("--width", est.width, "Image width in pixels")->required();
    estimate->add_option("--height", est.height, "Image height in pixels")->required();
    estimate->add_option("--ppd", est.ppd, "Pixels per degree");
    estimate->add_option("--group", est.group_filter, "Only this group_id");
    estimate->add_option("--out", est.out_dir, "Output directory")->required();
    add_kde_flags(estimate, est.kde, est_grid, est_rule);

    sacc::cli::GenerateOptions gen;
    bool gen_uniform = false, gen_jacobian = false;
    int gen_nc = -1, gen_memory = -1;
    auto* generate = app.add_subcommand("generate", "Generate scanpaths over a saliency map");
    generate->add_option("--saliency", gen.saliency_path, "Saliency map (PNG or SGF)")->required();
    generate->add_option("--profile", gen.profile_path, "Viewer profile JSON")->required();
    generate->add_option("--scanpaths", gen.n_scanpaths, "Number of scanpaths");
    generate->add_option("--fixations", gen.n_fixations, "Fixations per scanpath");
    generate->add_option("--seed", gen.seed, "Master RNG seed")->required();
    generate->add_option("--nc", gen_nc, "Candidate count override");
    generate->add_option("--memory-span", gen_memory, "Memory span override");
    generate->add_flag("--uniform-prior", gen_uniform, "Force the uniform saccade prior");
    generate->add_flag("--jacobian-correction", gen_jacobian, "Apply the 1/d polar correction");
    generate->add_option("--out", gen.out_dir, "Output directory")->required();

    sacc::cli::EvaluateOptions ev;
    auto* evaluate = app.add_subcommand("evaluate", "Score a prediction against ground truth");
    evaluate->add_option("--predicted", ev.predicted_path, "Predicted map or scanpath CSV")
        ->required();
    evaluate->add_option("--human-map", ev.human_map_path, "Human saliency map")->required();
    evaluate->add_option("--log", ev.log_path, "Fixation log CSV")->required();
    evaluate->add_option("--width", ev.width, "Log geometry width (defaults to the map's)");
    evaluate->add_option("--height", ev.height, "Log geometry height (defaults to the map's)");
    evaluate->add_option("--ppd", ev.ppd, "Pixels per degree");
    evaluate->add_option("--model", ev.model_label, "Model label for the CSV rows");
    evaluate->add_option("--reference-dist", ev.reference_dist_path,
                         "Reference distribution JSON; adds KL plausibility columns");
    evaluate->add_option("--seed", ev.seed, "RNG seed")->required();
    evaluate->add_option("--out", ev.out_dir, "Output directory")->required();

    sacc::cli::SweepNcOptions sw;
    auto* sweep = app.add_subcommand("sweep-nc", "Sweep the candidate count");
    sweep->add_option("--saliency", sw.saliency_path, "Saliency map")->required();
    sweep->add_option("--profile", sw.profile_path, "Viewer profile JSON")->required();
    sweep->add_option("--nc-min", sw.nc_min, "Lowest candidate count");
    sweep->add_option("--nc-max", sw.nc_max, "Highest candidate count");
    sweep->add_option("--repetitions", sw.repetitions, "Repetitions per Nc");
    sweep->add_option("--scanpaths", sw.n_scanpaths, "Scanpaths per repetition");
    sweep->add_option("--fixations", sw.n_fixations, "Fixations per scanpath");
    sweep->add_option("--seed", sw.seed, "Master RNG seed")->required();
    sweep->add_option("--human-map", sw.human_map_path, "Optional human map for metric means");
    sweep->add_option("--log", sw.log_path, "Optional fixation log for metric means");
    sweep->add_option("--out", sw.out_dir, "Output directory")->required();

    sacc::cli::AnalyzeOptions an;
    std::string an_grid = "1x1", an_rule = "silverman";
    auto* analyze = app.add_subcommand("analyze", "Crowns, distributions and KS tests per group");
    analyze->add_option("--log", an.log_path, "Fixation log CSV")->required();
    analyze->add_option("--width", an.width, "Image width in pixels")->required();
    analyze->add_option("--height", an.height, "Image height in pixels")->required();
    analyze->add_option("--ppd", an.ppd, "Pixels per degree");
    analyze->add_option("--ks-draws", an.ks_draws, "Samples drawn per KS test");
    analyze->add_option("--out", an.out_dir, "Output directory")->required();
    add_kde_flags(analyze, an.kde, an_grid, an_rule);

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed()) {
            est.spatial = est_grid == "3x3";
            est.kde.rule = est_rule == "botev" ? sacc::kde::BandwidthRule::Botev
                                               : sacc::kde::BandwidthRule::Silverman;
            return sacc::cli::cmd_estimate(est);
        }
        if (generate->parsed()) {
            gen.uniform_prior = gen_uniform;
            if (gen_jacobian)
                gen.jacobian_correction = true;
            if (gen_nc > 0)
                gen.candidate_count = gen_nc;
            if (gen_memory >= 0)
                gen.memory_span = gen_memory;
            return sacc::cli::cmd_generate(gen);
        }
        if (evaluate->parsed())
            return sacc::cli::cmd_evaluate(ev);
        if (sweep->parsed())
            return sacc::cli::cmd_sweep_nc(sw);
        if (analyze->parsed()) {
            an.kde.rule = an_rule == "botev" ? sacc::kde::BandwidthRule::Botev
                                             : sacc::kde::BandwidthRule::Silverman;
            return sacc::cli::cmd_analyze(an);
        }
    } catch (const sacc::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sacc::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sacc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
