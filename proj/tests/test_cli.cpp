#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sacc/cli.hpp"
#include "sacc/distribution.hpp"
#include "sacc/errors.hpp"
#include "sacc/eyedata.hpp"
#include "sacc/io.hpp"
#include "helpers.hpp"

using namespace sacc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sacc_cli_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

/// Synthetic fixation log: per group and image, several trials of uniformly
/// random fixations. Index 0 exists so the parser has a first fixation to drop.
std::string make_log(const std::vector<std::string>& groups, int images, int observers,
                     int fixations_per_trial, int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, width - 1.0), uy(0.0, height - 1.0);
    std::ostringstream out;
    out << "observer_id,image_id,group_id,index,x,y,duration_ms\n";
    for (const auto& g : groups)
        for (int im = 0; im < images; ++im)
            for (int ob = 0; ob < observers; ++ob)
                for (int i = 0; i < fixations_per_trial; ++i)
                    out << g << "_obs" << ob << ",img" << im << ',' << g << ',' << i << ','
                        << ux(rng) << ',' << uy(rng) << ",200\n";
    return out.str();
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        out.push_back(f);
    if (!line.empty() && line.back() == ',')
        out.push_back("");
    return out;
}

void write_mixture_profile(const fs::path& dir, int candidate_count = 5) {
    const auto dist = testing::grid_from_density(80, 20.0, 120, [](double d, double phi) {
        return testing::mixture_density({{1.0, 3.0, 1.2, 90.0, 40.0}}, d, phi);
    });
    io::write_text_file(dir / "dist.json", to_json_string(dist));
    std::ostringstream p;
    p << "{\"candidate_count\":" << candidate_count
      << ",\"memory_span\":5,\"ppd\":28.0,\"inhibition_radius_deg\":2.0,"
         "\"distribution_path\":\"dist.json\",\"jacobian_correction\":false}";
    io::write_text_file(dir / "profile.json", p.str());
}

} // namespace

TEST_CASE("estimate fans out per group") {
    TempDir tmp;
    const fs::path log = tmp.path / "log.csv";
    io::write_text_file(log, make_log({"adults", "children"}, 2, 8, 12, 640, 480, 1));

    cli::EstimateOptions opt;
    opt.log_path = log;
    opt.width = 640;
    opt.height = 480;
    opt.out_dir = tmp.path / "out";
    REQUIRE(cli::cmd_estimate(opt) == 0);

    for (const std::string g : {"adults", "children"}) {
        CHECK(fs::exists(opt.out_dir / (g + "_pooled.json")));
        CHECK(fs::exists(opt.out_dir / (g + "_spatial.json")));
        const auto joint = joint_from_json(io::read_text_file(opt.out_dir / (g + "_pooled.json")));
        double total = 0.0;
        for (double v : joint.density)
            total += v;
        CHECK(total * joint.cell_area() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(joint.sample_count > 0);
    }
}

TEST_CASE("estimate honours the group filter and the pooled-only grid") {
    TempDir tmp;
    const fs::path log = tmp.path / "log.csv";
    io::write_text_file(log, make_log({"adults", "children"}, 1, 6, 10, 640, 480, 2));

    cli::EstimateOptions opt;
    opt.log_path = log;
    opt.width = 640;
    opt.height = 480;
    opt.group_filter = "adults";
    opt.spatial = false;
    opt.out_dir = tmp.path / "out";
    REQUIRE(cli::cmd_estimate(opt) == 0);

    CHECK(fs::exists(opt.out_dir / "adults_pooled.json"));
    CHECK_FALSE(fs::exists(opt.out_dir / "adults_spatial.json"));
    CHECK_FALSE(fs::exists(opt.out_dir / "children_pooled.json"));

    opt.group_filter = "nobody";
    CHECK_THROWS_AS(cli::cmd_estimate(opt), ValidationError);
}

TEST_CASE("estimate grows the amplitude support to cover the data") {
    TempDir tmp;
    // one trial whose retained saccade spans 1680 px = 60 deg at 28 ppd
    std::ostringstream log;
    log << "observer_id,image_id,group_id,index,x,y,duration_ms\n";
    log << "o,i,g,0,0,10,100\n";
    log << "o,i,g,1,10,10,100\n";
    log << "o,i,g,2,1690,10,100\n";
    log << "o,i,g,3,100,10,100\n";
    io::write_text_file(tmp.path / "log.csv", log.str());

    cli::EstimateOptions opt;
    opt.log_path = tmp.path / "log.csv";
    opt.width = 1800;
    opt.height = 20;
    opt.spatial = false;
    opt.out_dir = tmp.path / "out";
    REQUIRE(cli::cmd_estimate(opt) == 0);

    const auto joint = joint_from_json(io::read_text_file(opt.out_dir / "g_pooled.json"));
    CHECK(joint.amp_max_deg >= 60.0);
    CHECK(joint.amp_max_deg / joint.amp_bins == doctest::Approx(20.0 / 80).epsilon(1e-12));
}

TEST_CASE("estimate reports a missing header column by name") {
    TempDir tmp;
    io::write_text_file(tmp.path / "log.csv", "observer_id,image_id,index,x,y,duration_ms\n");
    cli::EstimateOptions opt;
    opt.log_path = tmp.path / "log.csv";
    opt.width = 100;
    opt.height = 100;
    opt.out_dir = tmp.path / "out";
    try {
        cli::cmd_estimate(opt);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("group_id") != std::string::npos);
    }
}

TEST_CASE("load_profile resolves the distribution next to the profile") {
    TempDir tmp;
    write_mixture_profile(tmp.path, 7);
    const auto p = cli::load_profile(tmp.path / "profile.json");
    CHECK(p.candidate_count == 7);
    CHECK(p.memory_span == 5);
    CHECK(p.ppd == 28.0);
    CHECK_FALSE(p.prior.is_uniform());
    CHECK(p.prior.density(0.0, 0.0, 3.0, 90.0) > p.prior.density(0.0, 0.0, 15.0, 270.0));

    io::write_text_file(tmp.path / "uniform.json", "{\"distribution_path\":\"uniform\"}");
    CHECK(cli::load_profile(tmp.path / "uniform.json").prior.is_uniform());
    io::write_text_file(tmp.path / "broken.json", "{not json");
    CHECK_THROWS_AS(cli::load_profile(tmp.path / "broken.json"), ParseError);
}

TEST_CASE("generate writes a reproducible scanpath bundle") {
    TempDir tmp;
    write_mixture_profile(tmp.path);
    io::save_sgf(testing::random_grid(320, 240, 5), tmp.path / "sal.sgf");

    cli::GenerateOptions opt;
    opt.saliency_path = tmp.path / "sal.sgf";
    opt.profile_path = tmp.path / "profile.json";
    opt.n_scanpaths = 20;
    opt.n_fixations = 15;
    opt.seed = 99;
    opt.out_dir = tmp.path / "out";
    REQUIRE(cli::cmd_generate(opt) == 0);

    CHECK(fs::exists(opt.out_dir / "scanpath_saliency.png"));
    CHECK(fs::exists(opt.out_dir / "scanpath_saliency.sgf"));
    const auto lines = read_lines(opt.out_dir / "scanpaths.csv");
    REQUIRE(lines.size() == 1 + 20 * 15);
    CHECK(lines[0] == "scanpath_id,seed,index,x,y");

    const auto first = io::read_text_file(opt.out_dir / "scanpaths.csv");
    opt.out_dir = tmp.path / "out2";
    REQUIRE(cli::cmd_generate(opt) == 0);
    CHECK(io::read_text_file(opt.out_dir / "scanpaths.csv") == first);

    opt.seed = 100;
    opt.out_dir = tmp.path / "out3";
    REQUIRE(cli::cmd_generate(opt) == 0);
    CHECK(io::read_text_file(opt.out_dir / "scanpaths.csv") != first);
}

TEST_CASE("generate overrides take effect") {
    TempDir tmp;
    write_mixture_profile(tmp.path);
    io::save_sgf(testing::random_grid(160, 120, 6), tmp.path / "sal.sgf");

    cli::GenerateOptions opt;
    opt.saliency_path = tmp.path / "sal.sgf";
    opt.profile_path = tmp.path / "profile.json";
    opt.n_scanpaths = 4;
    opt.n_fixations = 6;
    opt.seed = 1;
    opt.uniform_prior = true;
    opt.candidate_count = 2;
    opt.out_dir = tmp.path / "a";
    REQUIRE(cli::cmd_generate(opt) == 0);
    const auto uniform_run = io::read_text_file(opt.out_dir / "scanpaths.csv");

    opt.uniform_prior = false;
    opt.out_dir = tmp.path / "b";
    REQUIRE(cli::cmd_generate(opt) == 0);
    CHECK(io::read_text_file(opt.out_dir / "scanpaths.csv") != uniform_run);
}

TEST_CASE("evaluate scores a map against itself as a perfect prediction") {
    TempDir tmp;
    const auto human = testing::random_grid(320, 240, 7);
    io::save_sgf(human, tmp.path / "human.sgf");
    io::write_text_file(tmp.path / "log.csv", make_log({"adults"}, 2, 4, 8, 320, 240, 8));

    cli::EvaluateOptions opt;
    opt.predicted_path = tmp.path / "human.sgf";
    opt.human_map_path = tmp.path / "human.sgf";
    opt.log_path = tmp.path / "log.csv";
    opt.out_dir = tmp.path / "out";
    REQUIRE(cli::cmd_evaluate(opt) == 0);

    const auto lines = read_lines(opt.out_dir / "metrics.csv");
    REQUIRE(lines.size() == 3); // header + (img0, img1) x adults
    CHECK(lines[0] == "image_id,group_id,model,cc,sim,emd,auc_judd,auc_borji,nss");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_csv(lines[i]);
        REQUIRE(f.size() == 9);
        CHECK(f[1] == "adults");
        CHECK(f[2] == "model");
        CHECK(std::stod(f[3]) == doctest::Approx(1.0).epsilon(1e-9));  // cc
        CHECK(std::stod(f[4]) == doctest::Approx(1.0).epsilon(1e-9));  // sim
        CHECK(std::stod(f[5]) == doctest::Approx(0.0).epsilon(1e-4).scale(1.0)); // emd
    }
}

TEST_CASE("evaluate accepts scanpaths and adds KL columns against a reference") {
    TempDir tmp;
    write_mixture_profile(tmp.path);
    io::save_sgf(testing::random_grid(320, 240, 9), tmp.path / "sal.sgf");
    io::write_text_file(tmp.path / "log.csv", make_log({"adults"}, 1, 4, 8, 320, 240, 10));

    cli::GenerateOptions gen;
    gen.saliency_path = tmp.path / "sal.sgf";
    gen.profile_path = tmp.path / "profile.json";
    gen.n_scanpaths = 10;
    gen.n_fixations = 15;
    gen.seed = 3;
    gen.out_dir = tmp.path / "gen";
    REQUIRE(cli::cmd_generate(gen) == 0);

    cli::EvaluateOptions opt;
    opt.predicted_path = gen.out_dir / "scanpaths.csv";
    opt.human_map_path = tmp.path / "sal.sgf";
    opt.log_path = tmp.path / "log.csv";
    opt.reference_dist_path = tmp.path / "dist.json";
    opt.out_dir = tmp.path / "out";
    REQUIRE(cli::cmd_evaluate(opt) == 0);

    const auto lines = read_lines(opt.out_dir / "metrics.csv");
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] ==
          "image_id,group_id,model,cc,sim,emd,auc_judd,auc_borji,nss,kl_amplitude,kl_joint");
    const auto f = split_csv(lines[1]);
    REQUIRE(f.size() == 11);
    CHECK(std::stod(f[9]) >= 0.0);
    CHECK(std::stod(f[10]) >= 0.0);

    // a plain map input cannot supply saccades for the KL reference
    opt.predicted_path = tmp.path / "sal.sgf";
    CHECK_THROWS_AS(cli::cmd_evaluate(opt), ConfigError);
}

TEST_CASE("evaluate rejects mismatched map shapes") {
    TempDir tmp;
    io::save_sgf(testing::random_grid(320, 240, 11), tmp.path / "human.sgf");
    io::save_sgf(testing::random_grid(300, 240, 12), tmp.path / "pred.sgf");
    io::write_text_file(tmp.path / "log.csv", make_log({"adults"}, 1, 2, 5, 300, 240, 13));

    cli::EvaluateOptions opt;
    opt.predicted_path = tmp.path / "pred.sgf";
    opt.human_map_path = tmp.path / "human.sgf";
    opt.log_path = tmp.path / "log.csv";
    opt.out_dir = tmp.path / "out";
    CHECK_THROWS_AS(cli::cmd_evaluate(opt), ValidationError);
}

TEST_CASE("sweep-nc writes one deterministic row per candidate count") {
    TempDir tmp;
    write_mixture_profile(tmp.path);
    io::save_sgf(testing::random_grid(320, 240, 14), tmp.path / "sal.sgf");

    cli::SweepNcOptions opt;
    opt.saliency_path = tmp.path / "sal.sgf";
    opt.profile_path = tmp.path / "profile.json";
    opt.nc_min = 1;
    opt.nc_max = 3;
    opt.n_scanpaths = 10;
    opt.n_fixations = 15;
    opt.seed = 21;
    opt.out_dir = tmp.path / "out";
    REQUIRE(cli::cmd_sweep_nc(opt) == 0);

    const auto lines = read_lines(opt.out_dir / "sweep_nc.csv");
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "nc,kl_amplitude,kl_joint,cc,sim,emd,auc_judd,auc_borji,nss");
    for (int nc = 1; nc <= 3; ++nc) {
        const auto f = split_csv(lines[static_cast<std::size_t>(nc)]);
        REQUIRE(f.size() == 9);
        CHECK(f[0] == std::to_string(nc));
        CHECK(std::stod(f[1]) >= 0.0);
        CHECK(std::stod(f[2]) >= 0.0);
        CHECK(f[3].empty()); // no human map given, metric means stay blank
    }

    const auto first = io::read_text_file(opt.out_dir / "sweep_nc.csv");
    opt.out_dir = tmp.path / "out2";
    REQUIRE(cli::cmd_sweep_nc(opt) == 0);
    CHECK(io::read_text_file(opt.out_dir / "sweep_nc.csv") == first);

    opt.nc_min = 0;
    CHECK_THROWS_AS(cli::cmd_sweep_nc(opt), ConfigError);
}

TEST_CASE("analyze summarizes groups and cross-compares them") {
    TempDir tmp;
    io::write_text_file(tmp.path / "log.csv",
                        make_log({"adults", "children"}, 2, 6, 10, 640, 480, 22));

    cli::AnalyzeOptions opt;
    opt.log_path = tmp.path / "log.csv";
    opt.width = 640;
    opt.height = 480;
    opt.ks_draws = 1000;
    opt.out_dir = tmp.path / "out";
    REQUIRE(cli::cmd_analyze(opt) == 0);

    const auto crowns = read_lines(opt.out_dir / "crowns.csv");
    REQUIRE(crowns.size() == 3);
    CHECK(crowns[0].rfind("group_id,crown1,", 0) == 0);
    for (std::size_t i = 1; i < crowns.size(); ++i) {
        const auto f = split_csv(crowns[i]);
        REQUIRE(f.size() == 11);
        double total = 0.0;
        for (std::size_t k = 1; k < f.size(); ++k)
            total += std::stod(f[k]);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }

    for (const std::string g : {"adults", "children"}) {
        CHECK(fs::exists(opt.out_dir / (g + "_joint.json")));
        const auto amp = read_lines(opt.out_dir / (g + "_amplitude.csv"));
        CHECK(amp[0] == "amplitude_deg,density");
        CHECK(amp.size() > 10);
    }

    const auto ks = read_lines(opt.out_dir / "ks_matrix.csv");
    REQUIRE(ks.size() == 5); // header + 2x2 matrix in long form
    CHECK(ks[0] == "group_a,group_b,statistic,p_value");
    for (std::size_t i = 1; i < ks.size(); ++i) {
        const auto f = split_csv(ks[i]);
        REQUIRE(f.size() == 4);
        if (f[0] == f[1]) {
            CHECK(std::stod(f[2]) == 0.0);
            CHECK(std::stod(f[3]) > 0.99);
        }
    }
}
