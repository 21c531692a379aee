#include "sacc/distribution.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace sacc {

double evaluate_density(const JointSaccadeDistribution& dist, double d, double phi) {
    if (d < 0.0)
        throw ValidationError("evaluate_density: negative amplitude");
    if (d > dist.amp_max_deg)
        return 0.0;
    phi = std::fmod(phi, 360.0);
    if (phi < 0.0)
        phi += 360.0;

    // amplitude axis: clamp to the outer bin centers (half-cell flat extension)
    const double aw = dist.amp_step();
    double ai = d / aw - 0.5;
    int a0, a1;
    double ta;
    if (ai <= 0.0) {
        a0 = a1 = 0;
        ta = 0.0;
    } else if (ai >= dist.amp_bins - 1) {
        a0 = a1 = dist.amp_bins - 1;
        ta = 0.0;
    } else {
        a0 = static_cast<int>(ai);
        a1 = a0 + 1;
        ta = ai - a0;
    }

    // orientation axis: circular
    const double ow = dist.ori_step();
    double oi = phi / ow - 0.5;
    if (oi < 0.0)
        oi += dist.ori_bins;
    const int o0 = static_cast<int>(oi) % dist.ori_bins;
    const int o1 = (o0 + 1) % dist.ori_bins;
    const double to = oi - std::floor(oi);

    const double v00 = dist.at(a0, o0), v01 = dist.at(a0, o1);
    const double v10 = dist.at(a1, o0), v11 = dist.at(a1, o1);
    return (1.0 - ta) * ((1.0 - to) * v00 + to * v01) + ta * ((1.0 - to) * v10 + to * v11);
}

namespace {

nlohmann::json joint_to_json(const JointSaccadeDistribution& d) {
    return nlohmann::json{{"amp_bins", d.amp_bins},
                          {"amp_max_deg", d.amp_max_deg},
                          {"ori_bins", d.ori_bins},
                          {"bandwidth_d_deg", d.bandwidth_d_deg},
                          {"bandwidth_phi_deg", d.bandwidth_phi_deg},
                          {"sample_count", d.sample_count},
                          {"density", d.density}};
}

JointSaccadeDistribution joint_from(const nlohmann::json& j) {
    JointSaccadeDistribution d;
    d.amp_bins = j.at("amp_bins").get<int>();
    d.amp_max_deg = j.at("amp_max_deg").get<double>();
    d.ori_bins = j.at("ori_bins").get<int>();
    d.bandwidth_d_deg = j.at("bandwidth_d_deg").get<double>();
    d.bandwidth_phi_deg = j.at("bandwidth_phi_deg").get<double>();
    d.sample_count = j.at("sample_count").get<long>();
    d.density = j.at("density").get<std::vector<double>>();
    if (d.amp_bins <= 0 || d.ori_bins <= 0 || d.amp_max_deg <= 0.0)
        throw ValidationError("distribution JSON: bad bin geometry");
    if (d.density.size() != static_cast<std::size_t>(d.amp_bins) * d.ori_bins)
        throw ValidationError("distribution JSON: density length does not match bins");
    return d;
}

} // namespace

std::string to_json_string(const JointSaccadeDistribution& dist) {
    return joint_to_json(dist).dump();
}

std::string to_json_string(const SpatialDistributionSet& set) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& row : set.cells) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& c : row)
            r.push_back(joint_to_json(c));
        cells.push_back(std::move(r));
    }
    return nlohmann::json{{"width", set.width}, {"height", set.height}, {"cells", cells}}.dump();
}

JointSaccadeDistribution joint_from_json(const std::string& text) {
    try {
        return joint_from(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("distribution JSON: ") + e.what());
    }
}

SpatialDistributionSet spatial_set_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        SpatialDistributionSet s;
        s.width = j.at("width").get<int>();
        s.height = j.at("height").get<int>();
        const auto& cells = j.at("cells");
        if (cells.size() != 3)
            throw ValidationError("spatial set JSON: expected 3 rows of cells");
        for (std::size_t r = 0; r < 3; ++r) {
            if (cells[r].size() != 3)
                throw ValidationError("spatial set JSON: expected 3 cells per row");
            for (std::size_t c = 0; c < 3; ++c)
                s.cells[r][c] = joint_from(cells[r][c]);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("spatial set JSON: ") + e.what());
    }
}

} // namespace sacc
