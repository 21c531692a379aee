#include "sacc/eyedata.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sacc/errors.hpp"

namespace sacc::eyedata {

namespace {

const char* kHeader = "observer_id,image_id,group_id,index,x,y,duration_ms";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

double parse_num(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
    }
}

} // namespace

std::vector<FixationSequence> parse_fixation_log(std::string_view text, int width, int height) {
    if (width <= 0 || height <= 0)
        throw ConfigError("parse_fixation_log: geometry must be positive");

    std::vector<FixationSequence> result;
    if (text.empty())
        return result;

    std::stringstream ss{std::string(text)};
    std::string line;
    int line_no = 0;

    if (!std::getline(ss, line))
        return result;
    ++line_no;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kHeader) {
        const auto expected = split_csv(kHeader);
        const auto got = split_csv(line);
        std::string missing;
        for (const auto& col : expected)
            if (std::find(got.begin(), got.end(), col) == got.end())
                missing += (missing.empty() ? "" : ", ") + col;
        if (!missing.empty())
            throw ParseError("line 1: missing header column(s): " + missing);
        throw ParseError("line 1: expected header '" + std::string(kHeader) + "', got '" + line +
                         "'");
    }

    struct Key {
        std::string observer, image;
        bool operator<(const Key& o) const {
            return std::tie(observer, image) < std::tie(o.observer, o.image);
        }
    };
    // keyed map for grouping, separate list to keep first-appearance order
    std::map<Key, std::size_t> slot;
    std::vector<FixationSequence> seqs;

    while (std::getline(ss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto f = split_csv(line);
        if (f.size() != 7)
            throw ParseError("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                             std::to_string(f.size()));
        FixationPoint p;
        p.index = static_cast<int>(parse_num(f[3], line_no, "index"));
        p.x = parse_num(f[4], line_no, "x");
        p.y = parse_num(f[5], line_no, "y");
        if (!f[6].empty())
            p.duration_ms = parse_num(f[6], line_no, "duration_ms");
        if (p.x < 0.0 || p.x >= width || p.y < 0.0 || p.y >= height)
            throw ValidationError("line " + std::to_string(line_no) + ": fixation (" + f[4] + "," +
                                  f[5] + ") outside geometry " + std::to_string(width) + "x" +
                                  std::to_string(height));

        Key k{f[0], f[1]};
        auto it = slot.find(k);
        if (it == slot.end()) {
            it = slot.emplace(k, seqs.size()).first;
            FixationSequence s;
            s.observer_id = f[0];
            s.image_id = f[1];
            s.group_id = f[2];
            s.width = width;
            s.height = height;
            seqs.push_back(std::move(s));
        }
        seqs[it->second].fixations.push_back(p);
    }

    for (auto& s : seqs) {
        std::stable_sort(s.fixations.begin(), s.fixations.end(),
                         [](const FixationPoint& a, const FixationPoint& b) { return a.index < b.index; });
        if (!s.fixations.empty())
            s.fixations.erase(s.fixations.begin()); // first fixation of every trial is dropped
        if (!s.fixations.empty())
            result.push_back(std::move(s));
    }
    return result;
}

std::string serialize_fixation_log(const std::vector<FixationSequence>& sequences) {
    std::ostringstream out;
    out << kHeader << "\n";
    out.precision(17);
    for (const auto& s : sequences) {
        for (const auto& p : s.fixations) {
            out << s.observer_id << ',' << s.image_id << ',' << s.group_id << ',' << p.index << ','
                << p.x << ',' << p.y << ',';
            if (p.duration_ms)
                out << *p.duration_ms;
            out << "\n";
        }
    }
    return out.str();
}

std::vector<SaccadeSample> saccades_from_sequence(const FixationSequence& seq, double ppd) {
    if (ppd <= 0.0)
        throw ConfigError("saccades_from_sequence: ppd must be positive");
    std::vector<SaccadeSample> out;
    if (seq.fixations.size() < 2)
        return out;
    out.reserve(seq.fixations.size() - 1);
    for (std::size_t i = 1; i < seq.fixations.size(); ++i) {
        const double dx = seq.fixations[i].x - seq.fixations[i - 1].x;
        const double dy = seq.fixations[i].y - seq.fixations[i - 1].y;
        SaccadeSample s;
        s.amplitude_deg = std::hypot(dx, dy) / ppd;
        if (dx == 0.0 && dy == 0.0) {
            s.orientation_deg = 0.0; // zero-vector convention
        } else {
            // screen y grows downward; flip so upward saccades read 90 degrees
            double a = std::atan2(-dy, dx) * 180.0 / M_PI;
            if (a < 0.0)
                a += 360.0;
            if (a >= 360.0)
                a -= 360.0;
            s.orientation_deg = a;
        }
        out.push_back(s);
    }
    return out;
}

namespace {

void splat(SaliencyGrid& g, const FixationPoint& p, double sigma) {
    const double r = 4.0 * sigma;
    const int x0 = std::max(0, static_cast<int>(std::floor(p.x - r)));
    const int x1 = std::min(g.width() - 1, static_cast<int>(std::ceil(p.x + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(p.y - r)));
    const int y1 = std::min(g.height() - 1, static_cast<int>(std::ceil(p.y + r)));
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - p.x;
            const double dy = y - p.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 <= r * r)
                g.at(x, y) += std::exp(-d2 * inv2s2);
        }
    }
}

} // namespace

SaliencyGrid fixation_saliency_map(const std::vector<FixationPoint>& fixations,
                                   int width, int height, double sigma) {
    if (fixations.empty())
        throw ValidationError("fixation_saliency_map: no fixations, density undefined");
    if (sigma <= 0.0)
        throw ConfigError("fixation_saliency_map: sigma must be positive");
    SaliencyGrid g(width, height);

#pragma omp parallel
    {
        SaliencyGrid local(width, height);
#pragma omp for nowait
        for (long i = 0; i < static_cast<long>(fixations.size()); ++i)
            splat(local, fixations[static_cast<std::size_t>(i)], sigma);
#pragma omp critical
        for (std::size_t k = 0; k < g.size(); ++k)
            g[k] += local[k];
    }

    g.normalize_sum_to_one();
    return g;
}

SaliencyGrid serial::fixation_saliency_map(const std::vector<FixationPoint>& fixations,
                                           int width, int height, double sigma) {
    if (fixations.empty())
        throw ValidationError("fixation_saliency_map: no fixations, density undefined");
    if (sigma <= 0.0)
        throw ConfigError("fixation_saliency_map: sigma must be positive");
    SaliencyGrid g(width, height);
    for (const auto& p : fixations)
        splat(g, p, sigma);
    g.normalize_sum_to_one();
    return g;
}

CrownHistogram center_bias_crowns(const std::vector<FixationPoint>& fixations,
                                  int width, int height) {
    if (fixations.empty())
        throw ValidationError("center_bias_crowns: no fixations");
    const double cx = width / 2.0;
    const double cy = height / 2.0;
    const double r10 = std::hypot(cx, cy); // center to top-left corner

    CrownHistogram h{};
    for (const auto& p : fixations) {
        const double rho = std::hypot(p.x - cx, p.y - cy);
        // crown k covers (r_{k-1}, r_k]; rho = 0 counts in crown 1,
        // anything past the outermost circle lands in crown 10
        int k;
        if (rho == 0.0) {
            k = 0;
        } else {
            k = static_cast<int>(std::ceil(rho / r10 * 10.0)) - 1;
            k = std::clamp(k, 0, 9);
        }
        h.shares[static_cast<std::size_t>(k)] += 1.0;
    }
    for (double& s : h.shares)
        s /= static_cast<double>(fixations.size());
    return h;
}

} // namespace sacc::eyedata
